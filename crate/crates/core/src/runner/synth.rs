//! Seeded synthetic datasets with the sizes and rough geometry of the
//! public benchmarks, for use when the real files are not available.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::data::DataMatrix;
use crate::error::{BfcError, Result};
use crate::runner::dataset::Dataset;

pub const SYNTHETIC_NAMES: [&str; 5] = ["r15", "aggregation", "compound", "cadata", "city"];

/// Generates a named dataset; `seed` only perturbs the random ones.
pub fn synthetic(name: &str, seed: u64) -> Result<Dataset> {
    match name.to_ascii_lowercase().as_str() {
        "r15" => Ok(r15_like(seed)),
        "aggregation" => Ok(aggregation_like(seed)),
        "compound" => Ok(compound_like(seed)),
        "cadata" => Ok(cadata_like(seed)),
        "city" => Ok(city_example().0),
        other => Err(BfcError::InvalidArgument(format!(
            "unknown synthetic dataset '{other}' (expected one of {})",
            SYNTHETIC_NAMES.join(", ")
        ))),
    }
}

struct Shapes {
    rng: ChaCha8Rng,
    data: Vec<f64>,
    labels: Vec<i64>,
}

impl Shapes {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            data: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn push(&mut self, x: f64, y: f64, label: i64) {
        self.data.extend([x, y]);
        self.labels.push(label);
    }

    fn gaussian(&mut self, cx: f64, cy: f64, sd: f64, count: usize, label: i64) {
        let nd = Normal::new(0.0, sd).unwrap();
        for _ in 0..count {
            let (dx, dy) = (nd.sample(&mut self.rng), nd.sample(&mut self.rng));
            self.push(cx + dx, cy + dy, label);
        }
    }

    /// Uniform in an axis-aligned ellipse.
    fn ellipse(&mut self, cx: f64, cy: f64, rx: f64, ry: f64, count: usize, label: i64) {
        for _ in 0..count {
            let r = self.rng.random::<f64>().sqrt();
            let t = self.rng.random::<f64>() * 2.0 * PI;
            self.push(cx + rx * r * t.cos(), cy + ry * r * t.sin(), label);
        }
    }

    /// Uniform in an annulus sector from angle `a0` to `a1`.
    #[allow(clippy::too_many_arguments)]
    fn ring(
        &mut self,
        cx: f64,
        cy: f64,
        r0: f64,
        r1: f64,
        a0: f64,
        a1: f64,
        count: usize,
        label: i64,
    ) {
        for _ in 0..count {
            let u: f64 = self.rng.random();
            let r = (r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt();
            let t = a0 + self.rng.random::<f64>() * (a1 - a0);
            self.push(cx + r * t.cos(), cy + r * t.sin(), label);
        }
    }

    /// Evenly spaced jittered points on a segment.
    #[allow(clippy::too_many_arguments)]
    fn segment(
        &mut self,
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        jitter: f64,
        count: usize,
        label: i64,
    ) {
        for k in 0..count {
            let t = (k as f64 + 0.5) / count as f64;
            let jx = (self.rng.random::<f64>() - 0.5) * jitter;
            let jy = (self.rng.random::<f64>() - 0.5) * jitter;
            self.push(x0 + t * (x1 - x0) + jx, y0 + t * (y1 - y0) + jy, label);
        }
    }

    fn finish(self) -> Dataset {
        let n = self.labels.len();
        Dataset {
            x: DataMatrix::new(n, 2, self.data).expect("finite synthetic data"),
            y: None,
            labels: Some(self.labels),
        }
    }
}

/// 600 points, 15 Gaussian clusters of 40: one central, six on an inner
/// ring, eight on an outer ring.
pub fn r15_like(seed: u64) -> Dataset {
    let mut s = Shapes::new(seed ^ 0x5215);
    let (cx, cy) = (10.0, 10.0);
    let mut centers = vec![(cx, cy)];
    for k in 0..6 {
        let t = k as f64 * PI / 3.0;
        centers.push((cx + 2.0 * t.cos(), cy + 2.0 * t.sin()));
    }
    for k in 0..8 {
        let t = k as f64 * PI / 4.0 + PI / 8.0;
        centers.push((cx + 6.5 * t.cos(), cy + 6.5 * t.sin()));
    }
    for (label, &(x, y)) in centers.iter().enumerate() {
        s.gaussian(x, y, 0.32, 40, label as i64 + 1);
    }
    s.finish()
}

/// 788 points in 7 uniform blobs of sizes 45, 170, 102, 273, 34, 130, 34;
/// two pairs of blobs are joined by thin bridges.
pub fn aggregation_like(seed: u64) -> Dataset {
    let mut s = Shapes::new(seed ^ 0xA66);
    s.ellipse(8.0, 23.0, 3.2, 2.8, 45, 1);
    s.ellipse(10.0, 8.0, 6.0, 5.0, 164, 2);
    s.segment(16.0, 8.5, 18.6, 9.0, 0.15, 6, 2);
    s.ellipse(18.0, 23.0, 4.5, 4.0, 102, 3);
    s.ellipse(32.0, 22.0, 6.5, 6.0, 267, 4);
    s.segment(28.5, 16.2, 29.7, 13.4, 0.15, 6, 4);
    s.ellipse(21.0, 9.0, 2.4, 2.4, 34, 5);
    s.ellipse(32.0, 8.0, 5.5, 4.5, 130, 6);
    s.ellipse(25.0, 15.0, 1.6, 2.2, 34, 7);
    s.finish()
}

/// 399 points in 6 clusters of sizes 50, 92, 38, 45, 158, 16 with mixed
/// densities, a ring around a core and a sparse cloud around a dense spot.
pub fn compound_like(seed: u64) -> Dataset {
    let mut s = Shapes::new(seed ^ 0xC0);
    s.ellipse(10.0, 20.0, 2.5, 2.5, 50, 1);
    s.ring(10.0, 20.0, 4.5, 6.0, 0.0, 2.0 * PI, 92, 2);
    s.ellipse(24.0, 22.0, 1.8, 3.0, 38, 3);
    s.ellipse(28.5, 22.0, 1.8, 3.0, 45, 4);
    s.ellipse(30.0, 7.0, 7.0, 5.0, 142, 5);
    s.ring(30.0, 7.0, 0.0, 1.0, 0.0, 2.0 * PI, 16, 6);
    // thin out the sparse cloud near its dense core
    let mut out = Shapes::new(0);
    for (k, &l) in s.labels.iter().enumerate() {
        let (x, y) = (s.data[2 * k], s.data[2 * k + 1]);
        if l == 5 && ((x - 30.0).powi(2) + (y - 7.0).powi(2)).sqrt() < 2.0 {
            continue;
        }
        out.push(x, y, l);
    }
    let missing = 399 - out.labels.len();
    let mut extra = Shapes::new(seed ^ 0xC1);
    extra.ring(30.0, 7.0, 2.5, 4.5, 0.0, 2.0 * PI, missing, 5);
    out.data.extend(extra.data);
    out.labels.extend(extra.labels);
    out.finish()
}

/// 20,640 x 8 housing-style regression set: income, age, rooms, bedrooms,
/// population, households, latitude, longitude; the target is a clipped
/// house value driven by income and distance to a few metro centers.
pub fn cadata_like(seed: u64) -> Dataset {
    const N: usize = 20_640;
    let metros = [
        (34.05, -118.25, 1.4),
        (37.77, -122.42, 1.6),
        (32.72, -117.16, 1.1),
        (38.58, -121.49, 0.8),
        (36.74, -119.78, 0.6),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xCADA);
    let income = LogNormal::new(1.25, 0.45).unwrap();
    let unit = Normal::new(0.0, 1.0).unwrap();
    let rooms = LogNormal::new(7.6, 0.6).unwrap();
    let mut data = Vec::with_capacity(N * 8);
    let mut y = Vec::with_capacity(N);
    for _ in 0..N {
        let (mlat, mlon, premium) = metros[rng.random_range(0..metros.len())];
        let spread = 0.3 + 1.2 * rng.random::<f64>();
        let lat = mlat + spread * unit.sample(&mut rng) * 0.6;
        let lon = mlon + spread * unit.sample(&mut rng) * 0.6;
        let dist = ((lat - mlat).powi(2) + (lon - mlon).powi(2)).sqrt();
        let inc = f64::min(income.sample(&mut rng), 15.0);
        let age = rng.random_range(1.0..52.0f64).round();
        let total_rooms: f64 = rooms.sample(&mut rng);
        let households = (total_rooms / (4.0 + 2.0 * rng.random::<f64>()))
            .max(1.0)
            .round();
        let bedrooms = (total_rooms * (0.18 + 0.06 * rng.random::<f64>())).round();
        let population = (households * (2.2 + 1.5 * rng.random::<f64>())).round();
        let value = 45_000.0 * inc + 90_000.0 * premium * (-dist).exp() - 600.0 * age
            + 8.0 * total_rooms / households * 1_000.0
            + 25_000.0 * unit.sample(&mut rng);
        data.extend([
            inc,
            age,
            total_rooms.round(),
            bedrooms,
            population,
            households,
            lat,
            lon,
        ]);
        y.push(value.clamp(14_999.0, 500_001.0));
    }
    Dataset {
        x: DataMatrix::new(N, 8, data).expect("finite synthetic data"),
        y: Some(y),
        labels: None,
    }
}

/// Twelve cities in four regions. Region spreads reproduce the tree weights
/// 1, 3+4+5+7, 2 and 1+2, and region centers sit 30 and 16 apart in pairs,
/// so level 1 has compactness [1, 4.75, 2, 1.5] and dispersion
/// [30, 30, 16, 16]. Labels are the region ids.
pub fn city_example() -> (Dataset, Vec<&'static str>) {
    const EAST: f64 = 76.0;
    let third = 4.0 / 3.0;
    let rows: [(&str, f64, f64, i64); 12] = [
        ("London", 7.7, 30.0, 0),
        ("Paris", 8.7, 30.0, 0),
        ("Tokyo", 0.0, 0.0, 1),
        ("Seoul", 3.0, 0.0, 1),
        ("Beijing", 7.0, 0.0, 1),
        ("Shanghai", 12.0, 0.0, 1),
        ("Hong Kong", 19.0, 0.0, 1),
        ("Los Angeles", EAST + third - 1.0, 16.0, 2),
        ("San Francisco", EAST + third + 1.0, 16.0, 2),
        ("Chicago", EAST, 0.0, 3),
        ("Washington", EAST + 1.0, 0.0, 3),
        ("New York", EAST + 3.0, 0.0, 3),
    ];
    let data = rows.iter().flat_map(|r| [r.1, r.2]).collect();
    let ds = Dataset {
        x: DataMatrix::new(12, 2, data).expect("finite"),
        y: None,
        labels: Some(rows.iter().map(|r| r.3).collect()),
    };
    (ds, rows.iter().map(|r| r.0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn distinct(l: &[i64]) -> usize {
        l.iter().collect::<BTreeSet<_>>().len()
    }

    #[test]
    fn shape_sizes() {
        for (name, n, k) in [
            ("r15", 600, 15),
            ("aggregation", 788, 7),
            ("compound", 399, 6),
        ] {
            let ds = synthetic(name, 0).unwrap();
            assert_eq!(ds.x.rows(), n, "{name}");
            assert_eq!(ds.x.cols(), 2);
            assert_eq!(distinct(ds.labels.as_ref().unwrap()), k, "{name}");
        }
    }

    #[test]
    fn cadata_shape_and_determinism() {
        let a = cadata_like(3);
        assert_eq!((a.x.rows(), a.x.cols()), (20_640, 8));
        let y = a.y.as_ref().unwrap();
        assert!(y.iter().all(|v| (14_999.0..=500_001.0).contains(v)));
        assert_eq!(a, cadata_like(3));
        assert_ne!(a.y, cadata_like(4).y);
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(synthetic("iris", 0).is_err());
    }
}
