//! Run reports: per-level, partition, regression and bench tables written as
//! long-format CSV, plus a separate timing file.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use crate::error::Result;
use crate::hierarchy::Hierarchy;
use crate::partition::PartitionPlan;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub level: usize,
    pub clusters: usize,
    pub hci: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessRow {
    pub process: usize,
    pub load: usize,
    pub groups: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionRow {
    pub model: String,
    pub params: String,
    /// Hold-out score during selection; NaN when there was nothing to select.
    pub validation_mse: f64,
    pub selected: bool,
}

/// Wall time of the three phases, in seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timing {
    pub clustering: f64,
    pub regression: f64,
    pub reduce: f64,
}

impl Timing {
    pub fn add(&mut self, other: Timing) {
        self.clustering += other.clustering;
        self.regression += other.regression;
        self.reduce += other.reduce;
    }

    pub fn total(&self) -> f64 {
        self.clustering + self.regression + self.reduce
    }

    pub fn to_csv(&self) -> String {
        let total = self.total();
        let pct = |s: f64| if total > 0.0 { 100.0 * s / total } else { 0.0 };
        let mut out = String::from("phase,seconds,percent\n");
        for (name, s) in [
            ("clustering", self.clustering),
            ("regression", self.regression),
            ("reduce", self.reduce),
        ] {
            let _ = writeln!(out, "{name},{s:.6},{:.2}", pct(s));
        }
        out
    }
}

pub(crate) fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Everything a command produced. Timing is kept out of `report.csv` so that
/// identical runs give identical report files.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub meta: Vec<(String, String)>,
    pub levels: Vec<LevelRow>,
    pub partition: Vec<ProcessRow>,
    pub regression: Vec<RegressionRow>,
    /// Free-form rows: (table, index, field, value).
    pub extra: Vec<(String, usize, String, String)>,
    pub mse: Option<f64>,
    pub ami: Option<f64>,
    pub timing: Timing,
}

fn field(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

impl Report {
    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn set_levels(&mut self, h: &Hierarchy) {
        self.levels = h
            .levels
            .iter()
            .zip(&h.hci)
            .map(|(l, &hci)| LevelRow {
                level: l.level,
                clusters: l.num_clusters(),
                hci,
            })
            .collect();
    }

    pub fn set_partition(&mut self, plan: &PartitionPlan) {
        self.partition = (0..plan.p)
            .map(|q| {
                let mut groups = plan.processes[q].clone();
                groups.sort_unstable();
                ProcessRow {
                    process: q,
                    load: plan.loads[q],
                    groups,
                }
            })
            .collect();
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("table,index,field,value\n");
        let mut row = |t: &str, i: usize, f: &str, v: String| {
            let _ = writeln!(out, "{t},{i},{},{}", field(f), field(&v));
        };
        for (i, (k, v)) in self.meta.iter().enumerate() {
            row("meta", i, k, v.clone());
        }
        for l in &self.levels {
            row("levels", l.level, "clusters", l.clusters.to_string());
            row("levels", l.level, "hci", l.hci.to_string());
        }
        for p in &self.partition {
            row("partition", p.process, "load", p.load.to_string());
            let g: Vec<String> = p.groups.iter().map(|g| g.to_string()).collect();
            row("partition", p.process, "groups", g.join(" "));
        }
        for (i, r) in self.regression.iter().enumerate() {
            row("regression", i, "model", r.model.clone());
            row("regression", i, "params", r.params.clone());
            row(
                "regression",
                i,
                "validation_mse",
                r.validation_mse.to_string(),
            );
            row("regression", i, "selected", r.selected.to_string());
        }
        if let Some(m) = self.mse {
            row("result", 0, "mse", m.to_string());
        }
        if let Some(a) = self.ami {
            row("result", 0, "ami", a.to_string());
        }
        for (t, i, f, v) in &self.extra {
            row(t, *i, f, v.clone());
        }
        out
    }

    /// Writes `report.csv` and `timing.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.to_csv())?;
        std::fs::write(dir.join("timing.csv"), self.timing.to_csv())?;
        Ok(())
    }
}
