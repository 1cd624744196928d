"""Smoke test for the `bfc` Python module.

Build the extension first:

    cargo build -p bfc-py --release

then run `python3 python/smoke_test.py`. The module is loaded from
target/release unless BFC_PY_LIB points at another build.
"""

import importlib.machinery
import importlib.util
import math
import os
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    try:
        import bfc  # noqa: F401  installed module takes precedence

        return bfc
    except ImportError:
        pass
    path = os.environ.get("BFC_PY_LIB")
    if path is None:
        for name in ("libbfc.so", "libbfc.dylib", "bfc.dll"):
            candidate = os.path.join(ROOT, "target", "release", name)
            if os.path.exists(candidate):
                path = candidate
                break
    if path is None:
        sys.exit("bfc extension not found; run `cargo build -p bfc-py --release`")
    loader = importlib.machinery.ExtensionFileLoader("bfc", path)
    spec = importlib.util.spec_from_file_location("bfc", path, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def check(cond, what):
    if not cond:
        raise AssertionError(what)
    print(f"ok  {what}")


def main():
    bfc = load_module()

    # best friend graph on a line: every point pairs with its neighbour
    targets, weights = bfc.best_friend_graph([[0.0], [1.0], [3.0], [3.5]])
    check(targets == [1, 0, 3, 2], "best friend targets")
    check(weights == [1.0, 1.0, 0.5, 0.5], "best friend weights")

    x, labels, y = bfc.synthetic_dataset("city")
    h = bfc.Hierarchy(x)
    check(h.level_sizes == [4, 2, 1], f"city levels {h.level_sizes}")
    check(abs(h.hci[0] - 0.82) <= 0.005, f"city HCI {h.hci[0]:.4f}")
    check(h.optimal_level == 1, "city optimal level")
    check(sorted(h.order) == list(range(12)), "organized order is a permutation")
    check(abs(bfc.hci([1, 4.75, 2, 1.5], [30, 30, 16, 16]) - 0.8171) < 1e-3, "hci()")

    plan = h.partition(3)
    check(sum(plan.loads) == 12 and max(plan.loads) <= plan.load_bound, f"plan {plan}")

    x, labels, _ = bfc.synthetic_dataset("r15")
    h = bfc.Hierarchy(x, workers=2)
    pred = h.assignment()
    score = bfc.ami(labels, pred)
    check(score >= 0.8, f"r15 AMI {score:.3f}")
    try:
        from sklearn.metrics import adjusted_mutual_info_score

        ref = adjusted_mutual_info_score(labels, pred, average_method="max")
        check(abs(ref - score) < 1e-9, f"AMI matches scikit-learn ({ref:.6f})")
    except ImportError:
        print("--  scikit-learn not installed; AMI cross-check skipped")

    # small regression problem
    pts = [[i / 20.0, (i * 7 % 13) / 13.0] for i in range(200)]
    target = [math.sin(3 * a) + b for a, b in pts]
    ens = bfc.Ensemble.train(pts, target, model="krr", p=4, lambdas=[1e-3, 1e-2], sigma=0.3)
    err = ens.evaluate(pts, target)
    check(err < 0.1, f"training MSE {err:.4g} ({ens.params})")
    check(abs(bfc.mse(ens.predict(pts), target) - err) < 1e-12, "mse() agrees with evaluate()")
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "ensemble.bin")
        ens.save(path)
        back = bfc.Ensemble.load(path)
        check(back.predict(pts) == ens.predict(pts), "ensemble save/load round trip")

    try:
        bfc.Hierarchy([[0.0, 1.0], [1.0]])
    except ValueError as e:
        check("dimension" in str(e) or "row" in str(e), f"ragged input rejected: {e}")
    else:
        raise AssertionError("ragged input accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
