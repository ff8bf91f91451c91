"""Golden reference fixtures for the Rust test suite.

Regenerate with `python fixtures/generate.py fixtures/` (numpy, scipy and
scikit-learn required). Every fixture embeds its inputs, so the Rust tests
never need this script or a shared RNG protocol. Output is canonical JSON:
sorted keys, floats at 17 significant digits.
"""
import csv
import datetime
import math
import os
import sys

import numpy as np
import scipy
import scipy.linalg
import scipy.stats
import sklearn
from sklearn.metrics import mutual_info_score, precision_recall_fscore_support
from sklearn.preprocessing import RobustScaler

SEED = 7
VERSIONS = {"numpy": np.__version__, "scipy": scipy.__version__, "sklearn": sklearn.__version__}
STAMP = os.environ.get("FIXTURE_TIMESTAMP", datetime.date.today().isoformat())


def canon(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if v == 0.0:
            return "0.0"
        s = format(v, ".17g")
        if "e" not in s and "." not in s and "inf" not in s and "nan" not in s:
            s += ".0"
        return s
    if isinstance(v, str):
        import json
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ",".join(canon(k) + ":" + canon(v[k]) for k in sorted(v)) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ",".join(canon(x) for x in v) + "]"
    if v is None:
        return "null"
    raise TypeError(type(v))


def write(out, name, cases):
    doc = {"name": name, "versions": VERSIONS, "generated": STAMP, "cases": cases}
    with open(os.path.join(out, name + ".json"), "w") as fh:
        fh.write(canon(doc) + "\n")


def quantiles(rng):
    vecs = [[1.0, 2.0, 3.0, 4.0, 5.0], [7.0, 7.0, 7.0]]
    while len(vecs) < 20:
        n = int(rng.integers(2, 30))
        v = rng.normal(0, 10, n)
        if rng.random() < 0.3:
            v = np.round(v)
        vecs.append([float(x) for x in v])
    cases = []
    for v in vecs:
        a = np.array(v)
        scaled = RobustScaler().fit_transform(a.reshape(-1, 1)).ravel()
        cases.append({
            "input": v,
            "q1": float(np.percentile(a, 25)),
            "median": float(np.percentile(a, 50)),
            "q3": float(np.percentile(a, 75)),
            "robust_scaled": [float(x) for x in scaled],
        })
    return cases


def wilcoxon_rplus(d):
    ranks = scipy.stats.rankdata(np.abs(d))
    return float(ranks[d > 0].sum())


def wilcoxon_cases(rng):
    cases = []
    a = np.arange(1, 9, dtype=float) + 0.5
    b = np.arange(1, 9, dtype=float)
    raw = [(list(a), list(b))]
    while len(raw) < 50:
        n = int(rng.integers(8, 13))
        x = rng.normal(0.9, 0.05, n)
        shift = rng.normal(0.01, 0.02)
        y = x - shift - rng.normal(0, 0.02, n)
        if rng.random() < 0.5:
            x = np.round(x, 2)
            y = np.round(y, 2)
        if rng.random() < 0.3:
            y[0] = x[0]
        if np.all(x == y):
            continue
        raw.append((list(x), list(y)))
    for x, y in raw:
        x = np.array(x)
        y = np.array(y)
        d = x - y
        d_nz = d[d != 0]
        n = len(d_nz)
        r_plus = wilcoxon_rplus(d_nz)
        total = n * (n + 1) / 2
        case = {"a": list(x), "b": list(y), "n_effective": n, "r_plus": r_plus, "r_minus": total - r_plus}
        for alt in ["two-sided", "greater", "less"]:
            res = scipy.stats.permutation_test(
                (d_nz,), lambda s, axis=-1: np.apply_along_axis(wilcoxon_rplus, axis, s),
                permutation_type="samples", n_resamples=np.inf, alternative=alt, vectorized=True,
            )
            case["p_" + alt.replace("-", "_")] = float(res.pvalue)
        cases.append(case)
    return cases


def confusion_cases(rng):
    cases = [{"matrix": [[25, 0, 0], [0, 25, 0], [0, 0, 25]]}]
    while len(cases) < 30:
        m = rng.integers(0, 20, (3, 3))
        if rng.random() < 0.3:
            m[:, rng.integers(0, 3)] = 0
        if m.sum() == 0:
            continue
        cases.append({"matrix": m.tolist()})
    for c in cases:
        m = np.array(c["matrix"])
        yt, yp = [], []
        for t in range(3):
            for p in range(3):
                yt += [t] * int(m[t, p])
                yp += [p] * int(m[t, p])
        for avg in ["macro", "weighted"]:
            p, r, f, _ = precision_recall_fscore_support(yt, yp, labels=[0, 1, 2], average=avg, zero_division=0)
            c[avg] = {"precision": float(p), "recall": float(r), "f1": float(f)}
        c["accuracy"] = float(np.trace(m) / m.sum())
    return cases


def tomek_cases(rng):
    cases = []
    for i in range(10):
        n = int(rng.integers(5, 16))
        k = 2 if i % 2 == 0 else 3
        x = np.round(rng.normal(0, 2, (n, 2)), 1)
        y = rng.integers(0, k, n)
        nn = []
        for a in range(n):
            best, bd = -1, math.inf
            for b in range(n):
                if a == b:
                    continue
                dist = float(np.sum((x[a] - x[b]) ** 2))
                if dist < bd:
                    best, bd = b, dist
            nn.append(best)
        links = [[a, nn[a]] for a in range(n) if nn[a] > a and nn[nn[a]] == a and y[a] != y[nn[a]]]
        cases.append({"x": x.tolist(), "y": y.tolist(), "links": links})
    return cases


def lda_cases(rng):
    cases = []
    for _ in range(5):
        d = 4
        means = rng.normal(0, 3, (3, d))
        xs, ys = [], []
        for c in range(3):
            n = int(rng.integers(20, 40))
            cov = np.diag(rng.uniform(0.5, 2.0, d))
            xs.append(rng.multivariate_normal(means[c], cov, n))
            ys += [c] * n
        x = np.vstack(xs)
        y = np.array(ys)
        mu = x.mean(0)
        sw = np.zeros((d, d))
        sb = np.zeros((d, d))
        for c in range(3):
            xc = x[y == c]
            mc = xc.mean(0)
            sw += (xc - mc).T @ (xc - mc)
            sb += len(xc) * np.outer(mc - mu, mc - mu)
        evals = scipy.linalg.eigh(sb, sw, eigvals_only=True)
        evals = np.sort(evals)[::-1]
        cases.append({"x": x.tolist(), "y": y.tolist(), "m": 2, "fisher_criterion": float(evals[:2].sum()),
                      "eigenvalues": [float(e) for e in evals[:2]]})
    return cases


def encoded_surrogate(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    occ_counts = {}
    for r in rows:
        occ_counts[r["Occupation"]] = occ_counts.get(r["Occupation"], 0) + 1
    occs = sorted({o if occ_counts[o] >= 5 else "Other" for o in occ_counts})
    bmi = {"Normal": 21.7, "Normal Weight": 21.7, "Overweight": 27.5, "Obese": 32.5, "Underweight": 17.0}
    target = {"Insomnia": 0, "None": 1, "Sleep Apnea": 2}
    x, y = [], []
    for r in rows:
        sys_bp, dia_bp = (float(v) for v in r["Blood Pressure"].split("/"))
        occ = r["Occupation"] if occ_counts[r["Occupation"]] >= 5 else "Other"
        sleep = float(r["Sleep Duration"])
        quality = float(r["Quality of Sleep"])
        activity = float(r["Physical Activity Level"])
        stress = float(r["Stress Level"])
        hr = float(r["Heart Rate"])
        steps = float(r["Daily Steps"])
        b = bmi[r["BMI Category"]]
        row = [1.0 if r["Gender"] == "Male" else 0.0, float(r["Age"]), sleep, quality, activity, stress, b,
               hr, steps, sys_bp, dia_bp]
        row += [1.0 if occ == o else 0.0 for o in occs]
        row += [stress / quality, sleep / hr, sleep / steps, sleep / stress, b * activity, sys_bp - dia_bp,
                math.log(steps), math.sqrt(sleep)]
        x.append(row)
        y.append(target[r["Sleep Disorder"]])
    names = ["Gender", "Age", "Sleep Duration", "Quality of Sleep", "Physical Activity Level", "Stress Level",
             "BMI Category", "Heart Rate", "Daily Steps", "Systolic BP", "Diastolic BP"]
    names += ["Occupation_" + o for o in occs]
    names += ["stress_sleep_interaction", "sleep_heart_ratio", "sleep_steps_ratio", "sleep_stress_ratio",
              "bmi_activity", "pulse_pressure", "log_steps", "sqrt_sleep"]
    return names, np.array(x), np.array(y)


def histogram_mi(col, y, bins=10):
    lo, hi = col.min(), col.max()
    if hi == lo:
        return 0.0
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.clip(np.searchsorted(edges, col, side="right") - 1, 0, bins - 1)
    return max(0.0, float(mutual_info_score(y, idx)))


def mi_cases(root):
    names, x, y = encoded_surrogate(os.path.join(root, "data", "sleep_surrogate.csv"))
    return [{
        "source": "data/sleep_surrogate.csv",
        "feature_names": names,
        "x": x.tolist(),
        "y": y.tolist(),
        "bins": 10,
        "mi": [histogram_mi(x[:, j], y) for j in range(x.shape[1])],
    }]


def main(out):
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    rng = np.random.default_rng(SEED)
    write(out, "quantiles", quantiles(rng))
    write(out, "wilcoxon", wilcoxon_cases(rng))
    write(out, "confusion_metrics", confusion_cases(rng))
    write(out, "tomek_links", tomek_cases(rng))
    write(out, "lda_fisher", lda_cases(rng))
    write(out, "mi_histogram", mi_cases(root))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
