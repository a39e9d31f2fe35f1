"""Regenerates reference_stats.json from scipy/statsmodels.

    python3 gen_reference.py > reference_stats.json
"""
import json

import numpy as np
from scipy import stats
from statsmodels.stats.multitest import multipletests

rng = np.random.default_rng(20240611)

holm = []
for i in range(24):
    m = int(rng.integers(1, 41))
    if i % 4 == 0:
        p = rng.uniform(0.0, 0.05, size=m)
    elif i % 4 == 1:
        p = rng.beta(0.5, 2.0, size=m)
    else:
        p = rng.uniform(0.0, 1.0, size=m)
    if i == 5:
        p[: m // 2] = p[0]  # ties
    adj = multipletests(p, method="holm")[1]
    holm.append({"p": p.tolist(), "adjusted": adj.tolist()})

t_sf = []
for df in [1, 2, 3, 5, 7, 10, 30, 100]:
    for t in [-3.5, -1.0, -0.49, 0.0, 0.2, 0.49, 1.0, 2.015, 3.0, 8.0]:
        t_sf.append({"df": df, "t": t, "sf": float(stats.t.sf(t, df))})

t_ppf = []
for df in [1, 2, 5, 10, 47]:
    for q in [0.9, 0.95, 0.975, 0.99]:
        t_ppf.append({"df": df, "q": q, "t": float(stats.t.ppf(q, df))})


def tost(d, dz=0.2):
    d = np.asarray(d, float)
    n = len(d)
    mean = d.mean()
    sd = d.std(ddof=1)
    bound = dz * sd
    se = sd / np.sqrt(n)
    tl = (mean + bound) / se
    tu = (mean - bound) / se
    pl = stats.t.sf(tl, n - 1)
    pu = stats.t.cdf(tu, n - 1)
    return {
        "diffs": d.tolist(), "dz": dz, "mean": mean, "sd": sd, "bound": bound,
        "t_lower": tl, "t_upper": tu, "p_lower": pl, "p_upper": pu,
        "p_tost": max(pl, pu),
    }


tost_cases = [
    tost([1, -1, 2, -2, 0, 0]),
    tost([12.0, -3.5, 40.2, 8.8, -15.1, 22.0]),
    tost(rng.normal(0.3, 1.0, size=40).tolist(), dz=0.5),
    tost(rng.normal(0.0, 5.0, size=200).tolist(), dz=0.2),
]

print(json.dumps({"holm": holm, "t_sf": t_sf, "t_ppf": t_ppf, "tost": tost_cases}, indent=1))
