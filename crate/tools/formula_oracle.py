"""High-precision reference values for the closed-form evaluators.

Writes crates/cli/tests/data/formula_oracle.json. Inputs are drawn as
doubles and converted exactly, so the Rust side sees the same arguments.

    python3 tools/formula_oracle.py
"""

import json
import math
import random
from pathlib import Path

from mpmath import mp, mpf, log, sqrt, exp, ceil, floor

mp.dps = 60
POINTS = 20
OUT = Path(__file__).resolve().parent.parent / "crates/cli/tests/data/formula_oracle.json"


def near_integer(x):
    return abs(x - mp.nint(x)) < mpf("1e-9")


def draw(rng):
    while True:
        n = int(10 ** rng.uniform(2, 6))
        p = 10 ** rng.uniform(math.log10(5.0 / n), math.log10(0.5))
        k_coef = rng.uniform(0.1, 1.0)
        c_eps = rng.uniform(0.5, 4.0)
        N, P = mpf(n), mpf(p)
        pn = P * N
        raw_k = mpf(k_coef) * log(pn) / P
        if raw_k < 1 or near_integer(raw_k):
            continue
        k = int(floor(raw_k))
        ln_n = log(N)
        t_pdim = mpf(c_eps) * N * ln_n / k
        t_theta1 = 6 * N * N * ln_n / (k * k)
        if near_integer(t_pdim) or near_integer(t_theta1):
            continue
        return n, p, k_coef, c_eps, k


def main():
    rng = random.Random(20261018)
    rows = []
    for _ in range(POINTS):
        n, p, k_coef, c_eps, k = draw(rng)
        i = rng.randint(0, k)
        N, P = mpf(n), mpf(p)
        pn = P * N
        ln_n = log(N)
        f0 = 4 * ln_n * sqrt(log(pn) / pn + P)
        ft, fs, fr = rng.uniform(1, 100), rng.uniform(1, 1000), rng.uniform(0, 10)
        cm, ct = rng.uniform(0, 200), rng.uniform(0.5, 60)
        T, S, R = mpf(ft), mpf(fs), mpf(fr)
        freedman = min(mpf(1), exp(-T * T / (2 * (S + R * T))))
        CM, CT = mpf(cm), mpf(ct)
        chernoff = min(mpf(1), 2 * exp(-CT * CT / (2 * CM + CT)))
        rows.append(
            {
                "n": n,
                "p": repr(p),
                "k_coef": repr(k_coef),
                "c_eps": repr(c_eps),
                "i": i,
                "k": k,
                "f0": mp.nstr(f0, 30),
                "delta2": mp.nstr(4 * P * P * N + 128 * ln_n, 30),
                "expected_degree": mp.nstr((1 - P) ** i * pn, 30),
                "error_f": mp.nstr(((1 + 16 * P) / (1 - P)) ** i * f0, 30),
                "failure_prob": mp.nstr(N ** (-log(pn) / 2048), 30),
                "variation_cap": mp.nstr(2**9 * (P**3 * N**2 + pn * ln_n), 30),
                "increment_cap": mp.nstr(6 * P * P * N + 128 * ln_n, 30),
                "s_pdim": int(ceil(N / k)),
                "t_pdim": int(ceil(mpf(c_eps) * N * ln_n / k)),
                "t_theta1": int(ceil(6 * N * N * ln_n / (k * k))),
                "mrss_lower": mp.nstr(pn * log(1 / P) / (5 * ln_n), 30),
                "freedman": {"t": repr(ft), "s": repr(fs), "r": repr(fr), "value": mp.nstr(freedman, 30)},
                "chernoff": {"mean": repr(cm), "t": repr(ct), "value": mp.nstr(chernoff, 30)},
            }
        )
    OUT.write_text(json.dumps(rows, indent=1) + "\n")
    print(f"wrote {len(rows)} points to {OUT}")


if __name__ == "__main__":
    main()
