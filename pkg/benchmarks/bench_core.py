"""Time the compiled and pure-Python kernel backends on representative inputs.

    python3 benchmarks/bench_core.py [--repeat 5] [--json out.json]
"""
import argparse
import json
import timeit

import numpy as np

from pcfm._core import load_backend


def cases():
    rng = np.random.default_rng(0)
    q = rng.uniform(-1, 1, 10)
    phi = np.linspace(-300.0, 300.0, 20001)
    z = np.linspace(0.0, 100.0, 1001)
    p = np.exp(-0.046 * z)
    theta = np.linspace(-3.0, 3.0, 2001)
    n, m = 9, 2
    zr = np.linspace(0.0, 100.0, 2001)
    alpha = np.full(n, 0.046)
    cs = rng.uniform(-1e-4, 1e-4, (n, n))
    cs = cs - cs.T
    co = rng.uniform(0, 1e-4, (n, m))
    other = np.ones((m, zr.size)) * 100.0
    other_d = np.zeros((m, zr.size))
    jump = np.ones((n, zr.size))
    y0 = np.ones(n)
    return {
        "phase_poly (deg 9, 20001 phases)": ("phase_poly", (q, phi)),
        "phase_filon (1001 nodes, 2001 phases)": ("phase_filon", (z, p, theta)),
        "rk4_sweep (9 channels, 2 pumps, 2001 nodes)": ("rk4_sweep", (zr, y0, alpha, cs, co, other, other_d, 1.0, False, jump)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)
    backends = {"python": load_backend("python"), "cython": load_backend("cython")}
    if backends["cython"] is backends["python"]:
        print("compiled backend not available; timing the Python fallback only")
        del backends["cython"]
    rows = []
    print(f"{'kernel':46s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for label, (fn, a) in cases().items():
        t = {}
        for name, mod in backends.items():
            f = getattr(mod, fn)
            f(*a)
            t[name] = min(timeit.repeat(lambda: f(*a), number=1, repeat=args.repeat))
        line = f"{label:46s}" + "".join(f"{t[b] * 1e3:10.2f}ms" for b in backends)
        if len(t) == 2:
            line += f"{t['python'] / t['cython']:11.1f}x"
        print(line)
        rows.append({"kernel": label, **{f"{k}_s": v for k, v in t.items()}})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
