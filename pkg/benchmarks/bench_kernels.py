"""Compare the numba kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse

from gausslab.bench import run_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    rows = run_bench(((1, 1024), (1, 4096), (2, 64), (2, 128)), repeats=args.repeats)
    by = {}
    for r in rows:
        by.setdefault((r["kernel"], r["dim"], r["cells"]), {})[r["backend"]] = r
    print(f"{'kernel':>9} {'d':>2} {'cells':>6} {'numba s':>10} {'numpy s':>10} {'speedup':>8} {'max rel diff':>13}")
    for (k, d, n), b in by.items():
        nb, npy = b.get("numba"), b["numpy"]
        if nb is None:
            print(f"{k:>9} {d:>2} {n:>6} {'-':>10} {npy['seconds']:>10.4f}")
            continue
        print(f"{k:>9} {d:>2} {n:>6} {nb['seconds']:>10.4f} {npy['seconds']:>10.4f} "
              f"{npy['seconds'] / nb['seconds']:>8.1f} {nb['max_rel_diff']:>13.2e}")


if __name__ == "__main__":
    main()
