"""Time the numba and pure-numpy simulation kernels on the same scenario.

    python3 benchmarks/bench_backends.py --iterations 2000 --fec
"""

import argparse
import time

import numpy as np

from overcode import kernels
from overcode._accel import HAS_NUMBA
from overcode.engine import link_setup, table_setup
from overcode.phy import ChannelConfig, Fec


def time_backend(setup, seed, iterations, use_numba, repeat):
    # warm-up compiles the numba kernel and fills numpy caches
    kernels.simulate_range(setup, seed, 0, min(iterations, 64), use_numba=use_numba)
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = kernels.simulate_range(setup, seed, 0, iterations, use_numba=use_numba)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iterations", type=int, default=2000)
    ap.add_argument("--sf", type=int, default=8)
    ap.add_argument("--snr", type=float, default=10.0)
    ap.add_argument("--fec", action="store_true")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    cfg = table_setup(sf=args.sf, channel=ChannelConfig(args.snr),
                      fec=Fec.CONV_HALF if args.fec else Fec.NONE)
    cfg, setup = link_setup(cfg)
    backends = [("numpy", False)] + ([("numba", True)] if HAS_NUMBA else [])
    results = {}
    for name, flag in backends:
        dt, res = time_backend(setup, cfg.seed, args.iterations, flag, args.repeat)
        results[name] = (dt, res)
        print(f"{name:6s} {dt:8.3f} s  {1e6 * dt / args.iterations:9.1f} us/iteration  "
              f"errors={int(res[1].sum())}")
    if len(results) == 2:
        (t_np, r_np), (t_nb, r_nb) = results["numpy"], results["numba"]
        same = all(np.array_equal(a, b) for a, b in zip(r_np, r_nb))
        print(f"speedup {t_np / t_nb:.1f}x, identical counts: {same}")


if __name__ == "__main__":
    main()
