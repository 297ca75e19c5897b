"""Time the numba kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--sizes 6 8 9] [--repeat 5]

The per-kernel section calls the paired implementations directly. The
end-to-end section runs one N-player regret evaluation in two subprocesses,
with and without MFREGRET_DISABLE_NUMBA.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from mfregret import _kernels
from mfregret._accel import NUMBA_ENABLED
from mfregret.nplayer import product_digits

END_TO_END = r"""
import json, sys, time
from mfregret.game import load_game
from mfregret.nplayer import PolicyProfile, np_regret_all
from mfregret.evaluators import Evaluator
g = load_game("crowd")
N = int(sys.argv[1])
np_regret_all(g, None, PolicyProfile.homogeneous(g.policy, 2))
t0 = time.perf_counter()
r = np_regret_all(g, Evaluator.avar(0.3), PolicyProfile.homogeneous(g.policy, N))
print(json.dumps({"seconds": time.perf_counter() - t0, "stepwise": r["stepwise"]}))
"""


def best_of(fn, args, repeat):
    fn(*args)  # compile / warm caches
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def inputs(N, nX=2, nA=2, seed=0):
    rng = np.random.default_rng(seed)
    S = nX ** N
    digits = product_digits(nX, N)
    u = rng.normal(size=S)
    R = rng.dirichlet(np.ones(nX), size=(S, N))
    P = rng.dirichlet(np.ones(nX), size=(S, N, nA))
    lam = rng.dirichlet(np.ones(nA), size=(S, N))
    mu = rng.dirichlet(np.ones(S))
    order = np.argsort(-u, kind="stable")
    pairs = {
        "contract_others": (_kernels._contract_nb, _kernels._contract_np, (u, R, N, nX)),
        "forward_law": (_kernels._forward_nb, _kernels._forward_np, (mu, R, digits)),
        "avar_profiles": (_kernels._avar_profiles_nb, _kernels._avar_profiles_np,
                          (u[order], np.ascontiguousarray(digits[order]), P[:, 0], P, lam, 0.3)),
    }
    return pairs


def end_to_end(N):
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, MFREGRET_DISABLE_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-c", END_TO_END, str(N)], env=env,
                              capture_output=True, text=True, check=True)
        out[label] = json.loads(proc.stdout.strip().splitlines()[-1])
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 8, 9], help="player counts N (2 states)")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if not NUMBA_ENABLED:
        print("numba is disabled; both columns run the same interpreter paths")
    print(f"{'kernel':<16} {'N':>3} {'numba s':>10} {'numpy s':>10} {'speedup':>8} {'max diff':>9}")
    for N in args.sizes:
        for name, (nb, npf, a) in inputs(N).items():
            t_nb = best_of(nb, a, args.repeat)
            t_np = best_of(npf, a, args.repeat)
            diff = float(np.abs(np.asarray(nb(*a)) - np.asarray(npf(*a))).max())
            print(f"{name:<16} {N:>3} {t_nb:>10.2e} {t_np:>10.2e} {t_np / t_nb:>8.1f} {diff:>9.1e}")
    if not args.no_end_to_end:
        print("\nend to end: AVaR regret of the crowd game")
        for N in args.sizes:
            r = end_to_end(N)
            same = abs(r["numba"]["stepwise"] - r["numpy"]["stepwise"])
            print(f"N={N:>3}  numba {r['numba']['seconds']:.3f}s  numpy {r['numpy']['seconds']:.3f}s  "
                  f"|diff| {same:.1e}")


if __name__ == "__main__":
    main()
