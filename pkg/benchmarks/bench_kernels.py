"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import itertools
import timeit

import numpy as np

from nwss import _backend, capacity_closed as cc
from nwss.channel import build_bundle, symmetric_config


def cases(rng):
    A = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    R = A @ A.conj().T / 12
    for k in (2, 4, 6):
        subsets = np.array(list(itertools.combinations(range(12), k)), dtype=np.intp)
        yield f"minor_dets n=12 k={k} ({len(subsets)} minors)", "minor_dets", (R, subsets)
    for M, K in ((4, 4), (8, 8), (16, 8)):
        G = rng.standard_normal((1024, M, K)) + 1j * rng.standard_normal((1024, M, K))
        yield f"gram_logdet 1024 x {M}x{K}", "gram_logdet", (G, 31.6)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = {name: _backend.load(name) for name in _backend.available()}
    if len(backends) < 2:
        print("compiled kernels not built; timing the numpy fallback only")
    rng = np.random.default_rng(0)
    print(f"{'case':40s}" + "".join(f"{n:>12s}" for n in backends) + "   speedup")
    for label, fn, fargs in cases(rng):
        times = {}
        for name, mod in backends.items():
            f = getattr(mod, fn)
            number = 3
            times[name] = min(timeit.repeat(lambda: f(*fargs), number=number, repeat=args.repeat)) / number
        row = f"{label:40s}" + "".join(f"{t * 1e3:10.3f}ms" for t in times.values())
        if len(times) == 2:
            row += f"   {times['python'] / times['compiled']:6.2f}x"
        print(row)

    # end to end: the closed-form bound on an n=8 scenario
    cfg = symmetric_config(8, 8, 8, 4, 4, 0.5, a_p=0.85, a_w=0.85, a_s=0.6, snr_mu=10.0)
    bundle = build_bundle(cfg)
    for name, mod in backends.items():
        _backend.kernels = mod
        t = min(timeit.repeat(lambda: cc.closed_form_bound(cfg, bundle), number=1, repeat=args.repeat))
        print(f"closed_form_bound n=8 [{name}]: {t * 1e3:.1f} ms")
    _backend.kernels = _backend.load()


if __name__ == "__main__":
    main()
