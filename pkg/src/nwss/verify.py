"""Acceptance checks with measured-versus-expected reporting.

Each check returns a :class:`CheckResult`; failures are report entries,
never exceptions.  ``fast`` runs the analytical and identity checks,
``full`` adds the Monte Carlo comparisons.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import capacity_closed as cc
from .capacity_mc import mc_capacity, mc_jensen, mc_mean_gram, mmse_sum_rate
from .channel import ScenarioConfig, build_bundle, eigen_spread, receiver_correlation, symmetric_config
from .correlation import toeplitz_corr, toeplitz_det

FAST, FULL = "fast", "full"
SEED = 20240607


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: str
    expected: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return (f"[{tag}] {self.number:2d} {self.name}: measured {self.measured}; "
                f"expected {self.expected} ({self.seconds:.2f}s)")


@dataclass
class Context:
    n_count: Callable = cc.n_count
    workers: int = 1


def desk_config(mu=10.0) -> ScenarioConfig:
    """``M = S = K = 4`` with two PV groups and two WV clusters."""
    return ScenarioConfig(M=4, K=4, S=4, g=2, s_p_per_group=(1, 1), r_per_group=(2, 2),
                          s_w=2, rho_p_per_group=(0.5, 0.5), rho_w=0.5,
                          a_p=0.85, a_w=0.85, a_s=0.6, snr_mu=mu)


def iid_sum(M, K, mu):
    """``sum_k mu^k k! C(M,k) C(K,k)``: ``E det(I + mu H H^H)`` for i.i.d. ``H``."""
    return math.fsum(mu ** k * math.factorial(k) * math.comb(M, k) * math.comb(K, k)
                     for k in range(min(M, K) + 1))


def _fmt(x):
    return f"{x:.6g}"


# -- checks ------------------------------------------------------------------------

def check_asymptotic(ctx):
    v = cc.asymptotic_rate(5, 10 ** 3.5, 0.6, 0.85).value
    return abs(v - 7.1) <= 0.05, _fmt(v), "7.1 +/- 0.05"


def check_toeplitz_det(ctx):
    worst = 0.0
    for a in (0.6, 0.85):
        for d in range(1, 13):
            ref = np.linalg.det(toeplitz_corr(d, a).entries).real
            worst = max(worst, abs(toeplitz_det(d, a) - ref) / abs(ref))
    return worst <= 1e-10, f"max rel err {worst:.3g}", "<= 1e-10"


def _structures(max_rows=8, max_cols=6):
    """Every block layout with ``2M <= max_rows`` and ``S <= max_cols``."""
    def comps(total, parts):
        if parts == 0:
            if total == 0:
                yield ()
            return
        for first in range(1, total - parts + 2):
            for rest in comps(total - first, parts - 1):
                yield (first,) + rest

    for M in range(1, max_rows // 2 + 1):
        for S in range(1, max_cols + 1):
            for s_w in range(S + 1):
                s_p = S - s_w
                for g in range(0, min(M, s_p) + 1):
                    if (g == 0) != (s_p == 0):
                        continue
                    for r in comps(M, g) if g else [()]:
                        for s in comps(s_p, g) if g else [()]:
                            rows = r + ((M,) if s_w else ())
                            cols = s + ((s_w,) if s_w else ())
                            yield cc.BlockStructure(rows, cols)


def check_n_count(ctx, kmax=4):
    mismatches = pairs = 0
    first = None
    for blocks in _structures():
        n_rows, n_cols = blocks.n_rows, blocks.n_cols
        for k in range(0, min(kmax, n_rows, n_cols) + 1):
            col_sets = [tuple(c + 1 for c in i) for i in itertools.combinations(range(n_cols), k)]
            for j in itertools.combinations(range(1, n_rows + 1), k):
                for i in col_sets:
                    pairs += 1
                    if ctx.n_count(j, i, blocks) != cc.n_count_oracle(j, i, blocks):
                        mismatches += 1
                        first = first or (blocks.pattern(), j, i)
    measured = f"{mismatches} mismatches over {pairs} pairs"
    if first:
        measured += f" (first: {first})"
    return mismatches == 0, measured, "0 mismatches"


def check_mc_vs_closed(ctx, trials=10 ** 6):
    cfg = desk_config()
    bundle = build_bundle(cfg)
    cf = cc.closed_form_bound(cfg, bundle).value
    mc = mc_jensen(cfg, bundle, trials, SEED, workers=ctx.workers)
    z = abs(cf - mc.value) / mc.std_error
    return z <= 3, f"closed {cf:.6f}, jensen {mc.value:.6f} ({z:.2f} se)", "<= 3 se"


def random_config(rng) -> ScenarioConfig:
    """A random valid scenario with ``M, S, K <= 4``."""
    M, S, K = (int(x) for x in rng.integers(1, 5, size=3))
    s_w = int(rng.integers(0, S + 1))
    s_p = S - s_w
    g = int(rng.integers(1, min(M, s_p) + 1)) if s_p else 0

    def split(total, parts):
        cuts = sorted(rng.choice(np.arange(1, total), size=parts - 1, replace=False)) if parts > 1 else []
        edges = [0, *cuts, total]
        return tuple(int(b - a) for a, b in zip(edges, edges[1:]))

    rho = rng.uniform(0.05, 1.0, size=g + 1)

    def coef():
        return complex(*rng.uniform(-0.65, 0.65, size=2))

    return ScenarioConfig(
        M=M, K=K, S=S, g=g,
        s_p_per_group=split(s_p, g) if g else (), r_per_group=split(M, g) if g else (),
        s_w=s_w, rho_p_per_group=tuple(rho[:g]), rho_w=float(rho[g]) if s_w else 0.0,
        a_p=coef(), a_w=coef(), a_s=coef(), snr_mu=float(10 ** rng.uniform(-0.5, 2)),
    )


def check_jensen_order(ctx, count=10, trials=10 ** 5):
    rng = np.random.default_rng(SEED)
    worst = -math.inf
    for _ in range(count):
        cfg = random_config(rng)
        bundle = build_bundle(cfg)
        cf = cc.closed_form_bound(cfg, bundle).value
        mc = mc_capacity(cfg, bundle, trials, SEED, workers=ctx.workers)
        worst = max(worst, (mc.value - cf) / mc.std_error)
    return worst <= 3, f"max (mc - bound)/se = {worst:.3g}", "<= 3"


def check_iid(ctx):
    worst = 0.0
    for M in (2, 3, 4):
        for mu in (1.0, 10.0):
            cfg = symmetric_config(M, M, M, 0, 0, 0.0, snr_mu=mu)
            got = 2.0 ** cc.closed_form_bound(cfg, build_bundle(cfg)).value
            ref = iid_sum(M, M, mu)
            worst = max(worst, abs(got - ref) / ref)
    return worst <= 1e-10, f"max rel err {worst:.3g}", "<= 1e-10"


def prop1_config(rho_p, mu=10 ** 1.5):
    return symmetric_config(6, 6, 6, 2, 4, rho_p, a_p=0.85, a_w=0.85, a_s=0.6, snr_mu=mu)


def check_rho_argmax(ctx):
    grid = np.round(np.linspace(0.0, 1.0, 21), 10)
    vals = [cc.high_snr_bound(c, build_bundle(c)).value for c in map(prop1_config, grid)]
    best = int(np.argmax(vals))
    target = int(np.argmin(np.abs(grid - 4 / 6)))
    unimodal = all(a <= b for a, b in zip(vals[:best], vals[1:best + 1])) and \
        all(a >= b for a, b in zip(vals[best:], vals[best + 1:]))
    return (unimodal and best == target,
            f"argmax rho_p={grid[best]:g}, unimodal={unimodal}", f"argmax rho_p={grid[target]:g}")


def _cmax(g, kind, mu=10 ** 1.5):
    s_p = 6 if kind == "pv" else 0
    cfg = symmetric_config(6, 6, 6, g if s_p else 0, s_p, 1.0 if s_p else 0.0,
                           a_p=0.85, a_w=0.85, a_s=0.6, snr_mu=mu)
    return cc.c_max(cfg, build_bundle(cfg)).value


def check_pv_beats_wv(ctx):
    wv = _cmax(0, "wv")
    gaps = {g: _cmax(g, "pv") - wv for g in (2, 3, 6)}
    ok = all(v > 0 for v in gaps.values()) and gaps[6] > gaps[2]
    return ok, ", ".join(f"gap(g={g})={v:.4g}" for g, v in gaps.items()), \
        "all gaps > 0 and gap(6) > gap(2)"


def check_groups_increasing(ctx, mu=10 ** 1.5):
    vals = []
    for g in (1, 2, 3, 6):
        cfg = symmetric_config(6, 6, 6, g, 6, 1.0, a_p=0.85, a_s=0.6, snr_mu=mu)
        vals.append(cc.high_snr_bound(cfg, build_bundle(cfg)).value)
    ok = all(b > a for a, b in zip(vals, vals[1:]))
    return ok, "[" + ", ".join(_fmt(v) for v in vals) + "]", "strictly increasing in g"


def receiver_configs():
    return [
        desk_config(),
        symmetric_config(6, 4, 3, 2, 4, 1.0, a_p=0.6, a_s=0.6),
        ScenarioConfig(M=5, K=2, S=3, g=1, s_p_per_group=(1,), r_per_group=(5,), s_w=2,
                       rho_p_per_group=(0.3,), rho_w=0.7, a_p=0.5j, a_w=0.85, a_s=0.3),
    ]


def check_receiver_corr(ctx, trials=10 ** 5):
    worst = diag_err = 0.0
    for cfg in receiver_configs():
        bundle = build_bundle(cfg)
        R = receiver_correlation(cfg, bundle)
        mean, _ = mc_mean_gram(cfg, bundle, trials, SEED, workers=ctx.workers)
        worst = max(worst, np.linalg.norm(mean - R) / np.linalg.norm(R))
        if cfg.is_normalized():
            diag_err = max(diag_err, float(np.max(np.abs(np.diag(R) - cfg.K))))
    ok = worst <= 0.02 and diag_err <= 1e-12
    return ok, f"max Frobenius rel err {worst:.3g}, diag err {diag_err:.2g}", "<= 0.02, diag = K"


def check_finite_difference(ctx):
    mu = 10 ** 3.5
    d = cc.all_pv_highsnr(105, 5, mu, 0.6, 0.85).value - cc.all_pv_highsnr(100, 5, mu, 0.6, 0.85).value
    slope = d / 5
    ref = cc.asymptotic_rate(5, mu, 0.6, 0.85).value
    return abs(slope - ref) <= 0.05, f"slope {slope:.5f} vs {ref:.5f}", "within 0.05 bit"


def check_high_snr(ctx):
    cfg = desk_config(1e6)
    bundle = build_bundle(cfg)
    hs = cc.high_snr_bound(cfg, bundle).value
    cf = cc.closed_form_bound(cfg, bundle).value
    return abs(hs - cf) <= 0.1, f"|{hs:.6f} - {cf:.6f}| = {abs(hs - cf):.3g}", "<= 0.1 bit"


def eigen_config(rho_p):
    return symmetric_config(8, 8, 8, 4, 4, rho_p, a_p=0.85, a_w=0.85, a_s=0.6)


def check_eigen_spread(ctx):
    ratios = []
    for rho in (1.0, 0.0):
        cfg = eigen_config(rho)
        e = eigen_spread(cfg, build_bundle(cfg))
        ratios.append(e[0] / e[3])
    return ratios[0] < ratios[1], f"ratio(rho_p=1)={ratios[0]:.4g}, ratio(rho_p=0)={ratios[1]:.4g}", \
        "ratio(1) < ratio(0)"


def check_determinism(ctx, trials=20_000):
    cfg = desk_config()
    bundle = build_bundle(cfg)
    runs = []
    for w in (1, 2, 8):
        runs.append(tuple(
            (r.value, r.std_error) for r in (
                mc_capacity(cfg, bundle, trials, SEED, workers=w),
                mc_jensen(cfg, bundle, trials, SEED, workers=w),
                mmse_sum_rate(cfg, bundle, trials, SEED, workers=w),
            )
        ) + (cc.closed_form_bound(cfg, bundle).value,))
    same = all(r == runs[0] for r in runs)
    return same, "identical" if same else f"differs: {runs}", "bit-identical for 1, 2, 8 workers"


CHECKS = [
    (1, "asymptotic rate", FAST, check_asymptotic),
    (2, "Toeplitz determinant identity", FAST, check_toeplitz_det),
    (3, "block-count oracle equivalence", FAST, check_n_count),
    (4, "closed form vs Monte Carlo (n=4)", FULL, check_mc_vs_closed),
    (5, "Jensen ordering", FULL, check_jensen_order),
    (6, "i.i.d. reduction", FAST, check_iid),
    (7, "energy split argmax", FAST, check_rho_argmax),
    (8, "PV beats WV at optimum", FAST, check_pv_beats_wv),
    (9, "more PV groups help", FAST, check_groups_increasing),
    (10, "receiver correlation", FULL, check_receiver_corr),
    (11, "asymptotic slope consistency", FAST, check_finite_difference),
    (12, "high-SNR dominance", FAST, check_high_snr),
    (13, "eigenvalue spread", FAST, check_eigen_spread),
    (14, "thread-count determinism", FAST, check_determinism),
]


def run_check(number: int, ctx: Optional[Context] = None) -> CheckResult:
    ctx = ctx or Context()
    num, name, _, fn = next(c for c in CHECKS if c[0] == number)
    t0 = time.perf_counter()
    try:
        passed, measured, expected = fn(ctx)
    except Exception as exc:  # a crash is a failed check, not a crashed report
        passed, measured, expected = False, f"error: {type(exc).__name__}: {exc}", "no error"
    return CheckResult(num, name, bool(passed), measured, expected, time.perf_counter() - t0)


@dataclass
class VerifyReport:
    level: str
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed(self) -> list:
        return [r for r in self.results if not r.passed]

    def format(self) -> str:
        lines = [r.line() for r in self.results]
        n_ok = sum(r.passed for r in self.results)
        lines.append(f"{n_ok}/{len(self.results)} checks passed ({self.level})")
        return "\n".join(lines)


def run_verify(level: str = FAST, n_count_impl: Optional[Callable] = None,
               workers: int = 1, only=None) -> VerifyReport:
    """Run the checks of `level`; `n_count_impl` replaces the block counter under test."""
    if level not in (FAST, FULL):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    ctx = Context(n_count=n_count_impl or cc.n_count, workers=workers)
    selected = [c[0] for c in CHECKS if (level == FULL or c[2] == FAST)
                and (only is None or c[0] in only)]
    return VerifyReport(level, [run_check(n, ctx) for n in selected])
