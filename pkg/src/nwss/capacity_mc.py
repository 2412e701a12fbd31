"""Monte Carlo estimates of the ergodic sum capacity and related rates.

All estimators share one driver: trials are split into the fixed RNG
blocks of :mod:`nwss.channel`, each block is reduced to per-trial values,
and the values are concatenated in trial order before any summation.  The
result is therefore bit-identical for any number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _backend
from .channel import TRIALS_PER_BLOCK, block_rng, draw_channels

LN2 = math.log(2.0)

METHODS = ("mc_capacity", "mc_jensen", "mmse_rate", "closed_form", "high_snr", "asymptotic")
_MONTE_CARLO = ("mc_capacity", "mc_jensen", "mmse_rate")


@dataclass(frozen=True)
class CapacityResult:
    """A capacity value in bits/s/Hz and how it was obtained."""

    value: float
    method: str
    trials: Optional[int] = None
    std_error: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        mc = self.method in _MONTE_CARLO
        if mc != (self.std_error is not None) or mc != (self.trials is not None):
            raise ValueError("trials and std_error are reported for Monte Carlo methods only")
        # the high-SNR expressions are asymptotic and may be negative or -inf
        if self.method in _MONTE_CARLO + ("closed_form",) and not self.value >= 0:
            raise ValueError(f"{self.method} value must be nonnegative, got {self.value}")

    def __float__(self):
        return float(self.value)


DrawFn = Callable[..., np.ndarray]


def trial_values(cfg, bundle, trials: int, seed: int, stat: Callable[[np.ndarray], np.ndarray],
                 workers: int = 1, draw: Optional[DrawFn] = None) -> np.ndarray:
    """Apply `stat` to every trial's channel and return values in trial order.

    Parameters
    ----------
    stat : callable
        Maps a ``(n, M, K)`` stack of channels to ``n`` per-trial values.
    workers : int
        Threads evaluating RNG blocks concurrently.
    draw : callable, optional
        Replacement for :func:`nwss.channel.draw_channels` with the same
        signature ``draw(cfg, bundle, rng, count)``; used as a test hook.
    """
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials}")
    trials = int(trials)
    draw = draw or draw_channels
    nblocks = -(-trials // TRIALS_PER_BLOCK)

    def run(b):
        count = min(TRIALS_PER_BLOCK, trials - b * TRIALS_PER_BLOCK)
        G = draw(cfg, bundle, block_rng(seed, b), TRIALS_PER_BLOCK)
        return np.asarray(stat(np.ascontiguousarray(G[:count])), dtype=float)

    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(nblocks)))
    else:
        parts = [run(b) for b in range(nblocks)]
    return np.concatenate(parts)


def _std_error(x):
    return float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")


def mc_capacity(cfg, bundle, trials: int, seed: int, workers: int = 1, draw=None) -> CapacityResult:
    """Sample mean of ``log2 det(I + mu G G^H)``."""
    mu = cfg.snr_mu
    x = trial_values(cfg, bundle, trials, seed, lambda G: _backend.gram_logdet(G, mu),
                     workers, draw) / LN2
    return CapacityResult(float(np.mean(x)), "mc_capacity", int(trials), _std_error(x))


def log_mean_exp(x):
    """``log(mean(exp(x)))`` and the scaled samples ``exp(x - max)``."""
    m = float(np.max(x))
    y = np.exp(x - m)
    return m + math.log(float(np.mean(y))), y


def mc_jensen(cfg, bundle, trials: int, seed: int, workers: int = 1, draw=None) -> CapacityResult:
    """``log2`` of the sample mean of ``det(I + mu G G^H)``.

    Determinants are kept as natural logs and combined with a log-sum-exp,
    so large ``mu**n`` products never overflow.  The standard error follows
    from the delta method on ``log2(mean)``.
    """
    mu = cfg.snr_mu
    x = trial_values(cfg, bundle, trials, seed, lambda G: _backend.gram_logdet(G, mu),
                     workers, draw)
    lme, y = log_mean_exp(x)
    se = _std_error(y) / (float(np.mean(y)) * LN2)
    return CapacityResult(max(lme / LN2, 0.0), "mc_jensen", int(trials), se)


def mmse_rates(G, mu):
    """Per-trial linear-MMSE sum rate ``sum_k log2(1 + SINR_k)``.

    Uses ``1 + SINR_k = 1 / [(I + mu G^H G)^-1]_kk``.
    """
    G = np.asarray(G)
    K = G.shape[-1]
    C = mu * (G.conj().transpose(0, 2, 1) @ G)
    C[:, np.arange(K), np.arange(K)] += 1.0
    diag = np.diagonal(np.linalg.inv(C), axis1=1, axis2=2).real
    if not np.all(np.isfinite(diag)) or np.any(diag <= 0):
        raise np.linalg.LinAlgError("MMSE solve failed")
    return -np.log2(diag).sum(axis=1)


def mmse_sum_rate(cfg, bundle, trials: int, seed: int, workers: int = 1, draw=None) -> CapacityResult:
    """Achievable sum rate of the linear MMSE receiver with per-user SNR ``mu``."""
    mu = cfg.snr_mu
    x = trial_values(cfg, bundle, trials, seed, lambda G: mmse_rates(G, mu), workers, draw)
    return CapacityResult(max(float(np.mean(x)), 0.0), "mmse_rate", int(trials), _std_error(x))


def mc_mean_gram(cfg, bundle, trials: int, seed: int, workers: int = 1, draw=None):
    """Sample mean of ``G G^H`` and the per-entry standard error of that mean."""
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trials must be a positive integer, got {trials}")
    trials = int(trials)
    draw = draw or draw_channels
    nblocks = -(-trials // TRIALS_PER_BLOCK)

    def run(b):
        count = min(TRIALS_PER_BLOCK, trials - b * TRIALS_PER_BLOCK)
        G = draw(cfg, bundle, block_rng(seed, b), TRIALS_PER_BLOCK)[:count]
        gram = G @ G.conj().transpose(0, 2, 1)
        return gram.sum(axis=0), (np.abs(gram) ** 2).sum(axis=0)

    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(nblocks)))
    else:
        parts = [run(b) for b in range(nblocks)]
    s1 = np.zeros((cfg.M, cfg.M), dtype=np.complex128)
    s2 = np.zeros((cfg.M, cfg.M))
    for a, b in parts:  # fixed block order
        s1 += a
        s2 += b
    mean = s1 / trials
    var = np.maximum(s2 / trials - np.abs(mean) ** 2, 0.0) * trials / max(trials - 1, 1)
    return mean, np.sqrt(var / trials)
