"""Scenario parameterization and channel realizations.

The uplink channel ``G`` (M x K) is built from partially visible (PV)
cluster groups, each seen by a contiguous sub-array, and wholly visible
(WV) clusters seen by the whole array::

    G = [Dp^1/2 Rp^1/2 Hp , sqrt(rho_w/s_w) Rw^1/2 Hw] Rs^1/2 H

Random draws are organized in fixed-size blocks of trials.  Block ``b`` of
master seed ``seed`` always uses the same Philox substream, so a given
``(seed, trial)`` pair maps to the same matrix no matter how many workers
evaluate the blocks or in which order.
"""

from __future__ import annotations

import json
from dataclasses import MISSING, asdict, dataclass, fields
from typing import Optional

import numpy as np

from .correlation import CorrelationMatrix, toeplitz_corr
from .errors import ConfigError

#: trials per RNG substream; part of the reproducibility contract
TRIALS_PER_BLOCK = 1024


def _as_complex(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex values are encoded as [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, dict):
        return complex(float(v.get("re", 0.0)), float(v.get("im", 0.0)))
    return complex(v)


def _encode_complex(v: complex):
    return v.real if v.imag == 0 else [v.real, v.imag]


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete parameterization of one channel scenario.

    ``g = 0`` denotes an all-WV channel and ``s_w = 0`` an all-PV one.
    ``snr_mu`` is the per-user SNR ``P / (K sigma^2)``.
    """

    M: int
    K: int
    S: int
    g: int
    s_p_per_group: tuple
    r_per_group: tuple
    s_w: int
    rho_p_per_group: tuple
    rho_w: float
    a_p: complex = 0.0
    a_w: complex = 0.0
    a_s: complex = 0.0
    snr_mu: float = 1.0

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        for name in ("M", "K", "S", "g", "s_w"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ConfigError(f"{name} must be an integer, got {v!r}")
            set_(name, int(v))
        set_("s_p_per_group", tuple(int(x) for x in self.s_p_per_group))
        set_("r_per_group", tuple(int(x) for x in self.r_per_group))
        set_("rho_p_per_group", tuple(float(x) for x in self.rho_p_per_group))
        set_("rho_w", float(self.rho_w))
        set_("snr_mu", float(self.snr_mu))
        for name in ("a_p", "a_w", "a_s"):
            set_(name, _as_complex(getattr(self, name)))
        self._validate()

    def _validate(self):
        if self.M < 1 or self.K < 1 or self.S < 1:
            raise ConfigError("M, K and S must be positive")
        if self.g < 0 or self.s_w < 0:
            raise ConfigError("g and s_w must be nonnegative")
        for name in ("s_p_per_group", "r_per_group", "rho_p_per_group"):
            if len(getattr(self, name)) != self.g:
                raise ConfigError(f"{name} must have g={self.g} entries")
        if any(s < 1 for s in self.s_p_per_group) or any(r < 1 for r in self.r_per_group):
            raise ConfigError("PV group sizes must be positive")
        if sum(self.s_p_per_group) + self.s_w != self.S:
            raise ConfigError(
                f"cluster counts {self.s_p_per_group} + s_w={self.s_w} do not sum to S={self.S}"
            )
        if self.g > 0 and sum(self.r_per_group) != self.M:
            raise ConfigError(f"sub-array sizes {self.r_per_group} do not sum to M={self.M}")
        if any(r < 0 for r in self.rho_p_per_group) or self.rho_w < 0:
            raise ConfigError("propagation gains must be nonnegative")
        if self.s_w == 0 and self.rho_w > 0:
            raise ConfigError("rho_w > 0 requires at least one WV cluster")
        for name in ("a_p", "a_w", "a_s"):
            if abs(getattr(self, name)) > 1.0:
                raise ConfigError(f"|{name}| must be <= 1")
        if not np.isfinite(self.snr_mu) or self.snr_mu < 0:
            raise ConfigError("snr_mu must be a finite nonnegative number")

    # -- derived quantities -------------------------------------------------
    @property
    def s_p(self) -> int:
        return sum(self.s_p_per_group)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        """True when every antenna receives total energy ``K``."""
        if self.g == 0:
            return abs(self.rho_w - 1.0) <= tol
        return all(abs(r + self.rho_w - 1.0) <= tol for r in self.rho_p_per_group)

    def replace(self, **changes) -> "ScenarioConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return ScenarioConfig(**d)

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("s_p_per_group", "r_per_group", "rho_p_per_group"):
            d[name] = list(d[name])
        for name in ("a_p", "a_w", "a_s"):
            d[name] = _encode_complex(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise ConfigError("scenario document must be a JSON object")
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise ConfigError(f"unknown scenario keys: {', '.join(unknown)}")
        missing = [f.name for f in fields(cls) if f.name not in d and f.default is MISSING]
        if missing:
            raise ConfigError(f"missing scenario keys: {', '.join(missing)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(d)


def symmetric_config(M, S, K, g, s_p, rho_p, a_p=0.0, a_w=0.0, a_s=0.0,
                     snr_mu=1.0, rho_w=None) -> ScenarioConfig:
    """Equal-group scenario: ``g`` groups of ``M/g`` antennas and ``s_p/g`` clusters.

    ``rho_w`` defaults to ``1 - rho_p`` (normalized energy) when WV clusters
    exist and to zero otherwise.
    """
    if g == 0:
        if s_p:
            raise ConfigError("s_p > 0 needs at least one PV group")
    elif M % g or s_p % g:
        raise ConfigError(f"g={g} must divide M={M} and s_p={s_p}")
    s_w = S - s_p
    if rho_w is None:
        rho_w = (1.0 - rho_p if g else 1.0) if s_w > 0 else 0.0
    return ScenarioConfig(
        M=M, K=K, S=S, g=g,
        s_p_per_group=(s_p // g,) * g if g else (),
        r_per_group=(M // g,) * g if g else (),
        s_w=s_w,
        rho_p_per_group=(float(rho_p),) * g,
        rho_w=rho_w, a_p=a_p, a_w=a_w, a_s=a_s, snr_mu=snr_mu,
    )


@dataclass(frozen=True)
class CorrelationBundle:
    """Correlation matrices of one scenario; absent blocks are ``None``/empty."""

    R_s: CorrelationMatrix
    R_p_blocks: tuple
    R_w: Optional[CorrelationMatrix]


def build_bundle(cfg: ScenarioConfig) -> CorrelationBundle:
    """Toeplitz correlations ``Omega_S(a_s)``, ``Omega_r(a_p)`` per group, ``Omega_M(a_w)``."""
    cache = {}
    blocks = []
    for r in cfg.r_per_group:
        if r not in cache:
            cache[r] = toeplitz_corr(r, cfg.a_p)
        blocks.append(cache[r])
    R_w = toeplitz_corr(cfg.M, cfg.a_w) if cfg.s_w > 0 else None
    return CorrelationBundle(toeplitz_corr(cfg.S, cfg.a_s), tuple(blocks), R_w)


@dataclass(frozen=True)
class ChannelRealization:
    matrix: np.ndarray
    seed: Optional[int] = None
    trial: Optional[int] = None


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Counter-based substream for trial block `block` of master `seed`."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block),))
    return np.random.Generator(np.random.Philox(ss))


def _cn(rng, shape):
    # real and imaginary parts N(0, 1/2)
    x = rng.standard_normal(tuple(shape) + (2,))
    return x.view(np.complex128)[..., 0] * np.sqrt(0.5)


def _check_bundle(cfg, bundle):
    if bundle.R_s.dim != cfg.S or len(bundle.R_p_blocks) != cfg.g:
        raise ConfigError("correlation bundle does not match the scenario")
    if cfg.s_w > 0 and (bundle.R_w is None or bundle.R_w.dim != cfg.M):
        raise ConfigError("correlation bundle is missing R_w")


def draw_channels(cfg: ScenarioConfig, bundle: CorrelationBundle, rng, count: int) -> np.ndarray:
    """Draw `count` independent realizations of ``G`` as a ``(count, M, K)`` array.

    Draw order is fixed: every PV block ``H_p,i`` in group order, then
    ``H_w``, then ``H``.
    """
    _check_bundle(cfg, bundle)
    A = np.zeros((count, cfg.M, cfg.S), dtype=np.complex128)
    row = col = 0
    for s_i, r_i, rho_i, R in zip(cfg.s_p_per_group, cfg.r_per_group,
                                  cfg.rho_p_per_group, bundle.R_p_blocks):
        H_pi = _cn(rng, (count, r_i, s_i))
        A[:, row:row + r_i, col:col + s_i] = np.sqrt(rho_i / s_i) * (R.sqrt @ H_pi)
        row += r_i
        col += s_i
    if cfg.s_w > 0:
        H_w = _cn(rng, (count, cfg.M, cfg.s_w))
        A[:, :, col:] = np.sqrt(cfg.rho_w / cfg.s_w) * (bundle.R_w.sqrt @ H_w)
    H = _cn(rng, (count, cfg.S, cfg.K))
    return A @ (bundle.R_s.sqrt @ H)


def draw_channel(cfg: ScenarioConfig, bundle: CorrelationBundle, rng) -> ChannelRealization:
    """One realization from an explicit generator."""
    return ChannelRealization(draw_channels(cfg, bundle, rng, 1)[0])


def block_channels(cfg, bundle, seed: int, block: int, count: int = TRIALS_PER_BLOCK):
    """The first `count` trials of block `block` (trial indices ``block*TRIALS_PER_BLOCK + t``).

    The whole block is always drawn so that a trial's matrix does not
    depend on how many trials of its block are requested.
    """
    if not 0 <= count <= TRIALS_PER_BLOCK:
        raise ValueError(f"count must be in [0, {TRIALS_PER_BLOCK}]")
    return draw_channels(cfg, bundle, block_rng(seed, block), TRIALS_PER_BLOCK)[:count]


def channel_for_trial(cfg, bundle, seed: int, trial: int) -> ChannelRealization:
    """Regenerate the channel that Monte Carlo trial `trial` of `seed` uses."""
    block, offset = divmod(int(trial), TRIALS_PER_BLOCK)
    G = block_channels(cfg, bundle, seed, block, offset + 1)[offset]
    return ChannelRealization(G, seed=seed, trial=int(trial))


def receiver_correlation(cfg: ScenarioConfig, bundle: CorrelationBundle) -> np.ndarray:
    """Analytical ``E[G G^H] = K (bdiag{rho_p,i R_p,i} + rho_w R_w)``."""
    _check_bundle(cfg, bundle)
    out = np.zeros((cfg.M, cfg.M), dtype=np.complex128)
    row = 0
    for r_i, rho_i, R in zip(cfg.r_per_group, cfg.rho_p_per_group, bundle.R_p_blocks):
        out[row:row + r_i, row:row + r_i] += rho_i * R.entries
        row += r_i
    if cfg.s_w > 0:
        out += cfg.rho_w * bundle.R_w.entries
    return cfg.K * out


def eigen_spread(cfg: ScenarioConfig, bundle: CorrelationBundle) -> np.ndarray:
    """Eigenvalues of the receiver correlation, descending."""
    w = np.linalg.eigvalsh(receiver_correlation(cfg, bundle))
    return w[::-1].copy()
