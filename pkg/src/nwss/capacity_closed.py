"""Closed-form upper bound on the ergodic sum capacity and its special cases.

The bound is a principal-minor expansion::

    E[det(I + mu G G^H)] = sum_k mu^k k! C(K, k)
        sum_i det(Rs[i, i]) sum_j det(Rr[j, j]) N(j, i)

where ``i`` ranges over k-subsets of the S clusters, ``j`` over k-subsets of
the rows of ``Rr`` and ``N`` counts the permutations compatible with the
block-sparsity pattern of the scattering matrix.  ``N`` is zero unless ``j``
and ``i`` pick the same number of indices from every block, and then it is
``prod(m_v!)``.  The double sum therefore factorizes over block
compositions ``(m_1, ..., m_{g+1})``::

    sum_c prod(c_v!) * [sum_{i ~ c} det Rs[i]] * [sum_{j ~ c} det Rr[j]]

which is how it is evaluated here; mismatched pairs are never formed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterator, Sequence

import numpy as np

from . import _backend
from .capacity_mc import CapacityResult
from .channel import CorrelationBundle, ScenarioConfig
from .correlation import toeplitz_log2det
from .errors import BudgetExceededError, ConfigError

LN2 = math.log(2.0)
DEFAULT_BUDGET = 10**8
#: subsets per kernel call
CHUNK = 1 << 15


def log2_factorial(n) -> float:
    return math.lgamma(n + 1) / LN2


@dataclass(frozen=True)
class BlockStructure:
    """Row and column block sizes of the scattering pattern ``E``.

    Block ``v`` of ``E`` is all-ones, rows ``row_blocks[v]`` by columns
    ``col_blocks[v]``; everything off the block diagonal is zero.
    """

    row_blocks: tuple
    col_blocks: tuple

    def __post_init__(self):
        rows = tuple(int(x) for x in self.row_blocks)
        cols = tuple(int(x) for x in self.col_blocks)
        if len(rows) != len(cols) or not rows:
            raise ConfigError("row and column block lists must be non-empty and equally long")
        if any(x < 0 for x in rows + cols):
            raise ConfigError("block sizes must be nonnegative")
        object.__setattr__(self, "row_blocks", rows)
        object.__setattr__(self, "col_blocks", cols)

    @property
    def n_rows(self) -> int:
        return sum(self.row_blocks)

    @property
    def n_cols(self) -> int:
        return sum(self.col_blocks)

    def pattern(self) -> np.ndarray:
        """Dense 0/1 matrix ``E``."""
        E = np.zeros((self.n_rows, self.n_cols), dtype=np.int8)
        r = c = 0
        for nr, nc in zip(self.row_blocks, self.col_blocks):
            E[r:r + nr, c:c + nc] = 1
            r += nr
            c += nc
        return E


def block_structure(cfg: ScenarioConfig) -> BlockStructure:
    """Blocks ``(r_p,1..r_p,g, M)`` x ``(s_p,1..s_p,g, s_w)``; absent groups are dropped."""
    rows = list(cfg.r_per_group)
    cols = list(cfg.s_p_per_group)
    if cfg.s_w > 0:
        rows.append(cfg.M)
        cols.append(cfg.s_w)
    return BlockStructure(tuple(rows), tuple(cols))


def _block_counts(indices, sizes, universe_name):
    edges = np.cumsum(sizes)
    idx = list(indices)
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise ValueError(f"{universe_name} indices must be strictly increasing, got {idx}")
    if idx and (idx[0] < 1 or idx[-1] > edges[-1]):
        raise ValueError(f"{universe_name} indices must lie in [1, {edges[-1]}], got {idx}")
    counts = [0] * len(sizes)
    for x in idx:
        counts[int(np.searchsorted(edges, x - 1, side="right"))] += 1
    return counts


def n_count(j: Sequence[int], i: Sequence[int], blocks: BlockStructure) -> int:
    """Permutation count ``N(j, i)`` for 1-based row tuple `j` and column tuple `i`."""
    if len(j) != len(i):
        raise ValueError("j and i must have the same length")
    m = _block_counts(j, blocks.row_blocks, "row")
    n = _block_counts(i, blocks.col_blocks, "column")
    if m != n:
        return 0
    return math.prod(math.factorial(x) for x in m)


def n_count_oracle(j: Sequence[int], i: Sequence[int], blocks: BlockStructure) -> int:
    """Brute-force ``N(j, i)``: permutations of `i` that keep every pair inside ``E``."""
    if len(j) != len(i):
        raise ValueError("j and i must have the same length")
    if len(j) > 8:
        raise ValueError("brute-force enumeration is limited to k <= 8")
    _block_counts(j, blocks.row_blocks, "row")
    _block_counts(i, blocks.col_blocks, "column")
    E = blocks.pattern()
    return sum(
        all(E[r - 1, c - 1] for r, c in zip(j, p))
        for p in permutations(i)
    )


# -- R_r ----------------------------------------------------------------------

def _pv_sqrt(cfg, bundle, gains=True):
    out = np.zeros((cfg.M, cfg.M), dtype=np.complex128)
    row = 0
    for r_i, s_i, rho_i, R in zip(cfg.r_per_group, cfg.s_p_per_group,
                                  cfg.rho_p_per_group, bundle.R_p_blocks):
        scale = math.sqrt(rho_i / s_i) if gains else 1.0
        out[row:row + r_i, row:row + r_i] = scale * R.sqrt
        row += r_i
    return out


def _rr_from_factor(cfg, bundle, gains):
    parts = []
    if cfg.g > 0:
        parts.append(_pv_sqrt(cfg, bundle, gains))
    if cfg.s_w > 0:
        scale = math.sqrt(cfg.rho_w / cfg.s_w) if gains else 1.0
        parts.append(scale * bundle.R_w.sqrt)
    B = np.hstack(parts)
    R = B.conj().T @ B
    return 0.5 * (R + R.conj().T)


def build_Rr(cfg: ScenarioConfig, bundle: CorrelationBundle) -> np.ndarray:
    """``Rr = B^H B`` with ``B = [Wp^1/2, Ww^1/2]``, ``Wp = Dp Rp``, ``Ww = rho_w/s_w Rw``.

    With only PV (or only WV) clusters the single surviving block ``Wp``
    (or ``Ww``) is returned, an ``M x M`` matrix.
    """
    return _rr_from_factor(cfg, bundle, gains=True)


def build_Rr_tilde(cfg: ScenarioConfig, bundle: CorrelationBundle) -> np.ndarray:
    """``Rr`` with the gains stripped: blocks ``Rp``, ``Rp^1/2 Rw^1/2`` and ``Rw``."""
    return _rr_from_factor(cfg, bundle, gains=False)


# -- enumeration ----------------------------------------------------------------

def compositions(k: int, caps: Sequence[int]) -> Iterator[tuple]:
    """All ``(c_1..c_n)`` with ``0 <= c_v <= caps[v]`` summing to `k`, lexicographic."""
    caps = list(caps)
    n = len(caps)
    if n == 0:
        if k == 0:
            yield ()
        return
    tail = [0] * (n + 1)
    for v in range(n - 1, -1, -1):
        tail[v] = tail[v + 1] + caps[v]

    def rec(v, left, prefix):
        if v == n - 1:
            if left <= caps[v]:
                yield prefix + (left,)
            return
        lo = max(0, left - tail[v + 1])
        for c in range(lo, min(caps[v], left) + 1):
            yield from rec(v + 1, left - c, prefix + (c,))

    if k <= tail[0]:
        yield from rec(0, k, ())


def _cartesian(tables):
    n = math.prod(len(t) for t in tables)
    out = np.empty((n, sum(t.shape[1] for t in tables)), dtype=np.intp)
    col = 0
    reps = n
    tile = 1
    for t in tables:
        reps //= len(t)
        w = t.shape[1]
        out[:, col:col + w] = np.tile(np.repeat(t, reps, axis=0), (tile, 1))
        tile *= len(t)
        col += w
    return out


def _product_chunks(tables, chunk):
    total = math.prod(len(t) for t in tables)
    if total <= chunk:
        yield _cartesian(tables)
        return
    head, rest = tables[0], tables[1:]
    rest_total = math.prod(len(t) for t in rest)
    if rest_total <= chunk:
        step = max(1, chunk // rest_total)
        for s in range(0, len(head), step):
            yield _cartesian([head[s:s + step]] + rest)
    else:
        for s in range(len(head)):
            for sub in _product_chunks(rest, chunk):
                yield np.hstack([np.broadcast_to(head[s], (len(sub), head.shape[1])), sub])


def subsets_for(sizes: Sequence[int], comp: Sequence[int], chunk: int = CHUNK):
    """Yield 0-based index arrays of all subsets with ``comp[v]`` picks from block ``v``."""
    tables = []
    off = 0
    for size, c in zip(sizes, comp):
        if c:
            tables.append(np.array(list(combinations(range(off, off + size), c)),
                                   dtype=np.intp).reshape(-1, c))
        off += size
    if not tables:
        yield np.zeros((1, 0), dtype=np.intp)
        return
    yield from _product_chunks(tables, chunk)


def minor_sum(mat: np.ndarray, sizes: Sequence[int], comp: Sequence[int]) -> float:
    """Sum of principal minors of `mat` over the subsets of composition `comp`."""
    return math.fsum(
        math.fsum(_backend.minor_dets(mat, sub)) for sub in subsets_for(sizes, comp)
    )


def naive_term_count(S: int, n_rows: int, kmax: int) -> list:
    """Cumulative ``sum_{k'<=k} C(S, k') C(n_rows, k')`` for ``k = 0..kmax``."""
    out, acc = [], 0
    for k in range(kmax + 1):
        acc += math.comb(S, k) * math.comb(n_rows, k)
        out.append(acc)
    return out


def check_budget(S: int, n_rows: int, kmax: int, budget) -> None:
    if budget is None:
        return
    for k, count in enumerate(naive_term_count(S, n_rows, kmax)):
        if count > budget:
            raise BudgetExceededError(k, count, budget)


def composition_inner_sum(R_s, R_r, blocks: BlockStructure, k: int) -> float:
    """``sum_i sum_j det(Rs[i]) det(Rr[j]) N(j, i)`` for tuples of length `k`."""
    caps = [min(r, c) for r, c in zip(blocks.row_blocks, blocks.col_blocks)]
    total = []
    for comp in compositions(k, caps):
        s_i = minor_sum(R_s, blocks.col_blocks, comp)
        if s_i == 0.0:
            continue
        s_j = minor_sum(R_r, blocks.row_blocks, comp)
        weight = math.prod(math.factorial(c) for c in comp)
        total.append(weight * s_i * s_j)
    return math.fsum(total)


def _log2_sum(log_terms):
    log_terms = [t for t in log_terms if t != -math.inf]
    if not log_terms:
        return -math.inf
    m = max(log_terms)
    return m + math.log2(math.fsum(2.0 ** (t - m) for t in log_terms))


def _bound(cfg, R_s, R_r, blocks, budget):
    if R_r.shape[0] != blocks.n_rows or R_s.shape[0] != blocks.n_cols:
        raise ConfigError("matrix sizes do not match the block structure")
    kmax = min(cfg.M, cfg.K, cfg.S)
    check_budget(cfg.S, blocks.n_rows, kmax, budget)
    mu = cfg.snr_mu
    log_terms = [0.0]  # k = 0
    for k in range(1, kmax + 1):
        if mu == 0.0:
            break
        inner = composition_inner_sum(R_s, R_r, blocks, k)
        if inner <= 0.0:
            continue
        log_terms.append(k * math.log2(mu) + log2_factorial(k)
                         + math.log2(math.comb(cfg.K, k)) + math.log2(inner))
    return max(_log2_sum(log_terms), 0.0)


def closed_form_bound(cfg: ScenarioConfig, bundle: CorrelationBundle,
                      budget=DEFAULT_BUDGET) -> CapacityResult:
    """Exact closed-form ``log2 E[det(I + mu G G^H)]``.

    Raises
    ------
    BudgetExceededError
        When the number of (row, column) minor pairs of the expansion,
        ``sum_k C(S, k) C(rows(Rr), k)``, exceeds `budget`.  Checked before
        any enumeration starts.
    """
    value = _bound(cfg, bundle.R_s.entries, build_Rr(cfg, bundle), block_structure(cfg), budget)
    return CapacityResult(value, "closed_form")


def closed_form_bound_all_pv(cfg: ScenarioConfig, bundle: CorrelationBundle,
                             budget=DEFAULT_BUDGET) -> CapacityResult:
    """All-PV form: the row sum runs over ``Wp = Dp Rp`` only (``M`` rows)."""
    if cfg.s_w != 0 or cfg.rho_w != 0 or cfg.g == 0:
        raise ConfigError("all-PV bound requires s_w = 0, rho_w = 0 and g >= 1")
    W_p = np.zeros((cfg.M, cfg.M), dtype=np.complex128)
    row = 0
    for r_i, s_i, rho_i, R in zip(cfg.r_per_group, cfg.s_p_per_group,
                                  cfg.rho_p_per_group, bundle.R_p_blocks):
        W_p[row:row + r_i, row:row + r_i] = (rho_i / s_i) * R.entries
        row += r_i
    blocks = BlockStructure(cfg.r_per_group, cfg.s_p_per_group)
    return CapacityResult(_bound(cfg, bundle.R_s.entries, W_p, blocks, budget), "closed_form")


# -- high SNR -------------------------------------------------------------------

def _require_square(cfg):
    if not cfg.M == cfg.S == cfg.K:
        raise ConfigError(f"high-SNR expressions need M = S = K, got {cfg.M}, {cfg.S}, {cfg.K}")
    return cfg.M


def _logdet2(mat) -> float:
    sign, logabs = np.linalg.slogdet(mat)
    if sign.real <= 0:
        return -math.inf
    return float(logabs) / LN2


def high_snr_bound(cfg: ScenarioConfig, bundle: CorrelationBundle) -> CapacityResult:
    """Dominant ``k = n`` term of the closed-form bound for ``M = S = K = n``."""
    n = _require_square(cfg)
    blocks = block_structure(cfg)
    comp = blocks.col_blocks  # i = (1..n) picks every column
    if any(c > r for r, c in zip(blocks.row_blocks, comp)) or cfg.snr_mu == 0.0:
        return CapacityResult(-math.inf, "high_snr")
    s_j = minor_sum(build_Rr(cfg, bundle), blocks.row_blocks, comp)
    if s_j <= 0.0:
        return CapacityResult(-math.inf, "high_snr")
    weight = sum(log2_factorial(c) for c in comp)
    value = (n * math.log2(cfg.snr_mu) + log2_factorial(n)
             + _logdet2(bundle.R_s.entries) + weight + math.log2(s_j))
    return CapacityResult(value, "high_snr")


def c_max(cfg: ScenarioConfig, bundle: CorrelationBundle) -> CapacityResult:
    """High-SNR bound at the optimal energy split ``rho_p = s_p / S``.

    The scenario's own ``rho`` values are ignored; the structure must be
    symmetric (equal PV groups) with ``M = S = K = n``.  Either cluster
    kind may be absent.  At the optimum the gains reduce to
    ``(g/n)^s_p (1/n)^s_w`` in front of the admissible principal-minor sum
    of the gain-free ``Rr``.
    """
    n = _require_square(cfg)
    g = cfg.g
    if g and (len(set(cfg.r_per_group)) != 1 or len(set(cfg.s_p_per_group)) != 1):
        raise ConfigError("c_max needs equal PV groups")
    if g and len(set(cfg.rho_p_per_group)) != 1:
        raise ConfigError("c_max needs equal PV gains")
    for R in bundle.R_p_blocks:
        if abs(np.linalg.det(R.entries)) < 1e-14:
            raise ConfigError("c_max needs invertible PV correlation blocks")
    s_p, s_w = cfg.s_p, cfg.s_w
    s_p0 = s_p // g if g else 0
    blocks = block_structure(cfg)
    comp = blocks.col_blocks
    if any(c > r for r, c in zip(blocks.row_blocks, comp)):
        return CapacityResult(-math.inf, "high_snr")
    admissible = minor_sum(build_Rr_tilde(cfg, bundle), blocks.row_blocks, comp)
    if admissible <= 0.0 or cfg.snr_mu == 0.0:
        return CapacityResult(-math.inf, "high_snr")
    value = (n * math.log2(cfg.snr_mu) + log2_factorial(n) + _logdet2(bundle.R_s.entries)
             + g * log2_factorial(s_p0) + log2_factorial(s_w)
             + (s_p * math.log2(g / n) if s_p else 0.0)
             - s_w * math.log2(n)
             + math.log2(admissible))
    return CapacityResult(value, "high_snr")


def all_pv_highsnr(n: int, c: int, mu_tilde: float, a_s, a_p) -> CapacityResult:
    """High-SNR bound of an all-PV ``n x n`` channel with ``n/c`` groups of size ``c``.

    ``mu_tilde`` is the total SNR ``P / sigma^2`` (per-user SNR ``mu_tilde / n``).
    """
    if c < 1 or n % c:
        raise ConfigError(f"c={c} must divide n={n}")
    g = n // c
    ldet_s = toeplitz_log2det(n, a_s)
    ldet_p = toeplitz_log2det(c, a_p)
    value = (n * math.log2(mu_tilde / n) + log2_factorial(n) + ldet_s
             + g * (-c * math.log2(c) + ldet_p + log2_factorial(c)))
    return CapacityResult(value, "high_snr")


def asymptotic_rate(c: int, mu_tilde: float, a_s, a_p) -> CapacityResult:
    """Large-``n`` slope of :func:`all_pv_highsnr` in bits/s/Hz per antenna."""
    if c < 1 or mu_tilde <= 0:
        raise ConfigError("need c >= 1 and mu_tilde > 0")
    if abs(a_s) >= 1 or abs(a_p) >= 1:
        raise ConfigError("correlation moduli must be < 1")
    h = (1 - abs(a_s) ** 2) * (1 - abs(a_p) ** 2) ** (1 - 1 / c)
    value = math.log2(mu_tilde / (math.e * c)) + log2_factorial(c) / c + math.log2(h)
    return CapacityResult(value, "asymptotic")
