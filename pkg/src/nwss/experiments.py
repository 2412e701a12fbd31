"""Parameter sweeps, CSV persistence and eigenvalue dumps.

A sweep varies one scenario parameter over a grid and evaluates a set of
methods at every point.  All Monte Carlo methods reuse the same seed at
every grid point (common random numbers), so differences between points
are not blurred by independent sampling noise.

Rows are written in long format, one ``(grid value, method)`` pair per
line, with floats printed to 17 significant digits so that parsing the
file back reproduces every number exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .capacity_closed import DEFAULT_BUDGET, closed_form_bound, high_snr_bound
from .capacity_mc import mc_capacity, mc_jensen, mmse_sum_rate
from .channel import ScenarioConfig, build_bundle, eigen_spread, symmetric_config
from .errors import BudgetExceededError, ConfigError

SWEEP_PARAMS = ("rho_p", "s_p", "g", "snr_db", "n_joint", "m_fixed_k")
SWEEP_METHODS = ("mc_capacity", "mc_jensen", "closed_form", "high_snr", "mmse_rate", "eigen_spread")
CSV_COLUMNS = ("sweep_param", "value", "method", "value_bits", "std_error",
               "trials", "wall_time_ms", "error")
DEFAULT_TRIALS = 10_000
_INTEGER_PARAMS = ("s_p", "g", "n_joint", "m_fixed_k")


def _as_int(value, name):
    if float(value) != int(value):
        raise ConfigError(f"{name} grid values must be integers, got {value!r}")
    return int(value)


def _symmetric_parts(cfg):
    # groups must be equal for sweeps that rebuild the structure
    if cfg.g and (len(set(cfg.r_per_group)) != 1 or len(set(cfg.s_p_per_group)) != 1
                  or len(set(cfg.rho_p_per_group)) != 1):
        raise ConfigError("this sweep needs a base config with equal PV groups")
    rho_p = cfg.rho_p_per_group[0] if cfg.g else 0.0
    return rho_p


def _scaled(base: ScenarioConfig, n: int, K: int, mu: float) -> ScenarioConfig:
    """Grow ``M`` and ``S`` to `n` keeping group size, cluster mix and gains."""
    rho_p = _symmetric_parts(base)
    if n * base.S % base.M or n * base.s_w % base.M:
        raise ConfigError(f"cannot scale M={base.M}, S={base.S} to M={n} with integer cluster counts")
    S = n * base.S // base.M
    s_w = n * base.s_w // base.M
    if base.g:
        c = base.r_per_group[0]
        if n % c:
            raise ConfigError(f"group size {c} does not divide M={n}")
        g = n // c
    else:
        g = 0
    rho_w = base.rho_w if s_w else 0.0
    return symmetric_config(n, S, K, g, S - s_w, rho_p, base.a_p, base.a_w, base.a_s,
                            snr_mu=mu, rho_w=rho_w)


def config_at(base: ScenarioConfig, param: str, value) -> ScenarioConfig:
    """Scenario at one grid point of a sweep over `param`.

    ``rho_p`` sets every PV gain and keeps the energy normalized through
    ``rho_w = 1 - rho_p``.  ``s_p`` moves clusters between PV and WV with
    the gains at ``s_p / S``.  ``n_joint`` grows ``M = S = K`` together and
    ``m_fixed_k`` grows ``M`` and ``S`` with ``K`` fixed; both keep the
    total SNR ``mu * K`` constant.
    """
    if param == "rho_p":
        if base.g == 0:
            raise ConfigError("rho_p sweep needs PV groups")
        v = float(value)
        return base.replace(rho_p_per_group=(v,) * base.g,
                            rho_w=(1.0 - v) if base.s_w else 0.0)
    if param == "snr_db":
        return base.replace(snr_mu=10.0 ** (float(value) / 10.0))
    if param == "g":
        rho_p = _symmetric_parts(base)
        return symmetric_config(base.M, base.S, base.K, _as_int(value, param), base.s_p,
                                rho_p, base.a_p, base.a_w, base.a_s, base.snr_mu,
                                rho_w=base.rho_w if base.s_w else 0.0)
    if param == "s_p":
        _symmetric_parts(base)
        s_p = _as_int(value, param)
        if not 0 <= s_p <= base.S:
            raise ConfigError(f"s_p={s_p} outside [0, S={base.S}]")
        g = (base.g or 1) if s_p else 0
        rho_p = s_p / base.S
        return symmetric_config(base.M, base.S, base.K, g, s_p, rho_p,
                                base.a_p, base.a_w, base.a_s, base.snr_mu)
    if param == "n_joint":
        n = _as_int(value, param)
        return _scaled(base, n, n, base.snr_mu * base.K / n)
    if param == "m_fixed_k":
        m = _as_int(value, param)
        return _scaled(base, m, base.K, base.snr_mu)
    raise ConfigError(f"unknown sweep parameter {param!r}; choose from {', '.join(SWEEP_PARAMS)}")


@dataclass(frozen=True)
class SweepSpec:
    """One parameter sweep; every grid point is validated on construction."""

    base_config: ScenarioConfig
    sweep_param: str
    grid: tuple
    methods: tuple
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    budget: int = DEFAULT_BUDGET
    configs: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.sweep_param not in SWEEP_PARAMS:
            raise ConfigError(f"unknown sweep parameter {self.sweep_param!r}")
        methods = tuple(self.methods)
        bad = [m for m in methods if m not in SWEEP_METHODS]
        if bad or not methods:
            raise ConfigError(f"methods must be a non-empty subset of {', '.join(SWEEP_METHODS)}")
        if len(set(methods)) != len(methods):
            raise ConfigError("duplicate methods")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        grid = tuple(_as_int(v, self.sweep_param) if self.sweep_param in _INTEGER_PARAMS
                     else float(v) for v in self.grid)
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "trials", int(self.trials))
        object.__setattr__(self, "configs",
                           tuple(config_at(self.base_config, self.sweep_param, v) for v in grid))


@dataclass(frozen=True)
class ResultRow:
    sweep_param: str
    value: float
    method: str
    value_bits: float
    std_error: Optional[float] = None
    trials: Optional[int] = None
    wall_time_ms: Optional[float] = None
    error: str = ""


_MC = {"mc_capacity": mc_capacity, "mc_jensen": mc_jensen, "mmse_rate": mmse_sum_rate}


def _condition_number(eigs):
    lo, hi = eigs[-1], eigs[0]
    return math.inf if lo <= 1e-12 * hi else float(hi / lo)


def _evaluate(method, cfg, bundle, spec, workers):
    if method in _MC:
        res = _MC[method](cfg, bundle, spec.trials, spec.seed, workers=workers)
        return res.value, res.std_error, res.trials
    if method == "closed_form":
        return closed_form_bound(cfg, bundle, spec.budget).value, None, None
    if method == "high_snr":
        return high_snr_bound(cfg, bundle).value, None, None
    return _condition_number(eigen_spread(cfg, bundle)), None, None


def _point_rows(spec, value, cfg, workers, timing):
    bundle = build_bundle(cfg)
    rows = []
    for method in spec.methods:
        t0 = time.perf_counter()
        try:
            v, se, n = _evaluate(method, cfg, bundle, spec, workers)
            err = ""
        except (BudgetExceededError, ConfigError) as exc:
            v, se, n, err = math.nan, None, None, f"{type(exc).__name__}: {exc}"
        ms = (time.perf_counter() - t0) * 1e3 if timing else None
        rows.append(ResultRow(spec.sweep_param, value, method, v, se, n, ms, err))
    return rows


def run_sweep(spec: SweepSpec, out_path=None, workers: int = 1, timing: bool = True):
    """Evaluate every method at every grid point; optionally write the CSV.

    Grid points run concurrently on `workers` threads but rows always come
    back in grid order.  Budget and structural errors at a point are
    recorded in the row's ``error`` field and the sweep continues.  With
    ``timing=False`` the wall-time column is left empty, which makes the
    file byte-identical across reruns.
    """
    points = list(zip(spec.grid, spec.configs))

    def work(p):
        return _point_rows(spec, p[0], p[1], 1, timing)

    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, points))
    else:
        parts = [work(p) for p in points]
    rows = [r for part in parts for r in part]
    if out_path is not None:
        write_rows(rows, out_path)
    return rows


# -- CSV -------------------------------------------------------------------------

def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.sweep_param, _fmt(r.value), r.method, _fmt(r.value_bits),
                    _fmt(r.std_error), _fmt(r.trials), _fmt(r.wall_time_ms), r.error])
    return buf.getvalue()


def write_rows(rows, out_path):
    with open(out_path, "w", newline="") as f:
        f.write(rows_to_csv(rows))


def _parse_value(text, param):
    v = float(text)
    return int(v) if param in _INTEGER_PARAMS else v


def parse_rows(text: str) -> list:
    """Inverse of :func:`rows_to_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = []
    for rec in reader:
        param, value, method, bits, se, trials, ms, err = rec
        rows.append(ResultRow(
            param, _parse_value(value, param), method, float(bits),
            float(se) if se else None, int(trials) if trials else None,
            float(ms) if ms else None, err,
        ))
    return rows


def read_rows(path) -> list:
    with open(path, newline="") as f:
        return parse_rows(f.read())


def emit_eigen(cfg: ScenarioConfig, out_path=None) -> np.ndarray:
    """Receiver-correlation eigenvalues (descending), optionally as ``index,eigenvalue`` CSV."""
    eigs = eigen_spread(cfg, build_bundle(cfg))
    if out_path is not None:
        with open(out_path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(("index", "eigenvalue"))
            for i, e in enumerate(eigs, 1):
                w.writerow((i, _fmt(e)))
    return eigs


# -- config documents ----------------------------------------------------------

_SWEEP_KEYS = {"param", "grid", "methods", "trials", "seed", "budget"}


def load_document(path):
    """Read a scenario JSON file; returns ``(ScenarioConfig, sweep dict or None)``."""
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    doc = dict(doc)
    sweep = doc.pop("sweep", None)
    if sweep is not None:
        if not isinstance(sweep, dict):
            raise ConfigError("sweep block must be a JSON object")
        unknown = sorted(set(sweep) - _SWEEP_KEYS)
        if unknown:
            raise ConfigError(f"unknown sweep keys: {', '.join(unknown)}")
    return ScenarioConfig.from_dict(doc), sweep


def parse_list(text: str, cast=str) -> list:
    """Comma-separated CLI list; an empty string gives an empty list."""
    items = [t.strip() for t in text.split(",")] if text.strip() else []
    try:
        return [cast(t) for t in items]
    except ValueError as exc:
        raise ConfigError(f"bad list {text!r}: {exc}") from exc
