"""Run configuration: YAML schema, validation and data loading.

Schema (version 1)::

    version: 1
    seed: 7                      # required
    threads: 1
    data:
      path: data.csv             # relative to the config file
      variables: [ffr, gdp]      # columns to use, in model order
      transforms: {gdp: log}     # log | level (default level)
    model: {lags: 2, constant: true, stable_only: false}
    posterior: {draws: 100}
    designs:
      - name: base
        preset: {acr19: {uhlig_horizon: 5}}     # optional
        extends: other-design                   # optional, inherits restrictions
        restrictions:
          - {kind: sign_irf, var: gdp, horizons: [0, 3], sign: "<="}
    sampler: {enabled: true, draws: 200, burn_in: 3, thin: 2}
    bounds:
      enabled: true
      variables: [gdp]
      horizons: [0, 12]          # inclusive range
      method: auto               # auto | active_set | local_opt
      budget: 1000000
      cumulative: false
    summary: {alpha: 0.68, event: negative}
    output: {dir: out, timings: false}
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from ..errors import ConfigError, DataError
from ..restrictions import GEQ, KINDS, LEQ, RestrictionSpec, acr19_design
from ..var import VarData

SCHEMA_VERSION = 1
OUT_ENV = "SIGNZERO_OUT"

_SIGNS = {">=": GEQ, "+": GEQ, "positive": GEQ, "geq": GEQ, "<=": LEQ, "-": LEQ, "negative": LEQ, "leq": LEQ}


@dataclass(frozen=True)
class DesignConfig:
    name: str
    specs: tuple[RestrictionSpec, ...]


@dataclass(frozen=True)
class RunConfig:
    seed: int
    data_path: Path
    variables: tuple[str, ...]
    transforms: dict[str, str]
    lags: int
    constant: bool
    stable_only: bool
    posterior_draws: int
    designs: tuple[DesignConfig, ...]
    sampler_enabled: bool
    sampler_draws: int
    burn_in: int
    thin: int
    bounds_enabled: bool
    bounds_variables: tuple[str, ...]
    horizons: tuple[int, ...]
    bounds_method: str
    budget: int
    cumulative: bool
    alpha: float
    event: str | None
    out_dir: Path
    record_timings: bool
    threads: int
    raw: dict = field(repr=False, default_factory=dict)
    data: VarData | None = field(repr=False, default=None)

    def digest(self) -> str:
        """Hash of the normalised configuration (paths made relative, overrides applied)."""
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


def _get(d: dict, key: str, where: str, kind=None, default=Any, required=False):
    if key not in d or d[key] is None:
        if required or default is Any:
            raise ConfigError(f"{where}.{key}: required field missing")
        return default
    val = d[key]
    if kind is not None:
        if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
            raise ConfigError(f"{where}.{key}: expected an integer, got {val!r}")
        if kind is float and (isinstance(val, bool) or not isinstance(val, (int, float))):
            raise ConfigError(f"{where}.{key}: expected a number, got {val!r}")
        if kind is bool and not isinstance(val, bool):
            raise ConfigError(f"{where}.{key}: expected true/false, got {val!r}")
        if kind is str and not isinstance(val, str):
            raise ConfigError(f"{where}.{key}: expected a string, got {val!r}")
        if kind is list and not isinstance(val, list):
            raise ConfigError(f"{where}.{key}: expected a list, got {val!r}")
        if kind is dict and not isinstance(val, dict):
            raise ConfigError(f"{where}.{key}: expected a mapping, got {val!r}")
    return val


def _section(raw: dict, key: str) -> dict:
    val = raw.get(key) or {}
    if not isinstance(val, dict):
        raise ConfigError(f"{key}: expected a mapping")
    return val


def _check_keys(d: dict, allowed: set[str], where: str) -> None:
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {extra}")


def _horizon_range(val, where: str) -> list[int]:
    if isinstance(val, int) and not isinstance(val, bool):
        hs = [val]
    elif isinstance(val, list) and len(val) == 2 and all(isinstance(v, int) for v in val):
        hs = list(range(val[0], val[1] + 1))
    else:
        raise ConfigError(f"{where}: expected an integer or an inclusive [from, to] pair, got {val!r}")
    if not hs or min(hs) < 0:
        raise ConfigError(f"{where}: horizons must be nonnegative and nonempty")
    return hs


# --- data

def load_data(path: Path, variables: tuple[str, ...], transforms: dict[str, str], lags: int,
              constant: bool) -> VarData:
    """Read a CSV with a header row; an ISO-date first column is optional."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [(li, r) for li, r in enumerate(rows[1:], start=2) if any(cell.strip() for cell in r)]
    if not body:
        raise DataError(f"{path}: no data rows")
    has_dates = bool(body[0][1]) and _is_date(body[0][1][0])
    lower = [h.lower() for h in header]
    idx = []
    for v in variables:
        if v.lower() not in lower:
            raise DataError(f"{path}: no column named {v!r} (header: {header})")
        idx.append(lower.index(v.lower()))
    Y = np.empty((len(body), len(variables)))
    dates = []
    for t, (li, row) in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"{path}:{li}: expected {len(header)} fields, found {len(row)}")
        if has_dates:
            if not _is_date(row[0]):
                raise DataError(f"{path}:{li}: {row[0]!r} is not an ISO date")
            dates.append(row[0].strip())
        for k, c in enumerate(idx):
            cell = row[c].strip()
            try:
                val = float(cell)
            except ValueError:
                raise DataError(f"{path}:{li}: column {header[c]!r}: {cell!r} is not a number") from None
            if not math.isfinite(val):
                raise DataError(f"{path}:{li}: column {header[c]!r}: missing or non-finite value")
            Y[t, k] = val
    for k, v in enumerate(variables):
        if transforms.get(v, "level") == "log":
            if np.any(Y[:, k] <= 0):
                raise DataError(f"{path}: column {v!r} has nonpositive values, cannot take logs")
            Y[:, k] = np.log(Y[:, k])
    try:
        return VarData(Y, lags, tuple(variables), constant, tuple(dates) if has_dates else None)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def _is_date(cell: str) -> bool:
    try:
        _dt.date.fromisoformat(cell.strip())
        return True
    except ValueError:
        return False


# --- restrictions

def _var_index(name, variables: tuple[str, ...], where: str) -> int:
    lowered = [v.lower() for v in variables]
    if isinstance(name, str) and name.lower() in lowered:
        return lowered.index(name.lower())
    raise ConfigError(f"{where}: unknown variable {name!r}; have {list(variables)}")


def _period_index(val, data: VarData | None, where: str) -> int:
    if isinstance(val, int) and not isinstance(val, bool):
        return val
    if isinstance(val, str) and data is not None:
        dates = data.sample_dates()
        if dates is None:
            raise ConfigError(f"{where}: the data have no date column, give the period as an index")
        if val not in dates:
            raise ConfigError(f"{where}: date {val!r} not in the estimation sample")
        return dates.index(val)
    raise ConfigError(f"{where}: period must be an index or an ISO date, got {val!r}")


_RESTRICTION_KEYS = {"kind", "var", "denom", "lam", "horizon", "horizons", "horizon_low", "sign",
                     "period", "cumulative", "shock"}


def parse_restriction(entry: dict, variables: tuple[str, ...], data: VarData | None,
                      where: str) -> list[RestrictionSpec]:
    if not isinstance(entry, dict):
        raise ConfigError(f"{where}: expected a mapping")
    _check_keys(entry, _RESTRICTION_KEYS, where)
    kind = _get(entry, "kind", where, str, required=True)
    if kind not in KINDS:
        raise ConfigError(f"{where}.kind: unknown kind {kind!r}; one of {list(KINDS)}")
    shock = _get(entry, "shock", where, int, 0)
    if shock != 0:
        raise ConfigError(f"{where}.shock: the command line driver restricts shock 0 only")
    sign_txt = str(_get(entry, "sign", where, None, ">="))
    if sign_txt not in _SIGNS:
        raise ConfigError(f"{where}.sign: expected one of {sorted(_SIGNS)}, got {sign_txt!r}")
    direction = _SIGNS[sign_txt]
    if "horizons" in entry and "horizon" in entry:
        raise ConfigError(f"{where}: give horizon or horizons, not both")
    hs = _horizon_range(entry.get("horizons", entry.get("horizon", 0)), f"{where}.horizon")
    base: dict[str, Any] = {"kind": kind, "column": 0, "direction": direction}
    if kind.startswith("narrative"):
        base["period"] = _period_index(_get(entry, "period", where, required=True), data, f"{where}.period")
        if data is not None and not 0 <= base["period"] < data.T:
            raise ConfigError(f"{where}.period: index {base['period']} outside the {data.T} sample periods")
    else:
        base["var"] = _var_index(_get(entry, "var", where, required=True), variables, f"{where}.var")
    if kind == "elasticity_bound":
        base["var2"] = _var_index(_get(entry, "denom", where, required=True), variables, f"{where}.denom")
        base["lam"] = float(_get(entry, "lam", where, float, required=True))
    if kind == "shape":
        base["horizon2"] = _get(entry, "horizon_low", where, int, required=True)
    if kind == "sign_irf":
        base["cumulative"] = _get(entry, "cumulative", where, bool, False)
    uses_h = kind in ("sign_irf", "elasticity_bound", "shape")
    try:
        if uses_h:
            return [RestrictionSpec(horizon=h, **base) for h in hs]
        return [RestrictionSpec(**base)]
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _preset_specs(preset, variables, data, where) -> list[RestrictionSpec]:
    if not isinstance(preset, dict) or set(preset) != {"acr19"}:
        raise ConfigError(f"{where}: the only preset is 'acr19'")
    opts = preset["acr19"] or {}
    if not isinstance(opts, dict):
        raise ConfigError(f"{where}.acr19: expected a mapping")
    _check_keys(opts, {"uhlig_horizon", "shock_rank_period"}, f"{where}.acr19")
    H = _get(opts, "uhlig_horizon", f"{where}.acr19", int, None)
    period = opts.get("shock_rank_period")
    if period is not None:
        period = _period_index(period, data, f"{where}.acr19.shock_rank_period")
    try:
        return acr19_design(H, period, variables)
    except KeyError as exc:
        raise ConfigError(f"{where}.acr19: {exc.args[0]}") from None


def parse_designs(raw_designs, variables, data) -> tuple[DesignConfig, ...]:
    if not isinstance(raw_designs, list) or not raw_designs:
        raise ConfigError("designs: expected a nonempty list")
    out: dict[str, DesignConfig] = {}
    for i, d in enumerate(raw_designs):
        where = f"designs[{i}]"
        if not isinstance(d, dict):
            raise ConfigError(f"{where}: expected a mapping")
        _check_keys(d, {"name", "preset", "extends", "restrictions"}, where)
        name = _get(d, "name", where, str, f"design{i + 1}")
        if name in out:
            raise ConfigError(f"{where}.name: duplicate design name {name!r}")
        specs: list[RestrictionSpec] = []
        if d.get("extends") is not None:
            parent = d["extends"]
            if parent not in out:
                raise ConfigError(f"{where}.extends: {parent!r} is not an earlier design")
            specs += out[parent].specs
        if d.get("preset") is not None:
            specs += _preset_specs(d["preset"], variables, data, f"{where}.preset")
        for k, entry in enumerate(_get(d, "restrictions", where, list, [])):
            specs += parse_restriction(entry, variables, data, f"{where}.restrictions[{k}]")
        out[name] = DesignConfig(name, tuple(specs))
    return tuple(out.values())


def load_config(path, seed: int | None = None, out_dir=None, threads: int | None = None,
                load_dataset: bool = True) -> RunConfig:
    """Parse and validate a run configuration.

    ``seed``, ``out_dir`` and ``threads`` override the file; the environment
    variable ``SIGNZERO_OUT`` overrides the output directory when ``out_dir``
    is not given.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{path}{loc}: invalid YAML ({getattr(exc, 'problem', exc)})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    _check_keys(raw, {"version", "seed", "threads", "data", "model", "posterior", "designs", "sampler",
                      "bounds", "summary", "output"}, "config")
    version = raw.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"version: unsupported schema version {version!r}")
    if seed is not None:
        raw["seed"] = seed
    seed_val = _get(raw, "seed", "config", int, required=True)
    if threads is not None:
        raw["threads"] = threads
    n_threads = _get(raw, "threads", "config", int, 1)
    if n_threads < 1:
        raise ConfigError("threads: must be >= 1")

    data_sec = _section(raw, "data")
    _check_keys(data_sec, {"path", "variables", "transforms"}, "data")
    data_path = Path(_get(data_sec, "path", "data", str, required=True))
    if not data_path.is_absolute():
        data_path = (path.parent / data_path).resolve()
    variables = tuple(_get(data_sec, "variables", "data", list, required=True))
    if not variables or not all(isinstance(v, str) for v in variables):
        raise ConfigError("data.variables: expected a nonempty list of column names")
    if len({v.lower() for v in variables}) != len(variables):
        raise ConfigError("data.variables: duplicate names")
    transforms = dict(_get(data_sec, "transforms", "data", dict, {}))
    for v, t in transforms.items():
        if v not in variables:
            raise ConfigError(f"data.transforms.{v}: not a selected variable")
        if t not in ("log", "level"):
            raise ConfigError(f"data.transforms.{v}: expected log or level, got {t!r}")

    model = _section(raw, "model")
    _check_keys(model, {"lags", "constant", "stable_only"}, "model")
    lags = _get(model, "lags", "model", int, required=True)
    if lags < 1:
        raise ConfigError("model.lags: must be >= 1")
    constant = _get(model, "constant", "model", bool, True)
    stable_only = _get(model, "stable_only", "model", bool, False)

    post = _section(raw, "posterior")
    _check_keys(post, {"draws"}, "posterior")
    n_post = _get(post, "draws", "posterior", int, 100)
    if n_post < 1:
        raise ConfigError("posterior.draws: must be >= 1")

    data = load_data(data_path, variables, transforms, lags, constant) if load_dataset else None
    designs = parse_designs(raw.get("designs"), variables, data)

    samp = _section(raw, "sampler")
    _check_keys(samp, {"enabled", "draws", "burn_in", "thin"}, "sampler")
    s_draws = _get(samp, "draws", "sampler", int, 200)
    burn_in = _get(samp, "burn_in", "sampler", int, 3)
    thin = _get(samp, "thin", "sampler", int, 2)
    if s_draws < 1 or burn_in < 0 or thin < 1:
        raise ConfigError("sampler: need draws >= 1, burn_in >= 0, thin >= 1")

    bnd = _section(raw, "bounds")
    _check_keys(bnd, {"enabled", "variables", "horizons", "method", "budget", "cumulative"}, "bounds")
    b_vars = tuple(_get(bnd, "variables", "bounds", list, list(variables)))
    for k, v in enumerate(b_vars):
        _var_index(v, variables, f"bounds.variables[{k}]")
    horizons = tuple(_horizon_range(bnd.get("horizons", [0, 12]), "bounds.horizons"))
    method = _get(bnd, "method", "bounds", str, "auto")
    if method not in ("auto", "active_set", "local_opt"):
        raise ConfigError(f"bounds.method: expected auto, active_set or local_opt, got {method!r}")
    budget = _get(bnd, "budget", "bounds", int, 1_000_000)

    summ = _section(raw, "summary")
    _check_keys(summ, {"alpha", "event"}, "summary")
    alpha = float(_get(summ, "alpha", "summary", float, 0.68))
    if not 0 < alpha <= 1:
        raise ConfigError("summary.alpha: must lie in (0, 1]")
    event = _get(summ, "event", "summary", str, None)
    if event is not None and event not in ("negative", "positive", "nonpositive", "nonnegative"):
        raise ConfigError(f"summary.event: unknown event {event!r}")

    out = _section(raw, "output")
    _check_keys(out, {"dir", "timings"}, "output")
    if out_dir is None:
        out_dir = os.environ.get(OUT_ENV) or _get(out, "dir", "output", str, "out")
    out_path = Path(out_dir)
    if not out_path.is_absolute() and out_dir == out.get("dir"):
        out_path = path.parent / out_path
    record_timings = _get(out, "timings", "output", bool, False)

    norm = dict(raw)
    norm["data"] = dict(data_sec, path=data_path.name)
    norm.pop("threads", None)  # results do not depend on the worker count
    norm["output"] = {"timings": record_timings}
    return RunConfig(
        seed=seed_val, data_path=data_path, variables=variables, transforms=transforms, lags=lags,
        constant=constant, stable_only=stable_only, posterior_draws=n_post, designs=designs,
        sampler_enabled=_get(samp, "enabled", "sampler", bool, True), sampler_draws=s_draws,
        burn_in=burn_in, thin=thin, bounds_enabled=_get(bnd, "enabled", "bounds", bool, True),
        bounds_variables=b_vars, horizons=horizons,
        bounds_method={"auto": "auto", "active_set": "ActiveSet", "local_opt": "LocalOpt"}[method],
        budget=budget, cumulative=_get(bnd, "cumulative", "bounds", bool, False), alpha=alpha,
        event=event, out_dir=out_path, record_timings=record_timings, threads=n_threads, raw=norm,
        data=data,
    )
