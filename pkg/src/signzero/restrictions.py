"""Restriction specifications and their evaluation into coefficient matrices.

A single column ``q_j`` of the rotation matrix is restricted by

    F q_j = 0      (zero restrictions, r rows)
    S q_j >= 0     (sign restrictions, s rows, first row the sign normalisation)

Everything here is a linear function of the reduced-form parameters (and,
for narrative restrictions, of the reduced-form innovations).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    MissingInnovations,
    NotCommonSubspace,
    NotPointIdentified,
    RankDeficient,
    RankDeficientF,
    SingularLongRun,
)
from .linalg import null_space_basis, svd_rank
from .var import IrfCoefficients, ReducedFormParams, irf_coefficients

GEQ = 1
LEQ = -1

ZERO_KINDS = ("zero_a0_entry", "zero_impact", "zero_longrun")
SIGN_KINDS = (
    "sign_a0_entry",
    "sign_irf",
    "elasticity_bound",
    "shape",
    "narrative_shock_sign",
    "narrative_shock_rank_max",
)
KINDS = ZERO_KINDS + SIGN_KINDS


@dataclass(frozen=True)
class RestrictionSpec:
    """One declarative restriction on column ``column`` of Q.

    Field use by kind:

    * ``zero_a0_entry`` / ``sign_a0_entry``: ``var`` is the A0 column; the A0
      row is the restricted shock itself.
    * ``zero_impact`` / ``zero_longrun``: ``var``.
    * ``sign_irf``: ``var``, ``horizon``, ``cumulative``.
    * ``elasticity_bound``: ``var`` (numerator), ``var2`` (denominator),
      ``horizon``, ``lam``; encodes ``resp(var) - lam * resp(var2) >= 0``.
    * ``shape``: ``var``, ``horizon`` (high), ``horizon2`` (low).
    * ``narrative_*``: ``period`` (row of the innovation matrix).
    """

    kind: str
    column: int = 0
    var: int | None = None
    var2: int | None = None
    horizon: int = 0
    horizon2: int = 0
    lam: float = 0.0
    direction: int = GEQ
    period: int | None = None
    cumulative: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown restriction kind {self.kind!r}")
        if self.direction not in (GEQ, LEQ):
            raise ValueError("direction must be +1 (>=) or -1 (<=)")
        if self.column < 0 or self.horizon < 0 or self.horizon2 < 0:
            raise ValueError("indices and horizons must be nonnegative")
        needs_var = self.kind not in ("narrative_shock_sign", "narrative_shock_rank_max")
        if needs_var and self.var is None:
            raise ValueError(f"{self.kind} needs a variable index")
        if self.kind == "elasticity_bound" and self.var2 is None:
            raise ValueError("elasticity_bound needs var2 (denominator)")
        if self.kind.startswith("narrative") and self.period is None:
            raise ValueError(f"{self.kind} needs a period")

    @property
    def is_zero(self) -> bool:
        return self.kind in ZERO_KINDS

    def label(self) -> str:
        parts = [self.kind, f"col={self.column}"]
        for name in ("var", "var2", "period"):
            val = getattr(self, name)
            if val is not None:
                parts.append(f"{name}={val}")
        if self.kind in ("sign_irf", "elasticity_bound", "shape"):
            parts.append(f"h={self.horizon}")
        if self.kind == "shape":
            parts.append(f"h2={self.horizon2}")
        if self.kind == "elasticity_bound":
            parts.append(f"lam={self.lam:g}")
        if self.cumulative:
            parts.append("cumulative")
        if not self.is_zero and self.kind != "narrative_shock_rank_max":
            parts.append(">=" if self.direction == GEQ else "<=")
        return " ".join(parts)


def zero_a0_entry(col: int, column: int = 0, row: int | None = None) -> RestrictionSpec:
    if row is not None and row != column:
        raise ValueError("an A0 entry in row i restricts column i of Q")
    return RestrictionSpec("zero_a0_entry", column=column, var=col)


def sign_a0_entry(col: int, direction: int = GEQ, column: int = 0, row: int | None = None) -> RestrictionSpec:
    if row is not None and row != column:
        raise ValueError("an A0 entry in row i restricts column i of Q")
    return RestrictionSpec("sign_a0_entry", column=column, var=col, direction=direction)


def zero_impact(var: int, column: int = 0) -> RestrictionSpec:
    return RestrictionSpec("zero_impact", column=column, var=var)


def zero_longrun(var: int, column: int = 0) -> RestrictionSpec:
    return RestrictionSpec("zero_longrun", column=column, var=var)


def sign_irf(var: int, horizon: int, direction: int = GEQ, column: int = 0,
             cumulative: bool = False) -> RestrictionSpec:
    return RestrictionSpec("sign_irf", column=column, var=var, horizon=horizon,
                           direction=direction, cumulative=cumulative)


def elasticity_bound(var_num: int, var_den: int, lam: float, horizon: int = 0,
                     direction: int = GEQ, column: int = 0) -> RestrictionSpec:
    return RestrictionSpec("elasticity_bound", column=column, var=var_num, var2=var_den,
                           horizon=horizon, lam=lam, direction=direction)


def shape(var: int, h_high: int, h_low: int, column: int = 0) -> RestrictionSpec:
    return RestrictionSpec("shape", column=column, var=var, horizon=h_high, horizon2=h_low)


def narrative_shock_sign(period: int, direction: int = GEQ, column: int = 0) -> RestrictionSpec:
    return RestrictionSpec("narrative_shock_sign", column=column, period=period, direction=direction)


def narrative_shock_rank_max(period: int, column: int = 0) -> RestrictionSpec:
    return RestrictionSpec("narrative_shock_rank_max", column=column, period=period)


@dataclass(frozen=True)
class RestrictionSystem:
    """Evaluated restrictions on one column: ``F q = 0`` and ``S q >= 0``."""

    F: np.ndarray
    S: np.ndarray
    column: int = 0
    F_meta: tuple[str, ...] = ()
    S_meta: tuple[str, ...] = ()

    def __post_init__(self):
        F = np.asarray(self.F, dtype=float)
        S = np.asarray(self.S, dtype=float)
        n = S.shape[1] if S.ndim == 2 else F.shape[1]
        if F.size == 0:
            F = np.zeros((0, n))
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "S", S)
        if S.ndim != 2 or S.shape[0] < 1:
            raise ValueError("a restriction system needs at least the sign normalisation")
        if F.shape[1] != S.shape[1]:
            raise ValueError("F and S column counts differ")

    @property
    def n(self) -> int:
        return self.S.shape[1]

    @property
    def r(self) -> int:
        return self.F.shape[0]

    @property
    def s(self) -> int:
        return self.S.shape[0]

    def residuals(self, q) -> tuple[np.ndarray, np.ndarray]:
        q = np.asarray(q, dtype=float)
        return self.F @ q, self.S @ q

    def satisfied(self, q, zero_tol: float = 1e-10, sign_tol: float = 1e-8) -> bool:
        fq, sq = self.residuals(q)
        ok_f = fq.size == 0 or np.max(np.abs(fq)) <= zero_tol
        return bool(ok_f and np.min(sq) >= -sign_tol)

    def with_sign_rows(self, rows, labels: Sequence[str] | None = None) -> "RestrictionSystem":
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        labels = tuple(labels) if labels is not None else ("extra",) * rows.shape[0]
        return replace(self, S=np.vstack([self.S, rows]), S_meta=self.S_meta + labels)

    def with_zero_rows(self, rows, labels: Sequence[str] | None = None) -> "RestrictionSystem":
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        labels = tuple(labels) if labels is not None else ("extra",) * rows.shape[0]
        return replace(self, F=np.vstack([self.F, rows]), F_meta=self.F_meta + labels)


def check_full_row_rank(F: np.ndarray) -> None:
    if F.shape[0] == 0:
        return
    s = np.linalg.svd(F, compute_uv=False)
    if svd_rank(s, F.shape) < F.shape[0]:
        raise RankDeficientF(f"rank(F) < {F.shape[0]}")


class _RowCollector:
    """Accumulates rows, merging those equal after scaling to unit norm."""

    def __init__(self, n: int, tol: float):
        self.rows: list[np.ndarray] = []
        self.units: list[np.ndarray] = []
        self.meta: list[str] = []
        self.n = n
        self.tol = tol

    def add(self, row: np.ndarray, label: str, dedup: bool = True) -> bool:
        nrm = np.linalg.norm(row)
        u = row / nrm if nrm > 0 else np.zeros_like(row)
        if dedup and self.units:
            U = np.asarray(self.units)
            if np.any(np.max(np.abs(U - u), axis=1) <= self.tol):
                return False
        self.rows.append(row)
        self.units.append(u)
        self.meta.append(label)
        return True

    def matrix(self) -> np.ndarray:
        return np.asarray(self.rows).reshape(len(self.rows), self.n)


def _max_horizon(specs: Iterable[RestrictionSpec]) -> int:
    h = 0
    for spec in specs:
        if spec.kind in ("sign_irf", "elasticity_bound", "shape"):
            h = max(h, spec.horizon, spec.horizon2)
    return h


def evaluate(specs: Sequence[RestrictionSpec], params: ReducedFormParams,
             innovations: np.ndarray | None = None, column: int | None = None,
             irf: IrfCoefficients | None = None, dedup_tol: float = 1e-12) -> RestrictionSystem:
    """Turn restriction specs on one column of Q into ``(F, S)``.

    The sign normalisation ``(Sigma_tr^{-1} e_j)' q_j >= 0`` is always the
    first row of S.  ``<=`` restrictions are negated.  Sign rows equal to an
    earlier row after scaling to unit norm are merged.
    """
    specs = list(specs)
    cols = {s.column for s in specs}
    if column is None:
        if len(cols) > 1:
            raise ValueError(f"specs restrict several columns {sorted(cols)}; evaluate them separately")
        column = cols.pop() if cols else 0
    elif cols - {column}:
        raise ValueError(f"specs restrict columns {sorted(cols)}, asked for {column}")
    n = params.n
    if column >= n:
        raise ValueError(f"column {column} outside a {n}-variable model")
    L = params.sigma_tr
    L_inv = params.sigma_tr_inv()
    if irf is None or irf.horizon_max < _max_horizon(specs):
        irf = irf_coefficients(params, _max_horizon(specs))
    C = irf.C
    C_cum = None
    long_run = None

    def resp(var: int, h: int, cumulative: bool = False) -> np.ndarray:
        nonlocal C_cum
        if cumulative:
            if C_cum is None:
                C_cum = irf.cumulative()
            return C_cum[h][var] @ L
        return C[h][var] @ L

    def need_u() -> np.ndarray:
        if innovations is None:
            raise MissingInnovations("narrative restrictions need reduced-form innovations")
        u = np.asarray(innovations, dtype=float)
        if u.ndim != 2 or u.shape[1] != n:
            raise ValueError("innovations must be T x n")
        return u

    zero = _RowCollector(n, dedup_tol)
    sign = _RowCollector(n, dedup_tol)
    sign.add(L_inv[:, column].copy(), "normalization", dedup=False)

    for spec in specs:
        for idx in (spec.var, spec.var2):
            if idx is not None and not 0 <= idx < n:
                raise ValueError(f"variable index {idx} outside a {n}-variable model")
        kind = spec.kind
        label = spec.label()
        if kind == "zero_a0_entry":
            zero.add(L_inv[:, spec.var].copy(), label, dedup=False)
        elif kind == "zero_impact":
            zero.add(L[spec.var].copy(), label, dedup=False)
        elif kind == "zero_longrun":
            if long_run is None:
                M = params.long_run_matrix()
                s = np.linalg.svd(M, compute_uv=False)
                if s[-1] <= 1e-12 * max(s[0], 1.0):
                    raise SingularLongRun("I - sum(B_l) is singular")
                long_run = np.linalg.solve(M, L)
            zero.add(long_run[spec.var].copy(), label, dedup=False)
        elif kind == "sign_a0_entry":
            sign.add(spec.direction * L_inv[:, spec.var], label)
        elif kind == "sign_irf":
            sign.add(spec.direction * resp(spec.var, spec.horizon, spec.cumulative), label)
        elif kind == "elasticity_bound":
            row = resp(spec.var, spec.horizon) - spec.lam * resp(spec.var2, spec.horizon)
            sign.add(spec.direction * row, label)
        elif kind == "shape":
            sign.add(resp(spec.var, spec.horizon) - resp(spec.var, spec.horizon2), label)
        elif kind == "narrative_shock_sign":
            u = need_u()
            sign.add(spec.direction * np.linalg.solve(L, u[spec.period]), label)
        elif kind == "narrative_shock_rank_max":
            u = need_u()
            k = spec.period
            if not 0 <= k < u.shape[0]:
                raise ValueError(f"period {k} outside the {u.shape[0]} innovation rows")
            eps = np.linalg.solve(L, u.T).T  # rows: Sigma_tr^{-1} u_t
            sign.add(eps[k].copy(), f"{label} sign")
            for t in range(u.shape[0]):
                if t != k:
                    sign.add(eps[k] - eps[t], f"{label} vs t={t}")

    F = zero.matrix()
    check_full_row_rank(F)
    return RestrictionSystem(F=F, S=sign.matrix(), column=column,
                             F_meta=tuple(zero.meta), S_meta=tuple(sign.meta))


# --- the monetary-policy designs (variables ordered FFR, GDP, GDPDEF, COM, TR, NBR)

ACR_VARIABLES = ("ffr", "gdp", "gdpdef", "com", "tr", "nbr")


def acr19_design(uhlig_horizon: int | None = None, shock_rank_period: int | None = None,
                 labels: Sequence[str] = ACR_VARIABLES) -> list[RestrictionSpec]:
    """Reaction-function restrictions on the monetary policy shock (column 0).

    Zero: the policy rate does not respond contemporaneously to total or
    nonborrowed reserves.  Sign: it does not fall with output or prices, and
    its impact response is nonnegative.  ``uhlig_horizon`` adds the
    nonnegative rate / nonpositive price, commodity and reserve responses for
    h = 0..H; ``shock_rank_period`` adds the largest-shock narrative restriction.
    """
    idx = {name: i for i, name in enumerate(lab.lower() for lab in labels)}
    try:
        ffr, gdp, gdpdef, com, tr, nbr = (idx[v] for v in ACR_VARIABLES)
    except KeyError as exc:
        raise KeyError(f"design needs variables {ACR_VARIABLES}, missing {exc}") from None
    specs = [
        zero_a0_entry(tr),
        zero_a0_entry(nbr),
        sign_a0_entry(gdp, LEQ),
        sign_a0_entry(gdpdef, LEQ),
        sign_irf(ffr, 0, GEQ),
    ]
    if uhlig_horizon is not None:
        for h in range(uhlig_horizon + 1):
            specs += [
                sign_irf(ffr, h, GEQ),
                sign_irf(gdpdef, h, LEQ),
                sign_irf(com, h, LEQ),
                sign_irf(nbr, h, LEQ),
            ]
    if shock_rank_period is not None:
        specs.append(narrative_shock_rank_max(shock_rank_period))
    return specs


# --- several restricted columns

@dataclass(frozen=True)
class MultiColumnSystem:
    """Per-column systems; ``columns[i]`` restricts ``q_i`` in the current order.

    ``order[i]`` is the original shock index now in position i.
    """

    columns: tuple[RestrictionSystem, ...]
    target: int = 0
    order: tuple[int, ...] = field(default=())

    def __post_init__(self):
        cols = tuple(self.columns)
        object.__setattr__(self, "columns", cols)
        if not self.order:
            object.__setattr__(self, "order", tuple(range(len(cols))))
        if not 0 <= self.target < len(cols):
            raise ValueError("target column outside the system")

    @property
    def n(self) -> int:
        return self.columns[0].n

    @property
    def r_counts(self) -> tuple[int, ...]:
        return tuple(c.r for c in self.columns)

    def __len__(self) -> int:
        return len(self.columns)


def evaluate_multi(specs: Sequence[RestrictionSpec], params: ReducedFormParams,
                   innovations: np.ndarray | None = None, n_columns: int | None = None,
                   target: int = 0) -> MultiColumnSystem:
    specs = list(specs)
    if n_columns is None:
        n_columns = max([s.column for s in specs] + [target]) + 1
    irf = irf_coefficients(params, _max_horizon(specs))
    cols = tuple(
        evaluate([s for s in specs if s.column == j], params, innovations, column=j, irf=irf)
        for j in range(n_columns)
    )
    return MultiColumnSystem(cols, target=target)


def ordering_permutation(r_counts: Sequence[int], target: int) -> tuple[int, ...]:
    """Sort columns by zero-restriction count, descending; target first among ties."""
    return tuple(sorted(range(len(r_counts)), key=lambda i: (-r_counts[i], i != target, i)))


def apply_ordering_convention(systems: MultiColumnSystem) -> MultiColumnSystem:
    perm = ordering_permutation(systems.r_counts, systems.target)
    return MultiColumnSystem(
        columns=tuple(systems.columns[i] for i in perm),
        target=perm.index(systems.target),
        order=tuple(systems.order[i] for i in perm),
    )


def _orient(q: np.ndarray, normalization: np.ndarray) -> np.ndarray:
    return -q if normalization @ q < 0 else q


def point_identified_columns(systems: MultiColumnSystem) -> np.ndarray:
    """Solve for q_1..q_{i*} (the columns before the target), n x i*."""
    n = systems.n
    qs: list[np.ndarray] = []
    for i in range(systems.target):
        sys_i = systems.columns[i]
        stacked = np.vstack([sys_i.F] + [q[None, :] for q in qs]) if qs else sys_i.F
        try:
            N = null_space_basis(stacked, n)
        except RankDeficient as exc:
            raise NotPointIdentified(f"column {i}: {exc}") from None
        if N.shape[1] != 1:
            raise NotPointIdentified(f"column {i}: null space has dimension {N.shape[1]}")
        qs.append(_orient(N[:, 0], sys_i.S[0]))
    return np.column_stack(qs) if qs else np.zeros((n, 0))


def extend_zero_point_identified(systems: MultiColumnSystem, params: ReducedFormParams | None = None
                                 ) -> RestrictionSystem:
    """Target system with orthogonality to the point-identified columns appended to F."""
    target = systems.columns[systems.target]
    Qp = point_identified_columns(systems)
    if Qp.shape[1] == 0:
        return target
    ext = target.with_zero_rows(Qp.T, [f"orthogonal to column {i}" for i in range(Qp.shape[1])])
    check_full_row_rank(ext.F)
    return ext


def _row_projector(F: np.ndarray) -> np.ndarray:
    return F.T @ np.linalg.solve(F @ F.T, F)


def extend_zero_common_subspace(systems: MultiColumnSystem, params: ReducedFormParams | None = None
                                ) -> RestrictionSystem:
    """Target system restricted to the complement of the shared subspace of q_1..q_{i*}."""
    i_star = systems.target
    target = systems.columns[i_star]
    if i_star == 0:
        return target
    n = systems.n
    first = systems.columns[0].F
    if first.shape[0] != n - i_star:
        raise NotCommonSubspace(f"need n - i* = {n - i_star} common zero rows, have {first.shape[0]}")
    check_full_row_rank(first)
    P = _row_projector(first)
    for i in range(1, i_star):
        Fi = systems.columns[i].F
        if Fi.shape != first.shape or np.max(np.abs(_row_projector(Fi) - P)) > 1e-8:
            raise NotCommonSubspace(f"column {i} zero restrictions differ from column 0")
    N = null_space_basis(first)
    ext = target.with_zero_rows(N.T, [f"orthogonal to common subspace ({k})" for k in range(N.shape[1])])
    check_full_row_rank(ext.F)
    return ext
