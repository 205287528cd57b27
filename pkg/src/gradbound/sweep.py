"""Deficit sweep over (q, n, l, a, kind) grids and the log-log regressions.

The sweep computes the exact tv-mode aggregate deficit for every grid cell
(via the closed form for uniform secrets and the type-counting kernels for
binary/ternary), then fits the two nested regression hypotheses

    -log(eps) = b0 + b1 log|H|
    -log(eps) = b0 + b1 log|H| + b2 log a

by ordinary least squares on the rows with eps > 0 (zero-deficit rows are
excluded from the fit and counted).  Cells whose exact computation would
exceed the work cap are recorded as failures and the sweep continues.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .hypotheses import KINDS, class_size
from .measures import RestrictedInputSpec, SizeLimitError
from .pairwise import (
    DEFAULT_MAX_WORK,
    EpsilonReport,
    _aggregate_uniform_closed_form,
    _report_from_sums,
    typecount_sums,
)
from .parallel import pmap

__all__ = [
    "SweepCell",
    "SweepRow",
    "CellFailure",
    "SweepResult",
    "OlsFit",
    "RegressionComparison",
    "SingularDesignError",
    "default_grid",
    "run_sweep",
    "ols_fit",
    "regression_compare",
    "sweep_rows_to_csv",
    "sweep_rows_from_csv",
    "fits_to_csv",
    "scatter_to_csv",
]


@dataclass(frozen=True, order=True)
class SweepCell:
    """One grid cell.  l is None for the uniform kind."""

    q: int
    n: int
    a: int
    kind: str
    l: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "uniform":
            if self.l is not None:
                raise ValueError("uniform cells take no l")
        elif self.l is None or not 1 <= self.l <= self.n:
            raise ValueError(f"cell needs 1 <= l <= n, got l={self.l}, n={self.n}")
        RestrictedInputSpec(self.q, self.n, self.a)  # validates q prime, a range


def __cell_sort_key(c: SweepCell):
    return (c.q, c.n, c.a, c.kind, -1 if c.l is None else c.l)


@dataclass(frozen=True)
class SweepRow:
    """Exact sweep result for one cell (tv mode unless stated otherwise)."""

    q: int
    n: int
    l: Optional[int]
    a: int
    kind: str
    space: str
    class_size: int
    epsilon_sq: Fraction
    epsilon: float
    collision_prob: Fraction
    pairs_evaluated: int

    @property
    def log_H(self) -> float:
        return math.log(self.class_size)

    @property
    def log_a(self) -> float:
        return math.log(self.a)

    @property
    def neg_log_eps(self) -> Optional[float]:
        """-log eps = -(1/2) log(eps^2), from the exact rational."""
        if self.epsilon_sq == 0:
            return None
        return -0.5 * (
            math.log(self.epsilon_sq.numerator) - math.log(self.epsilon_sq.denominator)
        )


@dataclass(frozen=True)
class CellFailure:
    cell: SweepCell
    message: str


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    failures: tuple[CellFailure, ...]

    @property
    def regression_rows(self) -> tuple[SweepRow, ...]:
        return tuple(r for r in self.rows if r.epsilon_sq > 0)

    @property
    def zero_rows(self) -> tuple[SweepRow, ...]:
        return tuple(r for r in self.rows if r.epsilon_sq == 0)


def default_grid() -> list[SweepCell]:
    """The shipped default grid: q in {3,5,7}, n in 4..9, a in 2..q,
    l in 1..min(4, n) for the sparse kinds, all three kinds."""
    cells: list[SweepCell] = []
    for q in (3, 5, 7):
        for n in range(4, 10):
            for a in range(2, q + 1):
                cells.append(SweepCell(q=q, n=n, a=a, kind="uniform"))
                for l in range(1, min(4, n) + 1):
                    cells.append(SweepCell(q=q, n=n, a=a, kind="binary", l=l))
                    cells.append(SweepCell(q=q, n=n, a=a, kind="ternary", l=l))
    return sorted(cells, key=__cell_sort_key)


def run_sweep(
    cells: Sequence[SweepCell],
    space: str = "tv",
    max_work: int = DEFAULT_MAX_WORK,
    threads: int = 1,
) -> SweepResult:
    """Evaluate every (deduplicated) cell; failures recorded, never raised.

    Binary/ternary cells sharing (q, a, n) are served by a single kernel walk
    covering all their sparsity levels; groups run as independent parallel
    jobs with a deterministic final ordering by cell.
    """
    uniq = sorted(set(cells), key=__cell_sort_key)
    uniform_cells = [c for c in uniq if c.kind == "uniform"]
    sparse_cells = [c for c in uniq if c.kind != "uniform"]

    groups: dict[tuple[int, int, int], list[SweepCell]] = {}
    for c in sparse_cells:
        groups.setdefault((c.q, c.a, c.n), []).append(c)
    group_keys = sorted(groups)

    def run_group(key: tuple[int, int, int]):
        q, a, n = key
        members = groups[key]
        ls = tuple(sorted({c.l for c in members}))
        kinds = tuple(sorted({c.kind for c in members}))
        try:
            sums = typecount_sums(q, a, n, ls, kinds, max_work)
        except SizeLimitError as exc:
            return ("fail", str(exc))
        return ("ok", sums)

    outcomes = pmap(run_group, group_keys, threads=threads)
    by_key = dict(zip(group_keys, outcomes))

    rows: list[SweepRow] = []
    failures: list[CellFailure] = []
    for c in uniq:
        spec = RestrictedInputSpec(c.q, c.n, c.a)
        if c.kind == "uniform":
            rep = _aggregate_uniform_closed_form(c.q, c.n, spec, space)
            rows.append(_row_from_report(c, rep))
            continue
        status, payload = by_key[(c.q, c.a, c.n)]
        if status == "fail":
            failures.append(CellFailure(cell=c, message=payload))
            continue
        rep = _report_from_sums(c.kind, c.q, c.n, c.l, spec, space, payload[(c.kind, c.l)])
        rows.append(_row_from_report(c, rep))
    return SweepResult(rows=tuple(rows), failures=tuple(failures))


def _row_from_report(cell: SweepCell, rep: EpsilonReport) -> SweepRow:
    return SweepRow(
        q=cell.q,
        n=cell.n,
        l=cell.l,
        a=cell.a,
        kind=cell.kind,
        space=rep.space,
        class_size=class_size(cell.kind, cell.q, cell.n, cell.l),
        epsilon_sq=rep.epsilon_sq,
        epsilon=rep.epsilon,
        collision_prob=rep.collision_prob,
        pairs_evaluated=rep.pairs_evaluated,
    )


# -- ordinary least squares ------------------------------------------------


class SingularDesignError(ValueError):
    """The regression design matrix is rank deficient."""


@dataclass(frozen=True)
class OlsFit:
    """OLS solution with R^2 and per-coefficient t-statistics.

    beta and t are aligned with `names`; resid_var is the unbiased estimate
    SSR/(nrows - ncoef).
    """

    names: tuple[str, ...]
    beta: tuple[float, ...]
    t: tuple[float, ...]
    r2: float
    resid_var: float
    nrows: int


def ols_fit(X: np.ndarray, y: np.ndarray, names: Sequence[str]) -> OlsFit:
    """Least squares via the rank-revealing (pivoted) gelsy driver."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nrows, ncoef = X.shape
    if len(names) != ncoef:
        raise ValueError("names must match the number of design columns")
    if nrows < ncoef + 2:
        raise ValueError(
            f"need at least {ncoef + 2} rows for {ncoef} coefficients, got {nrows}"
        )
    beta, _, rank, _ = scipy.linalg.lstsq(X, y, lapack_driver="gelsy", cond=1e-10)
    if rank < ncoef:
        raise SingularDesignError(
            f"design matrix {nrows}x{ncoef} has rank {rank}; columns "
            f"{tuple(names)} are collinear"
        )
    resid = y - X @ beta
    ssr = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    if sst == 0:
        raise SingularDesignError("response is constant; R^2 undefined")
    r2 = 1.0 - ssr / sst
    dof = nrows - ncoef
    resid_var = ssr / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    se = np.sqrt(np.clip(resid_var * np.diag(xtx_inv), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.inf * np.sign(beta))
    return OlsFit(
        names=tuple(names),
        beta=tuple(float(b) for b in beta),
        t=tuple(float(v) for v in t),
        r2=float(r2),
        resid_var=float(resid_var),
        nrows=nrows,
    )


@dataclass(frozen=True)
class RegressionComparison:
    without_log_a: OlsFit
    with_log_a: OlsFit
    nrows: int
    zero_rows_excluded: int


def regression_compare(rows: Sequence[SweepRow]) -> RegressionComparison:
    """Fit both nested models on identical rows (eps > 0 only).

    Requires at least two distinct a values (otherwise log a is collinear
    with the intercept).  Asserts the nested-model fact R2_with >=
    R2_without, which cannot fail for a correct least-squares solver.
    """
    usable = [r for r in rows if r.epsilon_sq > 0]
    zero_excluded = len(rows) - len(usable)
    if len({r.a for r in usable}) < 2:
        raise ValueError(
            "regression_compare needs rows spanning >= 2 distinct a values"
        )
    y = np.array([r.neg_log_eps for r in usable])
    logH = np.array([r.log_H for r in usable])
    loga = np.array([r.log_a for r in usable])
    ones = np.ones_like(y)
    fit1 = ols_fit(np.column_stack([ones, logH]), y, ("beta0", "beta1"))
    fit2 = ols_fit(
        np.column_stack([ones, logH, loga]), y, ("beta0", "beta1", "beta2")
    )
    assert fit2.r2 >= fit1.r2 - 1e-12, "nested model lowered R^2"
    return RegressionComparison(
        without_log_a=fit1,
        with_log_a=fit2,
        nrows=len(usable),
        zero_rows_excluded=zero_excluded,
    )


# -- CSV I/O ---------------------------------------------------------------

SWEEP_CSV_HEADER = [
    "q", "n", "l", "a", "kind", "space", "epsilon", "collision_prob",
    "pairs_evaluated",
]
FIT_CSV_HEADER = ["model", "beta0", "beta1", "beta2", "t0", "t1", "t2", "R2", "nrows"]
SCATTER_CSV_HEADER = ["log_H", "neg_log_eps", "a"]


def _open_write(path_or_buf, writer_fn) -> None:
    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            writer_fn(fh)
    else:
        writer_fn(path_or_buf)


def sweep_rows_to_csv(rows: Sequence[SweepRow], path_or_buf) -> None:
    def _write(fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_CSV_HEADER)
        for r in rows:
            w.writerow(
                [
                    r.q,
                    r.n,
                    "" if r.l is None else r.l,
                    r.a,
                    r.kind,
                    r.space,
                    repr(r.epsilon),
                    repr(float(r.collision_prob)),
                    r.pairs_evaluated,
                ]
            )

    _open_write(path_or_buf, _write)


def sweep_rows_from_csv(path_or_buf) -> list[SweepRow]:
    """Reload sweep rows; epsilon_sq is reconstructed as a float-backed
    Fraction (sufficient for the regression, which only takes logs)."""

    def _read(fh) -> list[SweepRow]:
        reader = csv.DictReader(fh)
        missing = set(SWEEP_CSV_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"sweep CSV missing columns: {sorted(missing)}")
        rows = []
        for rec in reader:
            l = None if rec["l"] == "" else int(rec["l"])
            q, n, a = int(rec["q"]), int(rec["n"]), int(rec["a"])
            eps = float(rec["epsilon"])
            rows.append(
                SweepRow(
                    q=q,
                    n=n,
                    l=l,
                    a=a,
                    kind=rec["kind"],
                    space=rec["space"],
                    class_size=class_size(rec["kind"], q, n, l),
                    epsilon_sq=Fraction(eps) ** 2,
                    epsilon=eps,
                    collision_prob=Fraction(float(rec["collision_prob"])),
                    pairs_evaluated=int(rec["pairs_evaluated"]),
                )
            )
        return rows

    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "r", encoding="utf-8", newline="") as fh:
            return _read(fh)
    return _read(path_or_buf)


def fits_to_csv(comparison: RegressionComparison, path_or_buf) -> None:
    def _write(fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIT_CSV_HEADER)
        f1 = comparison.without_log_a
        w.writerow(
            [
                "without_log_a",
                repr(f1.beta[0]),
                repr(f1.beta[1]),
                "",
                repr(f1.t[0]),
                repr(f1.t[1]),
                "",
                repr(f1.r2),
                f1.nrows,
            ]
        )
        f2 = comparison.with_log_a
        w.writerow(
            [
                "with_log_a",
                repr(f2.beta[0]),
                repr(f2.beta[1]),
                repr(f2.beta[2]),
                repr(f2.t[0]),
                repr(f2.t[1]),
                repr(f2.t[2]),
                repr(f2.r2),
                f2.nrows,
            ]
        )

    _open_write(path_or_buf, _write)


def scatter_to_csv(rows: Sequence[SweepRow], path_or_buf) -> None:
    """Scatter data (eps > 0 rows only): log|H| against -log eps, tagged by a."""

    def _write(fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCATTER_CSV_HEADER)
        for r in rows:
            if r.epsilon_sq > 0:
                w.writerow([repr(r.log_H), repr(r.neg_log_eps), r.a])

    _open_write(path_or_buf, _write)
