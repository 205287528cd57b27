"""Pairwise-independence deficits of hypothesis classes.

For a secret class H and inputs x, x', the deficit eps_F(x, x') measures how
far the joint law of (h(x), h(x')) under h ~ uniform(H) sits from the product
of two copies of the reference output law mu_Y, in one of two spaces:

* ``tv``:       sum_{y,y'} |P[y,y'] - p_y p_{y'}|          (exact rational)
* ``pearson``:  sqrt( sum_{y,y'} (P - p p')^2 / (p p') )   (squared value
                kept as an exact Fraction; the root is the only float step)

The diagonal deficit eps_F(x, x) compares the single-output law of h(x) to
mu_Y in the same two senses.

Aggregation over a pair measure mu_X x mu_X has three exact paths:

* direct per-pair evaluation for explicit FinitePmf inputs;
* a closed form for the ``uniform`` kind on restricted supports (only
  collinear distinct pairs contribute, with a rank-independent value);
* exact type-counting kernels (see typecount) for binary/ternary kinds on
  restricted supports far too large to enumerate pairs.

All three agree exactly on overlapping inputs; tests pin that equality.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

from .exactmath import collinearity_scalar, frac_sqrt_float, rank2_mod_q
from .hypotheses import HypothesisClass, class_size, enumerate_secrets
from .measures import (
    FinitePmf,
    RestrictedInputSpec,
    SizeLimitError,
    collision_probability,
    restricted_uniform_inputs,
)
from . import typecount

SPACES = ("tv", "pearson")

DEFAULT_MAX_WORK = 2 * 10 ** 7

__all__ = [
    "SPACES",
    "DEFAULT_MAX_WORK",
    "JointOutputPmf",
    "PearsonEpsilon",
    "EpsilonReport",
    "uniform_outputs",
    "joint_output_pmf",
    "output_marginal",
    "epsilon_tv",
    "epsilon_pearson",
    "epsilon_diag",
    "epsilon_pair",
    "closed_form_epsilon_uniform_lwe",
    "aggregate_epsilon",
    "epsilon_report_to_csv",
]


def uniform_outputs(q: int) -> FinitePmf:
    """Uniform reference output law on Z_q."""
    return FinitePmf.uniform(tuple(range(q)))


class PearsonEpsilon(NamedTuple):
    """Pearson-space deficit: exact squared value plus its float root."""

    squared: Fraction
    value: float

    @classmethod
    def from_squared(cls, squared: Fraction) -> "PearsonEpsilon":
        return cls(squared=squared, value=frac_sqrt_float(squared))


@dataclass(frozen=True)
class JointOutputPmf:
    """Exact joint law of (h(x), h(x')) over Z_q x Z_q, with marginals."""

    q: int
    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        if len(self.matrix) != self.q or any(len(r) != self.q for r in self.matrix):
            raise ValueError("joint matrix must be q x q")
        total = sum(sum(row, Fraction(0)) for row in self.matrix)
        if total != 1:
            raise ValueError(f"joint law mass must be exactly 1, got {total}")

    @property
    def marginal_x(self) -> tuple[Fraction, ...]:
        return tuple(sum(row, Fraction(0)) for row in self.matrix)

    @property
    def marginal_y(self) -> tuple[Fraction, ...]:
        return tuple(
            sum((self.matrix[i][j] for i in range(self.q)), Fraction(0))
            for j in range(self.q)
        )


def _secret_matrix(cls: HypothesisClass) -> np.ndarray:
    return np.asarray(cls.secrets, dtype=np.int64).reshape(cls.size, cls.n)


def joint_output_pmf(
    cls: HypothesisClass, x: tuple[int, ...], xp: tuple[int, ...]
) -> JointOutputPmf:
    """Exact joint output law of (h(x), h(x')) for h uniform on the class."""
    q = cls.q
    K = _secret_matrix(cls)
    ys = (K @ np.asarray(x, dtype=np.int64)) % q
    yps = (K @ np.asarray(xp, dtype=np.int64)) % q
    counts = np.zeros((q, q), dtype=np.int64)
    np.add.at(counts, (ys, yps), 1)
    H = cls.size
    matrix = tuple(
        tuple(Fraction(int(counts[i, j]), H) for j in range(q)) for i in range(q)
    )
    return JointOutputPmf(q=q, matrix=matrix)


def output_marginal(cls: HypothesisClass, x: tuple[int, ...]) -> tuple[Fraction, ...]:
    """Exact law of h(x) for h uniform on the class, as a length-q tuple."""
    q = cls.q
    K = _secret_matrix(cls)
    ys = (K @ np.asarray(x, dtype=np.int64)) % q
    counts = np.bincount(ys, minlength=q)
    H = cls.size
    return tuple(Fraction(int(c), H) for c in counts)


def _output_weights(mu_Y: FinitePmf, q: int) -> tuple[Fraction, ...]:
    if len(mu_Y) != q or set(mu_Y.domain) != set(range(q)):
        raise ValueError("mu_Y must be a pmf on {0, ..., q-1}")
    if not mu_Y.is_rational:
        raise ValueError("epsilon computations require a rational mu_Y")
    return tuple(mu_Y.weight(y) for y in range(q))


def epsilon_tv(joint: JointOutputPmf, mu_Y: FinitePmf) -> Fraction:
    """tv-space deficit: sum_{y,y'} |P[y,y'] - p_y p_{y'}| (exact)."""
    p = _output_weights(mu_Y, joint.q)
    total = Fraction(0)
    for i in range(joint.q):
        for j in range(joint.q):
            total += abs(joint.matrix[i][j] - p[i] * p[j])
    return total


def epsilon_pearson(joint: JointOutputPmf, mu_Y: FinitePmf) -> PearsonEpsilon:
    """Pearson-space deficit; raises on zero reference mass anywhere."""
    p = _output_weights(mu_Y, joint.q)
    if any(w == 0 for w in p):
        raise ValueError(
            "pearson deficit undefined: mu_Y assigns zero mass to some output"
        )
    sq = Fraction(0)
    for i in range(joint.q):
        for j in range(joint.q):
            d = joint.matrix[i][j] - p[i] * p[j]
            sq += d * d / (p[i] * p[j])
    return PearsonEpsilon.from_squared(sq)


def epsilon_diag(
    cls: HypothesisClass, x: tuple[int, ...], mu_Y: FinitePmf, space: str
) -> Union[Fraction, PearsonEpsilon]:
    """Diagonal deficit eps_F(x, x): law of h(x) against mu_Y."""
    _check_space(space)
    marg = output_marginal(cls, x)
    p = _output_weights(mu_Y, cls.q)
    if space == "tv":
        return sum((abs(m - w) for m, w in zip(marg, p)), Fraction(0))
    if any(w == 0 for w in p):
        raise ValueError(
            "pearson deficit undefined: mu_Y assigns zero mass to some output"
        )
    sq = sum(((m - w) ** 2 / w for m, w in zip(marg, p)), Fraction(0))
    return PearsonEpsilon.from_squared(sq)


def _check_space(space: str) -> None:
    if space not in SPACES:
        raise ValueError(f"unknown space {space!r}; expected one of {SPACES}")


def epsilon_pair(
    cls: HypothesisClass,
    x: tuple[int, ...],
    xp: tuple[int, ...],
    mu_Y: FinitePmf,
    space: str,
) -> Union[Fraction, PearsonEpsilon]:
    """eps_F(x, x') in the requested space (dispatches diagonal pairs)."""
    _check_space(space)
    if tuple(x) == tuple(xp):
        return epsilon_diag(cls, x, mu_Y, space)
    joint = joint_output_pmf(cls, x, xp)
    if space == "tv":
        return epsilon_tv(joint, mu_Y)
    return epsilon_pearson(joint, mu_Y)


def closed_form_epsilon_uniform_lwe(
    q: int,
    x: tuple[int, ...],
    xp: tuple[int, ...],
    space: str = "pearson",
) -> Union[Fraction, PearsonEpsilon]:
    """Deficit for the full uniform secret class on Z_q^n, in closed form.

    With k uniform on Z_q^n and x, x' nonzero, the joint law of the two
    outputs is exactly uniform on Z_q^2 when (x, x') has rank 2, and uniform
    on the line {(t, lam t)} when x' = lam x.  Hence

        pearson:  eps^2 = 0            (rank 2, or x' = x)
                  eps^2 = q - 1        (collinear with lam != 1)
        tv:       eps   = 0            resp.  2 (q - 1) / q

    Zero vectors are rejected (the restricted family excludes them).
    """
    _check_space(space)
    if all(c % q == 0 for c in x) or all(c % q == 0 for c in xp):
        raise ValueError("closed form requires nonzero inputs mod q")
    if len(x) != len(xp):
        raise ValueError("inputs must have equal length")
    rank = rank2_mod_q(tuple(x), tuple(xp), q)
    if rank == 2:
        collinear_distinct = False
    else:
        lam = collinearity_scalar(tuple(x), tuple(xp), q)
        collinear_distinct = lam is not None and lam != 1
    if space == "pearson":
        sq = Fraction(q - 1) if collinear_distinct else Fraction(0)
        return PearsonEpsilon.from_squared(sq)
    return Fraction(2 * (q - 1), q) if collinear_distinct else Fraction(0)


# -- aggregation ----------------------------------------------------------


@dataclass(frozen=True)
class EpsilonReport:
    """Aggregate deficit of a class over a pair measure mu_X x mu_X.

    epsilon_sq is the exact rational E[eps_F(X, X')^2] (diagonal pairs use
    the diagonal deficit); epsilon is its float square root.  per_pair is a
    tuple of (x, x', eps_sq) rows when the direct path ran, else None.
    """

    kind: str
    q: int
    n: int
    l: Optional[int]
    a: Optional[int]
    space: str
    epsilon_sq: Fraction
    epsilon: float
    collision_prob: Fraction
    pairs_evaluated: int
    per_pair: Optional[tuple] = None

    @property
    def diagonal_mass(self) -> Fraction:
        return self.collision_prob


ClassLike = Union[HypothesisClass, Mapping]


def _class_config(cls: ClassLike) -> tuple[str, int, int, Optional[int]]:
    if isinstance(cls, HypothesisClass):
        return cls.kind, cls.q, cls.n, cls.l
    kind = cls["kind"]
    q = int(cls["q"])
    n = int(cls["n"])
    l = cls.get("l")
    return kind, q, n, None if l is None else int(l)


def _require_uniform_outputs(mu_Y: Optional[FinitePmf], q: int) -> FinitePmf:
    if mu_Y is None:
        return uniform_outputs(q)
    p = _output_weights(mu_Y, q)
    if any(w != Fraction(1, q) for w in p):
        raise ValueError(
            "restricted-support aggregation paths require the uniform mu_Y"
        )
    return mu_Y


def aggregate_epsilon(
    cls: ClassLike,
    mu_X: Union[FinitePmf, RestrictedInputSpec],
    mu_Y: Optional[FinitePmf] = None,
    space: str = "tv",
    max_work: int = DEFAULT_MAX_WORK,
    keep_pairs: bool = False,
    force_direct: bool = False,
) -> EpsilonReport:
    """E[eps_F(X, X')^2]^(1/2) for X, X' i.i.d. from mu_X, exactly.

    mu_X may be an explicit FinitePmf over coordinate tuples (direct exact
    path, cost |supp|^2 pairs) or a RestrictedInputSpec (closed form for the
    uniform kind; exact type-counting kernels for binary/ternary).  The work
    cap counts ordered pairs on the direct path and types on the kernel path;
    exceeding it raises SizeLimitError naming the offending count.

    force_direct materializes a RestrictedInputSpec support and runs the
    direct path (the dual-path oracle used in tests).
    """
    _check_space(space)
    kind, q, n, l = _class_config(cls)

    if isinstance(mu_X, RestrictedInputSpec):
        if mu_X.q != q:
            raise ValueError("mu_X modulus disagrees with the class modulus")
        if mu_X.n != n:
            raise ValueError("mu_X dimension disagrees with the class dimension")
        if force_direct:
            mu_Y = _require_uniform_outputs(mu_Y, q)
            pmf = restricted_uniform_inputs(mu_X, max_points=max_work)
            report = _aggregate_direct(
                _materialize(cls), pmf, mu_Y, space, max_work, keep_pairs
            )
            return _with_spec_fields(report, mu_X)
        mu_Y = _require_uniform_outputs(mu_Y, q)
        if kind == "uniform":
            return _aggregate_uniform_closed_form(q, n, mu_X, space)
        return _aggregate_typecount(kind, q, n, l, mu_X, space, max_work)

    mu_Y = uniform_outputs(q) if mu_Y is None else mu_Y
    return _aggregate_direct(_materialize(cls), mu_X, mu_Y, space, max_work, keep_pairs)


def _materialize(cls: ClassLike) -> HypothesisClass:
    if isinstance(cls, HypothesisClass):
        return cls
    kind, q, n, l = _class_config(cls)
    return enumerate_secrets(kind, q, n, l)


def _with_spec_fields(report: EpsilonReport, spec: RestrictedInputSpec) -> EpsilonReport:
    return EpsilonReport(
        kind=report.kind,
        q=report.q,
        n=report.n,
        l=report.l,
        a=spec.a,
        space=report.space,
        epsilon_sq=report.epsilon_sq,
        epsilon=report.epsilon,
        collision_prob=report.collision_prob,
        pairs_evaluated=report.pairs_evaluated,
        per_pair=report.per_pair,
    )


def _aggregate_direct(
    cls: HypothesisClass,
    mu_X: FinitePmf,
    mu_Y: FinitePmf,
    space: str,
    max_work: int,
    keep_pairs: bool,
) -> EpsilonReport:
    support = mu_X.domain
    npairs = len(support) ** 2
    if npairs > max_work:
        raise SizeLimitError(
            f"direct aggregation needs {npairs} ordered pairs, exceeding the "
            f"cap {max_work}"
        )
    if not mu_X.is_rational:
        raise ValueError("direct aggregation requires a rational mu_X")
    total = Fraction(0)
    rows = [] if keep_pairs else None
    # Cache eps^2 per unordered pair; eps is symmetric in (x, x').
    cache: dict[tuple, Fraction] = {}
    for x in support:
        wx = mu_X.weight(x)
        for xp in support:
            key = (x, xp) if x <= xp else (xp, x)
            sq = cache.get(key)
            if sq is None:
                e = epsilon_pair(cls, x, xp, mu_Y, space)
                sq = e * e if isinstance(e, Fraction) else e.squared
                cache[key] = sq
            total += wx * mu_X.weight(xp) * sq
            if rows is not None:
                rows.append((x, xp, sq))
    return EpsilonReport(
        kind=cls.kind,
        q=cls.q,
        n=cls.n,
        l=cls.l,
        a=None,
        space=space,
        epsilon_sq=total,
        epsilon=frac_sqrt_float(total),
        collision_prob=collision_probability(mu_X),
        pairs_evaluated=npairs,
        per_pair=None if rows is None else tuple(rows),
    )


def _aggregate_uniform_closed_form(
    q: int, n: int, spec: RestrictedInputSpec, space: str
) -> EpsilonReport:
    """Closed-form aggregate for the full uniform class on a restricted support.

    Only ordered pairs (x, lam x) with lam in {2, ..., q-1} contribute; both
    endpoints lie in the support iff every coordinate of x falls in
    B_lam = {u in [0, a) : lam u mod q < a}, giving |B_lam|^n - 1 nonzero
    choices of x.  Diagonal pairs contribute zero (h(x) is exactly uniform
    for x != 0 under the uniform class).
    """
    a = spec.a
    S = spec.support_size
    per_pair_sq = (
        Fraction(2 * (q - 1), q) ** 2 if space == "tv" else Fraction(q - 1)
    )
    count = 0
    for lam in range(2, q):
        b = sum(1 for u in range(a) if (lam * u) % q < a)
        count += b ** n - 1
    total = Fraction(count, S * S) * per_pair_sq
    return EpsilonReport(
        kind="uniform",
        q=q,
        n=n,
        l=None,
        a=a,
        space=space,
        epsilon_sq=total,
        epsilon=frac_sqrt_float(total),
        collision_prob=Fraction(1, S),
        pairs_evaluated=S * S,
    )


def _aggregate_typecount(
    kind: str,
    q: int,
    n: int,
    l: int,
    spec: RestrictedInputSpec,
    space: str,
    max_work: int,
) -> EpsilonReport:
    sums = typecount_sums(q, spec.a, n, (l,), (kind,), max_work)
    return _report_from_sums(kind, q, n, l, spec, space, sums[(kind, l)])


def typecount_sums(
    q: int,
    a: int,
    n: int,
    ls: Sequence[int],
    kinds: Sequence[str],
    max_work: int,
) -> dict:
    """Run the type-counting kernels once for a (q, a, n) group.

    Returns {(kind, l): (off_tv, off_pe, diag_tv, diag_pe, H)} with exact
    integer numerators as documented in typecount.  Amortizes one kernel walk
    over every requested sparsity level and kind.
    """
    ntypes = typecount.pair_type_count(n, a)
    if ntypes > max_work:
        raise SizeLimitError(
            f"type-counting needs {ntypes} pair types for a={a}, n={n}, "
            f"exceeding the cap {max_work}"
        )
    do_b = "binary" in kinds
    do_t = "ternary" in kinds
    if not (do_b or do_t):
        raise ValueError("typecount path serves binary/ternary kinds only")
    if do_t and q == 2:
        raise ValueError("ternary kind requires q >= 3")
    lmax = max(ls)
    if not all(1 <= v <= n for v in ls):
        raise ValueError("sparsity levels must satisfy 1 <= l <= n")
    L = lmax + 1
    Hb = np.zeros(L, dtype=np.int64)
    Ht = np.zeros(L, dtype=np.int64)
    for v in range(L):
        Hb[v] = class_size("binary", q, n, v)
        if q != 2:
            Ht[v] = class_size("ternary", q, n, v)
    acc = np.zeros((2, L, 2, 2), dtype=np.int64)
    accd = np.zeros((2, L, 2, 2), dtype=np.int64)
    typecount.pair_type_sums(q, a, n, L, do_b, do_t, Hb, Ht, acc)
    typecount.diag_type_sums(q, a, n, L, do_b, do_t, Hb, Ht, accd)
    out = {}
    for kind in kinds:
        k = 0 if kind == "binary" else 1
        Hs = Hb if kind == "binary" else Ht
        for v in set(ls):
            out[(kind, v)] = (
                typecount.limbs_to_int(acc[k, v, 0, 0], acc[k, v, 0, 1]),
                typecount.limbs_to_int(acc[k, v, 1, 0], acc[k, v, 1, 1]),
                typecount.limbs_to_int(accd[k, v, 0, 0], accd[k, v, 0, 1]),
                typecount.limbs_to_int(accd[k, v, 1, 0], accd[k, v, 1, 1]),
                int(Hs[v]),
            )
    return out


def _report_from_sums(
    kind: str,
    q: int,
    n: int,
    l: int,
    spec: RestrictedInputSpec,
    space: str,
    sums: tuple,
) -> EpsilonReport:
    off_tv, off_pe, diag_tv, diag_pe, H = sums
    S = spec.support_size
    if space == "tv":
        total = (
            Fraction(off_tv, (H * q * q) ** 2) + Fraction(diag_tv, (H * q) ** 2)
        ) / (S * S)
    else:
        total = (
            Fraction(off_pe, H * H * q * q) + Fraction(diag_pe, H * H * q)
        ) / (S * S)
    return EpsilonReport(
        kind=kind,
        q=q,
        n=n,
        l=l,
        a=spec.a,
        space=space,
        epsilon_sq=total,
        epsilon=frac_sqrt_float(total),
        collision_prob=Fraction(1, S),
        pairs_evaluated=S * S,
    )


EPSILON_CSV_HEADER = [
    "q", "n", "l", "a", "kind", "space", "epsilon", "collision_prob",
    "pairs_evaluated",
]


def epsilon_report_to_csv(reports: Sequence[EpsilonReport], path_or_buf) -> None:
    """Write aggregate reports as CSV (UTF-8, '\\n', header always)."""

    def _write(fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EPSILON_CSV_HEADER)
        for r in reports:
            w.writerow(
                [
                    r.q,
                    r.n,
                    "" if r.l is None else r.l,
                    "" if r.a is None else r.a,
                    r.kind,
                    r.space,
                    repr(r.epsilon),
                    repr(float(r.collision_prob)),
                    r.pairs_evaluated,
                ]
            )

    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_buf)
