"""Finite probability mass functions and restricted input supports.

A FinitePmf is an immutable finite distribution over hashable elements with
either exact Fraction weights (the default throughout the package -- every
downstream epsilon/variance computation stays rational until a final square
root) or float weights.  Elements are kept in a canonical order given by the
byte encoding of their canonical string form, so serialization and iteration
are reproducible regardless of construction order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .exactmath import is_prime

Element = Union[int, str, tuple]
Weight = Union[Fraction, float]

FLOAT_MASS_TOL = 1e-12

__all__ = [
    "FinitePmf",
    "RestrictedInputSpec",
    "restricted_uniform_inputs",
    "collision_probability",
    "collision_entropy",
    "pmf_to_csv",
    "pmf_from_csv",
    "element_to_str",
    "element_from_str",
    "SizeLimitError",
]


class SizeLimitError(ValueError):
    """An enumeration or pair sweep would exceed its configured work cap."""


def element_to_str(x: Element) -> str:
    """Canonical string form: ints as decimals, tuples as '|'-joined decimals."""
    if isinstance(x, bool):
        raise TypeError("bool is not a supported pmf element")
    if isinstance(x, int):
        return str(x)
    if isinstance(x, tuple):
        return "|".join(element_to_str(c) for c in x)
    if isinstance(x, str):
        if "|" in x or x == "":
            raise ValueError(f"string element {x!r} clashes with tuple encoding")
        return x
    raise TypeError(f"unsupported pmf element type {type(x).__name__}")


def element_from_str(s: str) -> Element:
    """Inverse of element_to_str (tuples of ints, ints, else plain strings)."""
    if "|" in s:
        return tuple(int(p) for p in s.split("|"))
    try:
        return int(s)
    except ValueError:
        return s


def element_key(x: Element) -> bytes:
    return element_to_str(x).encode("utf-8")


@dataclass(frozen=True)
class FinitePmf:
    """Immutable finite pmf with exact-or-float weights.

    Parameters
    ----------
    domain : tuple of elements (distinct), stored in canonical byte order
    weights : tuple of Fraction or float, aligned with domain

    The constructor canonicalizes ordering, validates distinctness,
    nonnegativity, and total mass (exactly 1 for rational weights; within
    1e-12 of 1 for float weights).
    """

    domain: tuple[Element, ...]
    weights: tuple[Weight, ...]
    _index: Mapping[Element, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.domain) != len(self.weights):
            raise ValueError("domain and weights must have equal length")
        if not self.domain:
            raise ValueError("a pmf needs a nonempty domain")
        order = sorted(range(len(self.domain)), key=lambda i: element_key(self.domain[i]))
        dom = tuple(self.domain[i] for i in order)
        wts = tuple(self.weights[i] for i in order)
        if len(set(dom)) != len(dom):
            raise ValueError("pmf domain contains duplicate elements")
        rational = all(isinstance(w, (int, Fraction)) and not isinstance(w, bool) for w in wts)
        if rational:
            wts = tuple(Fraction(w) for w in wts)
            if any(w < 0 for w in wts):
                raise ValueError("pmf weights must be nonnegative")
            total = sum(wts)
            if total != 1:
                raise ValueError(f"rational pmf mass must be exactly 1, got {total}")
        else:
            wts = tuple(float(w) for w in wts)
            if any(w < 0 for w in wts):
                raise ValueError("pmf weights must be nonnegative")
            total = math.fsum(wts)
            if abs(total - 1.0) > FLOAT_MASS_TOL:
                raise ValueError(
                    f"float pmf mass must be within {FLOAT_MASS_TOL} of 1, got {total!r}"
                )
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "weights", wts)
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(dom)})

    # -- basic queries ---------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return bool(self.weights) and isinstance(self.weights[0], Fraction)

    def weight(self, x: Element) -> Weight:
        i = self._index.get(x)
        if i is None:
            raise KeyError(f"element {x!r} not in pmf domain")
        return self.weights[i]

    def __contains__(self, x: Element) -> bool:
        return x in self._index

    def __len__(self) -> int:
        return len(self.domain)

    def items(self) -> Iterable[tuple[Element, Weight]]:
        return zip(self.domain, self.weights)

    # -- constructors ----------------------------------------------------

    @classmethod
    def uniform(cls, domain: Sequence[Element]) -> "FinitePmf":
        m = len(domain)
        return cls(tuple(domain), tuple(Fraction(1, m) for _ in range(m)))

    @classmethod
    def from_mapping(cls, mapping: Mapping[Element, Weight]) -> "FinitePmf":
        items = list(mapping.items())
        return cls(tuple(x for x, _ in items), tuple(w for _, w in items))


def collision_probability(pmf: FinitePmf) -> Weight:
    """P[X = X'] for X, X' i.i.d. from the pmf: sum of squared weights."""
    if pmf.is_rational:
        return sum((w * w for w in pmf.weights), Fraction(0))
    return math.fsum(w * w for w in pmf.weights)


def collision_entropy(pmf: FinitePmf) -> float:
    """Collision (Renyi-2) entropy in nats: -log sum_x p(x)^2."""
    cp = collision_probability(pmf)
    if cp == 0:
        raise ValueError("collision entropy undefined for zero collision mass")
    if isinstance(cp, Fraction):
        return math.log(cp.denominator) - math.log(cp.numerator)
    return -math.log(cp)


@dataclass(frozen=True)
class RestrictedInputSpec:
    """Restricted LWE input family: x uniform on ([0, a) cap Z)^n \\ {0} in Z_q^n.

    q must be prime, n >= 1, and 2 <= a <= q so the support a^n - 1 is
    nonempty.  support_size is exact.
    """

    q: int
    n: int
    a: int

    def __post_init__(self) -> None:
        if not is_prime(self.q):
            raise ValueError(f"q must be prime, got {self.q}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.a <= self.q:
            raise ValueError(f"a must satisfy 1 <= a <= q, got a={self.a}, q={self.q}")
        if self.a ** self.n - 1 < 1:
            raise ValueError(f"support size a^n - 1 = {self.a ** self.n - 1} is empty")

    @property
    def support_size(self) -> int:
        return self.a ** self.n - 1


def restricted_uniform_inputs(
    spec: RestrictedInputSpec, max_points: int = 2 * 10 ** 7
) -> FinitePmf:
    """Materialize the uniform pmf on the restricted support (lexicographic).

    Raises SizeLimitError (naming the exact count) when a^n - 1 exceeds
    max_points; callers with large supports should stay on the implicit
    RestrictedInputSpec path instead.
    """
    size = spec.support_size
    if size > max_points:
        raise SizeLimitError(
            f"restricted support has {size} points, exceeding the cap {max_points}"
        )
    a, n = spec.a, spec.n
    points: list[tuple[int, ...]] = []
    vec = [0] * n
    while True:
        # odometer over [0, a)^n in lexicographic order
        pos = n - 1
        while pos >= 0 and vec[pos] == a - 1:
            vec[pos] = 0
            pos -= 1
        if pos < 0:
            break
        vec[pos] += 1
        points.append(tuple(vec))
    w = Fraction(1, size)
    return FinitePmf(tuple(points), tuple(w for _ in points))


# -- CSV serialization ---------------------------------------------------

RATIONAL_HEADER = ["element", "weight_num", "weight_den"]
FLOAT_HEADER = ["element", "weight"]


def pmf_to_csv(pmf: FinitePmf, path_or_buf) -> None:
    """Write a pmf as CSV: rational pmfs use element,weight_num,weight_den;
    float pmfs use element,weight.  UTF-8, '\\n' line endings, header always."""

    def _write(fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        if pmf.is_rational:
            writer.writerow(RATIONAL_HEADER)
            for x, w in pmf.items():
                writer.writerow([element_to_str(x), w.numerator, w.denominator])
        else:
            writer.writerow(FLOAT_HEADER)
            for x, w in pmf.items():
                writer.writerow([element_to_str(x), repr(w)])

    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "w", encoding="utf-8", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_buf)


def pmf_from_csv(path_or_buf) -> FinitePmf:
    """Read a pmf written by pmf_to_csv (header decides rational vs float)."""

    def _read(fh) -> FinitePmf:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header == RATIONAL_HEADER:
            dom, wts = [], []
            for row in reader:
                if not row:
                    continue
                dom.append(element_from_str(row[0]))
                wts.append(Fraction(int(row[1]), int(row[2])))
            return FinitePmf(tuple(dom), tuple(wts))
        if header == FLOAT_HEADER:
            dom, wts = [], []
            for row in reader:
                if not row:
                    continue
                dom.append(element_from_str(row[0]))
                wts.append(float(row[1]))
            return FinitePmf(tuple(dom), tuple(wts))
        raise ValueError(f"unrecognized pmf CSV header: {header}")

    if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "r", encoding="utf-8", newline="") as fh:
            return _read(fh)
    if isinstance(path_or_buf, str):  # pragma: no cover - guarded above
        return _read(io.StringIO(path_or_buf))
    return _read(path_or_buf)
