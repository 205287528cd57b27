"""LWE-style hypothesis classes: families of secrets k in Z_q^n with
h_k(x) = <k, x> mod q, drawn uniformly from the class.

Three kinds are supported:

* ``uniform``: all of Z_q^n (size q^n);
* ``binary``: coordinates in {0, 1} with at most l ones (size sum_i C(n, i));
* ``ternary``: coordinates in {0, 1, q-1} (i.e. {0, +1, -1} mod q) with at
  most l nonzero coordinates (size sum_i C(n, i) * 2^i).  Requires q >= 3:
  for q = 2 the residues +1 and -1 coincide and the kind would double-count.

Enumeration is lexicographic over residue vectors with the per-coordinate
order (0, 1, q-1) for ternary, and duplicate-free by construction.  Sizes
are computed in closed form first so oversize requests fail before any work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exactmath import is_prime
from .measures import FinitePmf, SizeLimitError

KINDS = ("uniform", "binary", "ternary")

DEFAULT_ENUM_CAP = 2 * 10 ** 7

__all__ = [
    "HypothesisClass",
    "enumerate_secrets",
    "class_size",
    "eval_hypothesis",
    "KINDS",
    "DEFAULT_ENUM_CAP",
]


def _validate(kind: str, q: int, n: int, l: int | None) -> None:
    if kind not in KINDS:
        raise ValueError(f"unknown hypothesis kind {kind!r}; expected one of {KINDS}")
    if not is_prime(q):
        raise ValueError(f"q must be prime, got {q}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if kind == "uniform":
        if l is not None:
            raise ValueError("uniform kind takes no sparsity parameter l")
    else:
        if l is None:
            raise ValueError(f"{kind} kind requires a sparsity parameter l")
        if not 0 <= l <= n:
            raise ValueError(f"l must satisfy 0 <= l <= n, got l={l}, n={n}")
    if kind == "ternary" and q == 2:
        raise ValueError(
            "ternary kind requires q >= 3: for q = 2 the residues +1 and -1 "
            "coincide and the class would duplicate binary secrets"
        )


def class_size(kind: str, q: int, n: int, l: int | None = None) -> int:
    """Exact class size from the closed form (no enumeration)."""
    _validate(kind, q, n, l)
    if kind == "uniform":
        return q ** n
    if kind == "binary":
        return sum(math.comb(n, i) for i in range(l + 1))
    return sum(math.comb(n, i) * 2 ** i for i in range(l + 1))


@dataclass(frozen=True)
class HypothesisClass:
    """A concrete enumerated secret class with its uniform drawing measure."""

    kind: str
    q: int
    n: int
    l: int | None
    secrets: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.secrets)

    @property
    def chi(self) -> FinitePmf:
        """Uniform pmf over the enumerated secrets."""
        return FinitePmf.uniform(self.secrets)

    def config(self) -> dict:
        return {"kind": self.kind, "q": self.q, "n": self.n, "l": self.l}


def enumerate_secrets(
    kind: str,
    q: int,
    n: int,
    l: int | None = None,
    max_secrets: int = DEFAULT_ENUM_CAP,
) -> HypothesisClass:
    """Enumerate the class in lexicographic residue order, duplicate-free.

    The closed-form size is checked against max_secrets first; a
    SizeLimitError naming the exact count is raised before enumeration.
    """
    size = class_size(kind, q, n, l)
    if size > max_secrets:
        raise SizeLimitError(
            f"{kind} class with q={q}, n={n}, l={l} has {size} secrets, "
            f"exceeding the cap {max_secrets}"
        )
    secrets: list[tuple[int, ...]] = []
    if kind == "uniform":
        vec = [0] * n
        secrets.append(tuple(vec))
        while True:
            pos = n - 1
            while pos >= 0 and vec[pos] == q - 1:
                vec[pos] = 0
                pos -= 1
            if pos < 0:
                break
            vec[pos] += 1
            secrets.append(tuple(vec))
    else:
        # DFS in per-coordinate order; ternary uses (0, 1, q-1), which is
        # ascending as residues, so the emitted order is plain lexicographic.
        digits = (0, 1) if kind == "binary" else (0, 1, q - 1)
        prefix = [0] * n

        def walk(pos: int, used: int) -> None:
            if pos == n:
                secrets.append(tuple(prefix))
                return
            for d in digits:
                cost = 0 if d == 0 else 1
                if used + cost > l:
                    continue
                prefix[pos] = d
                walk(pos + 1, used + cost)
            prefix[pos] = 0

        walk(0, 0)
    assert len(secrets) == size, "closed-form size disagrees with enumeration"
    return HypothesisClass(kind=kind, q=q, n=n, l=l, secrets=tuple(secrets))


def eval_hypothesis(secret: tuple[int, ...], x: tuple[int, ...], q: int) -> int:
    """h_k(x) = sum_i k_i x_i mod q."""
    if len(secret) != len(x):
        raise ValueError(
            f"secret has length {len(secret)} but input has length {len(x)}"
        )
    return sum(k * v for k, v in zip(secret, x)) % q
