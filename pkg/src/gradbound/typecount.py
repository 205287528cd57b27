"""Exact type-counting kernels for aggregating epsilon over restricted inputs.

For all supported secret kinds the drawing measure is exchangeable across
coordinates, so the joint law of (<k,x>, <k,x'>) depends on the ordered pair
(x, x') only through its *type*: the multiset of coordinate cells
(u, v) = (x_i, x_i') in [0,a)^2.  Aggregating E[eps^2] over the uniform pair
measure on the restricted support therefore reduces to a walk over all
C(n + a^2 - 1, a^2 - 1) types, weighting each by its multinomial multiplicity.

Per type, joint output counts over the secret class are built by a
weight-resolved dynamic program: state[w, y, y'] counts secrets-so-far with w
nonzero coordinates and partial sums (y, y').  Appending a coordinate in cell
(u, v) applies the transfer

    state[w, y, y'] += state[w-1, y-u, y'-v]            (binary; k_i = 1)
    state[w, y, y'] += state[w-1, y+u, y'+v]            (ternary extra; k_i = -1)

in place with w descending (the untouched term is k_i = 0).  Sparsity-l class
counts are the w <= l partial sums, so one walk serves every l up to the
maximum requested, for both kinds at once.

Everything is exact int64 arithmetic; per-type contributions are accumulated
into 128-bit integers held as (hi, lo) limbs split at 2^62.  The kernels are
nogil so thread pools can overlap independent (q, a, n) groups.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

LIMB_BITS = 62
LIMB_MASK = (1 << LIMB_BITS) - 1

__all__ = [
    "pair_type_count",
    "diag_type_count",
    "pair_type_sums",
    "diag_type_sums",
    "limbs_to_int",
]


def pair_type_count(n: int, a: int) -> int:
    """Number of ordered-pair types: C(n + a^2 - 1, a^2 - 1)."""
    return math.comb(n + a * a - 1, a * a - 1)


def diag_type_count(n: int, a: int) -> int:
    """Number of single-vector types: C(n + a - 1, a - 1)."""
    return math.comb(n + a - 1, a - 1)


def limbs_to_int(hi: int, lo: int) -> int:
    """Recombine a (hi, lo) accumulator pair into an arbitrary-precision int."""
    return (int(hi) << LIMB_BITS) + int(lo)


@njit(cache=True, nogil=True, inline="always")
def _apply_pair(state, q, L, u, v, ternary):
    qq = q * q
    for w in range(L - 1, 0, -1):
        bw = w * qq
        bp = bw - qq
        for y in range(q):
            r1 = (y - u) % q
            r2 = (y + u) % q
            for yp in range(q):
                add = state[bp + r1 * q + (yp - v) % q]
                if ternary:
                    add += state[bp + r2 * q + (yp + v) % q]
                state[bw + y * q + yp] += add


@njit(cache=True, nogil=True, inline="always")
def _apply_diag(state, q, L, u, ternary):
    for w in range(L - 1, 0, -1):
        bw = w * q
        bp = bw - q
        for y in range(q):
            add = state[bp + (y - u) % q]
            if ternary:
                add += state[bp + (y + u) % q]
            state[bw + y] += add


@njit(cache=True, nogil=True, inline="always")
def _acc_add(acc, kind, l, space, value):
    lo = acc[kind, l, space, 1] + value
    acc[kind, l, space, 0] += lo >> LIMB_BITS
    acc[kind, l, space, 1] = lo & LIMB_MASK


@njit(cache=True, nogil=True)
def pair_type_sums(q, a, n, L, do_b, do_t, Hb, Ht, acc):
    """Accumulate per-l off-diagonal epsilon numerators over all pair types.

    Parameters
    ----------
    q, a, n : modulus, input alphabet size, dimension
    L : lmax + 1 weight layers (layer w counts secrets of weight exactly w)
    do_b, do_t : booleans, which kinds to accumulate
    Hb, Ht : int64[L], class sizes for sparsity l (index l), per kind
    acc : int64[2, L, 2, 2] accumulator, indexed [kind, l, space, limb] with
        kind 0=binary 1=ternary, space 0=tv 1=pearson, limb 0=hi 1=lo.

    For each type with multiplicity m the added values are
        tv:       m * (sum_{y,y'} |N*q^2 - H|)^2
        pearson:  m * (sum_{y,y'} (N*q^2 - H)^2)
    where N are the class counts for the given l.  Types touching only x = 0,
    only x' = 0, or only diagonal cells (x = x') are skipped; diagonal pairs
    are handled by diag_type_sums.
    """
    qq = q * q
    ssize = L * qq
    ncells = a * a

    stb = np.zeros((ncells, ssize), np.int64)
    stt = np.zeros((ncells, ssize), np.int64)
    cs = np.zeros(ncells, np.int64)
    used = np.zeros(ncells, np.int64)
    mg = np.zeros(ncells, np.int64)
    f_off = np.zeros(ncells, np.int64)
    f_u = np.zeros(ncells, np.int64)
    f_v = np.zeros(ncells, np.int64)
    scr_b = np.empty(ssize, np.int64)
    scr_t = np.empty(ssize, np.int64)
    cum = np.empty(qq, np.int64)

    stb[0, 0] = 1
    stt[0, 0] = 1
    mg[0] = 1

    d = 0
    while d >= 0:
        if d < ncells - 1:
            nd = d + 1
            for i in range(ssize):
                stb[nd, i] = stb[d, i]
                stt[nd, i] = stt[d, i]
            cs[nd] = 0
            used[nd] = used[d]
            mg[nd] = mg[d]
            f_off[nd] = f_off[d]
            f_u[nd] = f_u[d]
            f_v[nd] = f_v[d]
            d = nd
            continue

        # Leaf: the last cell absorbs all remaining coordinates.
        r = n - used[d]
        u = d // a
        v = d % a
        m = mg[d]
        for i in range(ssize):
            scr_b[i] = stb[d, i]
            scr_t[i] = stt[d, i]
        for j in range(1, r + 1):
            if do_b:
                _apply_pair(scr_b, q, L, u, v, False)
            if do_t:
                _apply_pair(scr_t, q, L, u, v, True)
            m = m * (used[d] + j) // j
        off = f_off[d]
        fu = f_u[d]
        fv = f_v[d]
        if r > 0:
            if u != v:
                off = 1
            if u != 0:
                fu = 1
            if v != 0:
                fv = 1

        if fu == 1 and fv == 1 and off == 1:
            for kind in range(2):
                if kind == 0:
                    if not do_b:
                        continue
                    st = scr_b
                    Hs = Hb
                else:
                    if not do_t:
                        continue
                    st = scr_t
                    Hs = Ht
                for i in range(qq):
                    cum[i] = st[i]
                for l in range(1, L):
                    base = l * qq
                    H = Hs[l]
                    s_tv = np.int64(0)
                    s_pe = np.int64(0)
                    for i in range(qq):
                        cum[i] += st[base + i]
                        dlt = cum[i] * qq - H
                        if dlt < 0:
                            s_tv -= dlt
                        else:
                            s_tv += dlt
                        s_pe += dlt * dlt
                    _acc_add(acc, kind, l, 0, m * s_tv * s_tv)
                    _acc_add(acc, kind, l, 1, m * s_pe)

        # Backtrack, then advance the deepest cell that can take one more.
        d -= 1
        while d >= 0:
            if used[d] < n:
                u = d // a
                v = d % a
                cs[d] += 1
                if do_b:
                    _apply_pair(stb[d], q, L, u, v, False)
                if do_t:
                    _apply_pair(stt[d], q, L, u, v, True)
                used[d] += 1
                mg[d] = mg[d] * used[d] // cs[d]
                if u != v:
                    f_off[d] = 1
                if u != 0:
                    f_u[d] = 1
                if v != 0:
                    f_v[d] = 1
                break
            d -= 1


@njit(cache=True, nogil=True)
def diag_type_sums(q, a, n, L, do_b, do_t, Hb, Ht, acc):
    """Accumulate per-l diagonal (x = x') epsilon numerators over vector types.

    Same conventions as pair_type_sums but over single-vector types u in
    [0, a)^n with marginal output counts M(y); added values are
        tv:       m * (sum_y |M*q - H|)^2
        pearson:  m * (sum_y (M*q - H)^2)
    Types supported only on u = 0 (the excluded zero vector) are skipped.
    """
    ssize = L * q
    ncells = a

    stb = np.zeros((ncells, ssize), np.int64)
    stt = np.zeros((ncells, ssize), np.int64)
    cs = np.zeros(ncells, np.int64)
    used = np.zeros(ncells, np.int64)
    mg = np.zeros(ncells, np.int64)
    f_u = np.zeros(ncells, np.int64)
    scr_b = np.empty(ssize, np.int64)
    scr_t = np.empty(ssize, np.int64)
    cum = np.empty(q, np.int64)

    stb[0, 0] = 1
    stt[0, 0] = 1
    mg[0] = 1

    d = 0
    while d >= 0:
        if d < ncells - 1:
            nd = d + 1
            for i in range(ssize):
                stb[nd, i] = stb[d, i]
                stt[nd, i] = stt[d, i]
            cs[nd] = 0
            used[nd] = used[d]
            mg[nd] = mg[d]
            f_u[nd] = f_u[d]
            d = nd
            continue

        r = n - used[d]
        u = d
        m = mg[d]
        for i in range(ssize):
            scr_b[i] = stb[d, i]
            scr_t[i] = stt[d, i]
        for j in range(1, r + 1):
            if do_b:
                _apply_diag(scr_b, q, L, u, False)
            if do_t:
                _apply_diag(scr_t, q, L, u, True)
            m = m * (used[d] + j) // j
        fu = f_u[d]
        if r > 0 and u != 0:
            fu = 1

        if fu == 1:
            for kind in range(2):
                if kind == 0:
                    if not do_b:
                        continue
                    st = scr_b
                    Hs = Hb
                else:
                    if not do_t:
                        continue
                    st = scr_t
                    Hs = Ht
                for i in range(q):
                    cum[i] = st[i]
                for l in range(1, L):
                    base = l * q
                    H = Hs[l]
                    s_tv = np.int64(0)
                    s_pe = np.int64(0)
                    for i in range(q):
                        cum[i] += st[base + i]
                        dlt = cum[i] * q - H
                        if dlt < 0:
                            s_tv -= dlt
                        else:
                            s_tv += dlt
                        s_pe += dlt * dlt
                    _acc_add(acc, kind, l, 0, m * s_tv * s_tv)
                    _acc_add(acc, kind, l, 1, m * s_pe)

        d -= 1
        while d >= 0:
            if used[d] < n:
                u = d
                cs[d] += 1
                if do_b:
                    _apply_diag(stb[d], q, L, u, False)
                if do_t:
                    _apply_diag(stt[d], q, L, u, True)
                used[d] += 1
                mg[d] = mg[d] * used[d] // cs[d]
                if u != 0:
                    f_u[d] = 1
                break
            d -= 1
