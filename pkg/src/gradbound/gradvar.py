"""Gradient-variance bounds and their brute-force certification.

The model family is deliberately linear in the weights: p(w, x) = sum_j w_j
phi_j(x) over a finite input support, so dp/dw_i(x) = phi_i(x) exactly and no
autodiff is needed.  Two loss shapes are supported:

* ``squared``  (squared-with-encoder):      L(p, y) = (p - enc(y))^2,
  dL/dp = 2 (p - enc(y)) -- exact rationals end to end;
* ``sigmoid``  (bounded-sigmoid-of-error):  L(p, y) = s(p - enc(y)) with the
  logistic s, dL/dp = s'(p - enc(y)) in (0, 1/4] -- float path.

For a secret class H with h ~ uniform(H), the certified inequality is

    Var_h[ d/dw_i E_{X~mu_X} L(p(w,X), h(X)) ]
        <= ||phi_i||^2_{mu_X} * ( eps_term + sqrt(gamma) )

with eps_term = sqrt( E_{(X,X')~mu_X^2}[ eps_F(X,X')^2 ||phi_{X,X'}||^2 ] ),
gamma = sum_x mu(x)^2 (||phi_x|| eps_F(x,x) + D_x)^2, and the norms

    tv:       ||phi_{x,x'}|| = M_x M_x'      ||phi_x|| = M_x^2
    pearson:  ||phi_{x,x'}|| = sqrt(D_x D_x') ||phi_x|| = sqrt(E_Y[r^4])

where r(x, y) = dL/dp - E_{Y~mu_Y}[dL/dp] is the centered loss derivative,
D_x = E_Y[r^2], M_x = max_y |r|.  The exact variance is computed by full
enumeration of the class (two-pass), and soundness variance <= bound is
decided exactly on rationals whenever every ingredient is rational (tv space
with the squared loss); the float fallback allows 1e-9 relative slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np

from .exactmath import frac_sqrt_float, le_scaled_sqrt, le_sqrt_sum
from .hypotheses import HypothesisClass, eval_hypothesis
from .measures import FinitePmf, SizeLimitError
from .pairwise import SPACES, _output_weights, uniform_outputs

Rational = Union[int, Fraction]
Number = Union[Fraction, float]

LOSSES = ("squared", "sigmoid")
_LOSS_ALIASES = {
    "squared": "squared",
    "squared-with-encoder": "squared",
    "sigmoid": "sigmoid",
    "bounded-sigmoid-of-error": "sigmoid",
}

FLOAT_REL_SLACK = 1e-9
FLOAT_ABS_SLACK = 1e-12

__all__ = [
    "LOSSES",
    "ModelSpec",
    "LossDerivStats",
    "BoundBreakdown",
    "encoder_table",
    "loss_deriv_stats",
    "exact_gradient",
    "exact_gradient_variance",
    "variance_bound",
    "simplified_bound",
    "lwe_variance_bound",
    "inversion_identity_check",
    "operator_bound_check",
    "OperatorCheck",
    "is_sound",
    "tightness_witness",
]


def encoder_table(q: int, encoder: Union[str, Sequence[Rational]] = "default"):
    """Encoder enc: Z_q -> rationals.  'default' is y/q (range [0,1)),
    'raw' is y itself, 'centered' is (2y - q + 1)/(2q)."""
    if isinstance(encoder, str):
        if encoder == "default":
            return tuple(Fraction(y, q) for y in range(q))
        if encoder == "raw":
            return tuple(Fraction(y) for y in range(q))
        if encoder == "centered":
            return tuple(Fraction(2 * y - q + 1, 2 * q) for y in range(q))
        raise ValueError(f"unknown encoder {encoder!r}")
    enc = tuple(Fraction(v) for v in encoder)
    if len(enc) != q:
        raise ValueError(f"encoder table must have length q={q}")
    return enc


@dataclass(frozen=True)
class ModelSpec:
    """Linear-in-weights model over a finite input support.

    features maps each input x to the tuple (phi_1(x), ..., phi_N(x));
    weights is the length-N weight vector; loss selects the derivative shape;
    encoder is the enc: Z_q -> R table (see encoder_table).
    """

    q: int
    features: Mapping[tuple, tuple]
    weights: tuple
    loss: str = "squared"
    encoder: Union[str, tuple] = "default"

    def __post_init__(self) -> None:
        loss = _LOSS_ALIASES.get(self.loss)
        if loss is None:
            raise ValueError(
                f"unknown loss {self.loss!r}; expected one of "
                f"{sorted(set(_LOSS_ALIASES))}"
            )
        object.__setattr__(self, "loss", loss)
        npar = len(self.weights)
        if npar == 0:
            raise ValueError("model needs at least one weight")
        for x, row in self.features.items():
            if len(row) != npar:
                raise ValueError(
                    f"feature row for {x} has length {len(row)}, expected {npar}"
                )
        object.__setattr__(self, "encoder", encoder_table(self.q, self.encoder))

    @property
    def n_par(self) -> int:
        return len(self.weights)

    def prediction(self, x: tuple) -> Rational:
        row = self.features[x]
        return sum((w * f for w, f in zip(self.weights, row)), Fraction(0))

    def feature(self, x: tuple, i: int) -> Rational:
        return self.features[x][i]

    @property
    def is_rational(self) -> bool:
        if self.loss != "squared":
            return False
        vals = list(self.weights)
        for row in self.features.values():
            vals.extend(row)
        return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in vals)

    def loss_derivative(self, p: Number, y: int) -> Number:
        """dL/dp at prediction p and output y."""
        e = p - self.encoder[y]
        if self.loss == "squared":
            return 2 * e
        t = float(e)
        if t >= 0:
            s = 1.0 / (1.0 + math.exp(-t))
        else:
            z = math.exp(t)
            s = z / (1.0 + z)
        d = s * (1.0 - s)
        if not math.isfinite(d):
            raise ValueError(f"non-finite loss derivative at p={p}, y={y}")
        return d


@dataclass(frozen=True)
class LossDerivStats:
    """Per-input tables of the centered loss derivative r(x, y) and moments.

    r[x] is the tuple over y in Z_q; D[x] = E_Y[r^2]; M[x] = max_y |r|;
    c[x] = E_Y[dL/dp].  M_x^2 >= D_x always (asserted exactly on rationals);
    M_x >= sqrt(D_x) is the same fact and no float root is used to check it.
    """

    r: Mapping[tuple, tuple]
    D: Mapping[tuple, Number]
    M: Mapping[tuple, Number]
    c: Mapping[tuple, Number]
    fourth: Mapping[tuple, Number]
    is_rational: bool


def loss_deriv_stats(
    model: ModelSpec, mu_Y: FinitePmf, support: Sequence[tuple]
) -> LossDerivStats:
    """Centered loss-derivative tables over the given support."""
    q = model.q
    p_y = _output_weights(mu_Y, q)
    rational = model.is_rational and mu_Y.is_rational
    r: dict = {}
    D: dict = {}
    M: dict = {}
    c: dict = {}
    fourth: dict = {}
    for x in support:
        pred = model.prediction(x)
        derivs = [model.loss_derivative(pred, y) for y in range(q)]
        if not rational:
            derivs = [float(d) for d in derivs]
            if any(not math.isfinite(d) for d in derivs):
                raise ValueError(f"non-finite loss derivative at x={x}")
        mean = sum(w * d for w, d in zip(p_y, derivs))
        row = tuple(d - mean for d in derivs)
        resid = sum(w * v for w, v in zip(p_y, row))
        if rational:
            assert resid == 0, "exact centering failed on rational inputs"
        else:
            assert abs(resid) <= 1e-12, f"centering residual {resid} too large"
        d2 = sum(w * v * v for w, v in zip(p_y, row))
        d4 = sum(w * v * v * v * v for w, v in zip(p_y, row))
        m = max(abs(v) for v in row)
        assert m * m >= d2, "M_x^2 >= D_x must hold"
        r[x] = row
        D[x] = d2
        M[x] = m
        c[x] = mean
        fourth[x] = d4
    return LossDerivStats(r=r, D=D, M=M, c=c, fourth=fourth, is_rational=rational)


def exact_gradient(
    model: ModelSpec, h: tuple, mu_X: FinitePmf, i: int
) -> Number:
    """d/dw_i E_{X~mu_X}[L(p(w,X), h(X))] for one secret h, exactly."""
    total: Number = Fraction(0)
    for x, w in mu_X.items():
        y = eval_hypothesis(h, x, model.q)
        total += w * model.loss_derivative(model.prediction(x), y) * model.feature(x, i)
    return total


def exact_gradient_variance(
    model: ModelSpec,
    cls: HypothesisClass,
    mu_X: FinitePmf,
    i: int,
    max_secrets: int = 2 * 10 ** 6,
) -> Number:
    """Population variance over h ~ uniform(class) of exact_gradient.

    Two passes: mean first, then centered second moment.  Exact rationals on
    the rational path; compensated float summation otherwise.
    """
    if cls.size > max_secrets:
        raise SizeLimitError(
            f"variance enumeration over {cls.size} secrets exceeds the cap "
            f"{max_secrets}"
        )
    grads = [exact_gradient(model, h, mu_X, i) for h in cls.secrets]
    H = cls.size
    if model.is_rational and mu_X.is_rational:
        mean = sum(grads, Fraction(0)) / H
        return sum(((g - mean) ** 2 for g in grads), Fraction(0)) / H
    gf = [float(g) for g in grads]
    mean = math.fsum(gf) / H
    return math.fsum((g - mean) ** 2 for g in gf) / H


# -- the general bound ----------------------------------------------------


@dataclass(frozen=True)
class BoundBreakdown:
    """Term-by-term assembly of the variance bound.

    bound = grad_norm_sq * (eps_term + sqrt(gamma)); eps_term_sq and gamma
    are kept exact (Fractions) on the rational path so soundness can be
    decided without float roots.
    """

    grad_norm_sq: Number
    eps_term: float
    gamma: Number
    bound: float
    space_tag: str
    eps_term_sq: Number
    exact: bool

    def __post_init__(self) -> None:
        if self.grad_norm_sq < 0 or self.eps_term < 0 or self.gamma < 0:
            raise ValueError("bound terms must be nonnegative")


@lru_cache(maxsize=128)
def _pair_epsilon_table(cls: HypothesisClass, support: tuple, q: int):
    """Integer deficit numerators for every unordered support pair.

    Returns (S_tv, S_pe, T_tv, T_pe, H): off-diagonal tables indexed [i][j]
    (i <= j) with s_tv = sum |N q^2 - H| and s_pe = sum (N q^2 - H)^2 over
    the q x q joint counts N, plus diagonal tables t_tv = sum_y |M q - H|,
    t_pe = sum (M q - H)^2 over marginal counts M.  eps_tv = s_tv/(H q^2),
    eps_pe^2 = s_pe/(H^2 q^2); diagonals divide by (H q) and (H^2 q).
    """
    K = np.asarray(cls.secrets, dtype=np.int64).reshape(cls.size, cls.n)
    X = np.asarray(support, dtype=np.int64).T  # n x S
    Y = (K @ X) % q  # H x S
    H = cls.size
    S = len(support)
    qq = q * q
    s_tv = {}
    s_pe = {}
    t_tv = {}
    t_pe = {}
    for ii in range(S):
        yi = Y[:, ii]
        mc = np.bincount(yi, minlength=q).astype(np.int64)
        d = mc * q - H
        t_tv[ii] = int(np.abs(d).sum())
        t_pe[ii] = int((d * d).sum())
        for jj in range(ii + 1, S):
            c = np.bincount(yi * q + Y[:, jj], minlength=qq).astype(np.int64)
            d = c * qq - H
            s_tv[(ii, jj)] = int(np.abs(d).sum())
            s_pe[(ii, jj)] = int((d * d).sum())
    return s_tv, s_pe, t_tv, t_pe, H


def variance_bound(
    model: ModelSpec,
    cls: HypothesisClass,
    mu_X: FinitePmf,
    mu_Y: Optional[FinitePmf] = None,
    space_tag: str = "tv",
    i: int = 0,
    max_work: int = 2 * 10 ** 7,
) -> BoundBreakdown:
    """Assemble the general variance bound term by term (see module docs).

    The reference mu_Y defaults to uniform on Z_q.  Diagonal pairs enter
    eps_term through the diagonal deficit and the single-input norm; gamma
    collects the exact diagonal correction sum_x mu(x)^2 (||phi_x|| eps_xx
    + D_x)^2.
    """
    if space_tag not in SPACES:
        raise ValueError(f"unknown space {space_tag!r}; expected one of {SPACES}")
    q = model.q
    mu_Y = uniform_outputs(q) if mu_Y is None else mu_Y
    p_y = _output_weights(mu_Y, q)
    uniform_ref = all(w == Fraction(1, q) for w in p_y)
    if not uniform_ref:
        raise ValueError("variance_bound requires the uniform reference mu_Y")
    support = list(mu_X.domain)
    S = len(support)
    if S * S > max_work:
        raise SizeLimitError(
            f"bound assembly needs {S * S} ordered pairs, exceeding the cap "
            f"{max_work}"
        )
    stats = loss_deriv_stats(model, mu_Y, support)
    rational = stats.is_rational and mu_X.is_rational and space_tag == "tv"

    grad_norm_sq: Number = Fraction(0)
    for x in support:
        f = model.feature(x, i)
        grad_norm_sq += mu_X.weight(x) * f * f
    if not rational:
        grad_norm_sq_f = float(grad_norm_sq)

    s_tv, s_pe, t_tv, t_pe, H = _pair_epsilon_table(cls, tuple(support), q)
    qq = q * q
    mu = [mu_X.weight(x) for x in support]

    if space_tag == "tv":
        norm_pair = [stats.M[x] for x in support]          # M_x (pairs use M_x M_x')
        norm_diag = [stats.M[x] * stats.M[x] for x in support]  # ||phi_x|| = M_x^2
    else:
        norm_pair = [stats.D[x] for x in support]          # pairs use sqrt(D_x D_x')
        norm_diag = [frac_sqrt_float(stats.fourth[x]) for x in support]

    if rational:
        eps_sq: Number = Fraction(0)
        den_off = Fraction(1, (H * qq) ** 2)
        den_diag = Fraction(1, (H * q) ** 2)
        for (ii, jj), s in s_tv.items():
            term = (
                mu[ii] * mu[jj]
                * Fraction(s * s) * den_off
                * (norm_pair[ii] * norm_pair[jj]) ** 2
            )
            eps_sq += 2 * term  # ordered pairs (i,j) and (j,i)
        gamma: Number = Fraction(0)
        for ii in range(S):
            e_diag = Fraction(t_tv[ii], H * q)
            eps_sq += mu[ii] * mu[ii] * e_diag * e_diag * norm_diag[ii] ** 2
            gamma += (mu[ii] * (norm_diag[ii] * e_diag + stats.D[support[ii]])) ** 2
        eps_term = frac_sqrt_float(eps_sq)
        bound = float(grad_norm_sq) * (eps_term + frac_sqrt_float(gamma))
        return BoundBreakdown(
            grad_norm_sq=grad_norm_sq,
            eps_term=eps_term,
            gamma=gamma,
            bound=bound,
            space_tag=space_tag,
            eps_term_sq=eps_sq,
            exact=True,
        )

    # Float path (pearson space and/or sigmoid loss).
    muf = [float(m) for m in mu]
    npair = [float(v) for v in norm_pair]
    ndiag = [float(v) for v in norm_diag]
    terms = []
    if space_tag == "tv":
        for (ii, jj), s in s_tv.items():
            e = s / (H * qq)
            terms.append(2.0 * muf[ii] * muf[jj] * e * e * (npair[ii] * npair[jj]) ** 2)
        diag_eps = [t_tv[ii] / (H * q) for ii in range(S)]
    else:
        for (ii, jj), s in s_pe.items():
            e2 = s / (H * H * qq)
            terms.append(2.0 * muf[ii] * muf[jj] * e2 * npair[ii] * npair[jj])
        diag_eps = [math.sqrt(t_pe[ii] / (H * H * q)) for ii in range(S)]
    gamma_terms = []
    for ii in range(S):
        e = diag_eps[ii]
        terms.append(muf[ii] * muf[ii] * e * e * ndiag[ii] ** 2)
        gamma_terms.append(
            (muf[ii] * (ndiag[ii] * e + float(stats.D[support[ii]]))) ** 2
        )
    eps_sq_f = math.fsum(terms)
    gamma_f = math.fsum(gamma_terms)
    eps_term = math.sqrt(eps_sq_f)
    bound = grad_norm_sq_f * (eps_term + math.sqrt(gamma_f))
    return BoundBreakdown(
        grad_norm_sq=grad_norm_sq_f,
        eps_term=eps_term,
        gamma=gamma_f,
        bound=bound,
        space_tag=space_tag,
        eps_term_sq=eps_sq_f,
        exact=False,
    )


def is_sound(variance: Number, bd: BoundBreakdown) -> bool:
    """Decide variance <= bound, exactly on the rational path.

    Exact criterion: variance / grad_norm_sq <= sqrt(eps_term_sq)
    + sqrt(gamma), resolved with integer arithmetic.  Float path allows
    1e-9 relative slack (the inequality is mathematically strict; slack only
    absorbs roundoff).
    """
    if bd.exact and isinstance(variance, Fraction):
        if bd.grad_norm_sq == 0:
            return variance <= 0
        return le_sqrt_sum(
            Fraction(variance) / Fraction(bd.grad_norm_sq),
            Fraction(bd.eps_term_sq),
            Fraction(bd.gamma),
        )
    v = float(variance)
    return v <= bd.bound * (1 + FLOAT_REL_SLACK) + FLOAT_ABS_SLACK


def simplified_bound(
    model: ModelSpec,
    cls: HypothesisClass,
    mu_X: FinitePmf,
    i: int = 0,
    lipschitz_c: float = 1.0,
    max_work: int = 2 * 10 ** 7,
) -> float:
    """Raw bracket E[eps_F(X,X')^2]^(1/2) + P[X=X']^(1/2) (tv space).

    The full simplified inequality reads Var <= C * E[(dp/dw_i)^2] * bracket
    with a hidden constant C depending on the loss Lipschitz bound; both C
    (hence lipschitz_c) and the gradient factor are deliberately factored
    out, so the return value is the bracket alone and model/i do not enter.
    """
    del model, i, lipschitz_c  # constant and gradient factor not applied
    q = cls.q
    support = list(mu_X.domain)
    S = len(support)
    if S * S > max_work:
        raise SizeLimitError(
            f"bracket assembly needs {S * S} ordered pairs, exceeding the cap "
            f"{max_work}"
        )
    s_tv, _, t_tv, _, H = _pair_epsilon_table(cls, tuple(support), q)
    qq = q * q
    mu = [mu_X.weight(x) for x in support]
    eps_sq = Fraction(0)
    for (ii, jj), s in s_tv.items():
        eps_sq += 2 * mu[ii] * mu[jj] * Fraction(s * s, (H * qq) ** 2)
    for ii in range(S):
        eps_sq += mu[ii] * mu[ii] * Fraction(t_tv[ii] * t_tv[ii], (H * q) ** 2)
    collision = sum((m * m for m in mu), Fraction(0))
    return frac_sqrt_float(eps_sq) + frac_sqrt_float(collision)


def lwe_variance_bound(
    q: int, n: int, a: int, grad_norm_sq: float, d_second_moment_root: float
) -> float:
    """Restricted-input uniform-secret bound:

        grad_norm_sq * d_root * (sqrt((q+1)(q-2)) + 1) * (a^n - 1)^(-1/2).

    Requires prime q >= 3 (the factor sqrt((q+1)(q-2)) degenerates at q = 2)
    and 2 <= a <= q.
    """
    from .exactmath import is_prime

    if q == 2:
        raise ValueError("the restricted-input bound requires q >= 3 (q - 2 > 0)")
    if not is_prime(q) or q < 3:
        raise ValueError(f"q must be an odd prime, got {q}")
    if not 2 <= a <= q:
        raise ValueError(f"a must satisfy 2 <= a <= q, got a={a}, q={q}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if grad_norm_sq < 0 or d_second_moment_root < 0:
        raise ValueError("grad_norm_sq and d_second_moment_root must be >= 0")
    factor = (math.sqrt((q + 1) * (q - 2)) + 1) / math.sqrt(a ** n - 1)
    return grad_norm_sq * d_second_moment_root * factor


# -- identity checks ------------------------------------------------------


def _g_matrix(
    cls: HypothesisClass, support: Sequence[tuple], g_table: Mapping
) -> list:
    """G[h][x] = g(x, h(x)) as exact Fractions."""
    q = cls.q
    rows = []
    for h in cls.secrets:
        rows.append(
            [Fraction(g_table[(x, eval_hypothesis(h, x, q))]) for x in support]
        )
    return rows


def inversion_identity_check(
    cls: HypothesisClass, mu_X: FinitePmf, g_table: Mapping
) -> Fraction:
    """Residual of the inversion identity, exactly zero on rational inputs.

    With f_h(x) = g(x, h(x)) and F(x, x') = E_h[f_h(x) f_h(x')],

        E_{h1,h2}[ <f_h1, f_h2>^2_{mu_X} ]  =  E_{(X,X')~mu_X^2}[ F(X,X')^2 ]

    by expanding both sides over the finite sums (Fubini).  Returns the
    absolute difference as an exact Fraction.
    """
    support = list(mu_X.domain)
    mu = [Fraction(mu_X.weight(x)) for x in support]
    G = _g_matrix(cls, support, g_table)
    H = cls.size
    S = len(support)
    # lhs: mean over (h1, h2) of the squared mu-weighted inner product
    lhs = Fraction(0)
    for i1 in range(H):
        for i2 in range(H):
            ip = Fraction(0)
            for s in range(S):
                ip += mu[s] * G[i1][s] * G[i2][s]
            lhs += ip * ip
    lhs /= H * H
    # rhs: E over pairs of F^2
    rhs = Fraction(0)
    for s1 in range(S):
        for s2 in range(S):
            F = Fraction(0)
            for i1 in range(H):
                F += G[i1][s1] * G[i1][s2]
            F /= H
            rhs += mu[s1] * mu[s2] * F * F
    return abs(lhs - rhs)


class OperatorCheck(NamedTuple):
    """lhs <= rhs certificate for the averaging-operator norm inequality."""

    lhs: Fraction
    rhs: float
    probe_norm_sq: Fraction
    mixed_sq_mean: Fraction

    def holds(self) -> bool:
        """Exact verdict for lhs <= probe_norm_sq * sqrt(mixed_sq_mean)."""
        return le_scaled_sqrt(self.lhs, self.probe_norm_sq, self.mixed_sq_mean)


def operator_bound_check(
    cls: HypothesisClass,
    mu_X: FinitePmf,
    g_table: Mapping,
    probe_g: Mapping,
) -> OperatorCheck:
    """Check E_h[<f_h, probe>^2] <= ||probe||^2 sqrt(E[<f_h1, f_h2>^2]).

    probe_g maps inputs x to probe values.  Both sides are assembled from
    exact rationals; rhs carries the only square root and the verdict
    (OperatorCheck.holds) is decided on integers.
    """
    support = list(mu_X.domain)
    mu = [Fraction(mu_X.weight(x)) for x in support]
    G = _g_matrix(cls, support, g_table)
    probe = [Fraction(probe_g[x]) for x in support]
    H = cls.size
    S = len(support)
    lhs = Fraction(0)
    for i1 in range(H):
        ip = Fraction(0)
        for s in range(S):
            ip += mu[s] * G[i1][s] * probe[s]
        lhs += ip * ip
    lhs /= H
    pns = Fraction(0)
    for s in range(S):
        pns += mu[s] * probe[s] * probe[s]
    mixed = Fraction(0)
    for i1 in range(H):
        for i2 in range(H):
            ip = Fraction(0)
            for s in range(S):
                ip += mu[s] * G[i1][s] * G[i2][s]
            mixed += ip * ip
    mixed /= H * H
    rhs = float(pns) * frac_sqrt_float(mixed)
    return OperatorCheck(lhs=lhs, rhs=rhs, probe_norm_sq=pns, mixed_sq_mean=mixed)


# -- the exact tightness witness ------------------------------------------


def tightness_witness():
    """The q=2 constant-model instance with variance = bound = 1 exactly.

    Uniform secrets on Z_2 (n=1), input support {(1,)}, constant model
    p = w_1 with w_1 = 0, squared loss with the raw encoder enc(y) = y.
    h(1) = k is a fair coin, the per-secret gradients are {0, -2}, so the
    exact variance is 1; the deficit eps(x,x) vanishes (the output marginal
    is exactly uniform), D_x = 1, P[X = X'] = 1, gamma = 1, eps_term = 0,
    and the assembled bound is 1 * (0 + 1) = 1.

    Returns (model, cls, mu_X, variance, breakdown).
    """
    from .hypotheses import enumerate_secrets

    cls = enumerate_secrets("uniform", 2, 1)
    support = ((1,),)
    mu_X = FinitePmf.uniform(support)
    model = ModelSpec(
        q=2,
        features={(1,): (Fraction(1),)},
        weights=(Fraction(0),),
        loss="squared",
        encoder="raw",
    )
    variance = exact_gradient_variance(model, cls, mu_X, 0)
    breakdown = variance_bound(model, cls, mu_X, space_tag="tv", i=0)
    return model, cls, mu_X, variance, breakdown
