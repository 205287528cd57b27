"""Gradient-variance bounds: loss stats, exact variance, soundness, identities."""

import math
from fractions import Fraction

import numpy as np
import pytest

from gradbound.gradvar import (
    LOSSES,
    ModelSpec,
    encoder_table,
    exact_gradient,
    exact_gradient_variance,
    inversion_identity_check,
    is_sound,
    loss_deriv_stats,
    lwe_variance_bound,
    operator_bound_check,
    simplified_bound,
    tightness_witness,
    variance_bound,
)
from gradbound.hypotheses import HypothesisClass, enumerate_secrets, eval_hypothesis
from gradbound.measures import (
    FinitePmf,
    RestrictedInputSpec,
    restricted_uniform_inputs,
)
from gradbound.pairwise import aggregate_epsilon, uniform_outputs


def constant_model(q, w1=Fraction(0), loss="squared", encoder="raw", support=((1,),)):
    return ModelSpec(
        q=q,
        features={x: (Fraction(1),) for x in support},
        weights=(w1,),
        loss=loss,
        encoder=encoder,
    )


# -- encoders and loss-derivative tables --------------------------------------


def test_encoder_tables():
    assert encoder_table(5, "default") == tuple(Fraction(y, 5) for y in range(5))
    assert encoder_table(3, "raw") == (Fraction(0), Fraction(1), Fraction(2))
    assert encoder_table(3, "centered") == (
        Fraction(-1, 3),
        Fraction(0),
        Fraction(1, 3),
    )
    assert sum(encoder_table(7, "centered")) == 0
    assert encoder_table(2, (Fraction(1, 2), 3)) == (Fraction(1, 2), Fraction(3))
    with pytest.raises(ValueError, match="length"):
        encoder_table(3, (0, 1))
    with pytest.raises(ValueError, match="encoder"):
        encoder_table(3, "onehot")


def test_loss_deriv_stats_squared_raw_q2():
    model = constant_model(2)
    stats = loss_deriv_stats(model, uniform_outputs(2), [(1,)])
    assert stats.r[(1,)] == (Fraction(1), Fraction(-1))
    assert stats.D[(1,)] == 1
    assert stats.M[(1,)] == 1
    assert stats.c[(1,)] == Fraction(-1)  # E[2(0 - y)]


def test_loss_deriv_stats_centering_is_exact():
    model = ModelSpec(
        q=5,
        features={(1, 0): (Fraction(1), Fraction(2)), (0, 1): (Fraction(-1), Fraction(1, 3))},
        weights=(Fraction(1, 2), Fraction(-1, 4)),
    )
    mu_Y = FinitePmf(
        (0, 1, 2, 3, 4),
        (Fraction(1, 2), Fraction(1, 8), Fraction(1, 8), Fraction(1, 8), Fraction(1, 8)),
    )
    stats = loss_deriv_stats(model, mu_Y, list(model.features))
    for x in model.features:
        mean = sum(w * v for w, v in zip(mu_Y.weights, stats.r[x]))
        assert mean == 0
        assert stats.M[x] ** 2 >= stats.D[x]


def test_derivative_independent_of_y_gives_zero_r():
    # a constant encoder makes dL/dp the same for every y
    model = ModelSpec(
        q=3,
        features={(1,): (Fraction(1),)},
        weights=(Fraction(2),),
        encoder=(Fraction(1), Fraction(1), Fraction(1)),
    )
    stats = loss_deriv_stats(model, uniform_outputs(3), [(1,)])
    assert stats.r[(1,)] == (0, 0, 0)
    assert stats.D[(1,)] == 0


def test_sigmoid_loss_derivative_bounded_by_quarter():
    model = constant_model(5, w1=Fraction(1, 3), loss="sigmoid", encoder="default")
    stats = loss_deriv_stats(model, uniform_outputs(5), [(1,)])
    assert stats.M[(1,)] <= 0.25 + 1e-15
    assert not stats.is_rational


def test_losses_registry():
    assert set(LOSSES) == {"squared", "sigmoid"}
    with pytest.raises(ValueError, match="loss"):
        constant_model(3, loss="hinge")


# -- exact gradients and variances -------------------------------------------


def test_exact_gradient_constant_model_is_minus_2k():
    q = 2
    model = constant_model(q)
    mu_X = FinitePmf.uniform([(1,)])
    for k in (0, 1):
        assert exact_gradient(model, (k,), mu_X, 0) == -2 * k


def test_exact_gradient_zero_feature_is_zero():
    model = ModelSpec(
        q=3, features={(1,): (Fraction(0),)}, weights=(Fraction(5),)
    )
    assert exact_gradient(model, (1,), FinitePmf.uniform([(1,)]), 0) == 0


def test_variance_constant_model_is_one():
    model = constant_model(2)
    cls = enumerate_secrets("uniform", 2, 1)
    var = exact_gradient_variance(model, cls, FinitePmf.uniform([(1,)]), 0)
    assert var == 1  # gradients {0, -2} with equal weight


def test_variance_single_secret_is_zero():
    cls = HypothesisClass(kind="binary", q=3, n=2, l=0, secrets=((0, 0),))
    model = ModelSpec(
        q=3,
        features={(1, 0): (Fraction(1),), (0, 1): (Fraction(2),)},
        weights=(Fraction(1, 7),),
    )
    mu_X = FinitePmf.uniform([(1, 0), (0, 1)])
    assert exact_gradient_variance(model, cls, mu_X, 0) == 0


def test_variance_zero_when_r_vanishes():
    model = ModelSpec(
        q=3,
        features={(1,): (Fraction(1),)},
        weights=(Fraction(2),),
        encoder=(Fraction(1), Fraction(1), Fraction(1)),
    )
    cls = enumerate_secrets("uniform", 3, 1)
    assert exact_gradient_variance(model, cls, FinitePmf.uniform([(1,)]), 0) == 0


# -- the general bound -------------------------------------------------------


def test_tightness_witness_variance_equals_bound_exactly():
    model, cls, mu_X, variance, bd = tightness_witness()
    assert variance == 1
    assert bd.bound == 1.0
    assert bd.eps_term == 0.0 and bd.eps_term_sq == 0
    assert bd.gamma == 1
    assert bd.grad_norm_sq == 1
    assert bd.exact
    assert is_sound(variance, bd)
    # and the bound really is attained, not just respected
    assert float(variance) == bd.bound


def test_bound_zero_when_r_vanishes():
    model = ModelSpec(
        q=3,
        features={(1,): (Fraction(1),)},
        weights=(Fraction(2),),
        encoder=(Fraction(1), Fraction(1), Fraction(1)),
    )
    cls = enumerate_secrets("uniform", 3, 1)
    bd = variance_bound(model, cls, FinitePmf.uniform([(1,)]))
    assert bd.bound == 0.0


def test_bound_assembly_identity():
    mu_X = FinitePmf.uniform([(1,), (2,)])
    model = constant_model(3, w1=Fraction(1, 2), support=mu_X.domain)
    cls = enumerate_secrets("uniform", 3, 1)
    for space in ("tv", "pearson"):
        bd = variance_bound(model, cls, mu_X, space_tag=space)
        assert bd.bound == pytest.approx(
            float(bd.grad_norm_sq) * (bd.eps_term + math.sqrt(float(bd.gamma))),
            rel=1e-15,
        )
        assert bd.space_tag == space
        assert bd.grad_norm_sq >= 0 and bd.eps_term >= 0 and bd.gamma >= 0


def random_model(rng, q, support, loss):
    dim = int(rng.integers(1, 4))
    feats = {
        x: tuple(
            Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3)))
            for _ in range(dim)
        )
        for x in support
    }
    weights = tuple(
        Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3)))
        for _ in range(dim)
    )
    encoder = ("default", "raw", "centered")[int(rng.integers(0, 3))]
    return ModelSpec(q=q, features=feats, weights=weights, loss=loss, encoder=encoder)


def test_soundness_on_randomized_instances():
    rng = np.random.default_rng(20260814)
    checked = 0
    for q in (2, 3, 5):
        kinds = ("uniform", "binary") if q == 2 else ("uniform", "binary", "ternary")
        for n in (1, 2):
            for a in range(2, q + 1):
                for kind in kinds:
                    l = None if kind == "uniform" else min(n, 2)
                    cls = enumerate_secrets(kind, q, n, l)
                    mu_X = restricted_uniform_inputs(RestrictedInputSpec(q, n, a))
                    for loss in LOSSES:
                        spaces = ("tv",) if q == 2 else ("tv", "pearson")
                        model = random_model(rng, q, mu_X.domain, loss)
                        var = exact_gradient_variance(model, cls, mu_X, 0)
                        for space in spaces:
                            bd = variance_bound(model, cls, mu_X, space_tag=space)
                            assert is_sound(var, bd), (q, n, a, kind, loss, space)
                            checked += 1
    assert checked >= 100


def test_pearson_bound_specializes_below_restricted_input_bound():
    # constant-feature model, full uniform secrets, a = q: the assembled
    # pearson bound sits below the closed-form restricted-input bound with
    # the matched derivative statistic sqrt(E[D_X^2])
    rng = np.random.default_rng(7)
    for q in (3, 5):
        for n in (1, 2):
            spec = RestrictedInputSpec(q, n, q)
            mu_X = restricted_uniform_inputs(spec)
            cls = enumerate_secrets("uniform", q, n)
            for _ in range(3):
                w1 = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
                model = constant_model(q, w1=w1, encoder="default", support=mu_X.domain)
                bd = variance_bound(model, cls, mu_X, space_tag="pearson")
                stats = loss_deriv_stats(model, uniform_outputs(q), list(mu_X.domain))
                d_root = math.sqrt(
                    sum(float(w) * float(stats.D[x]) ** 2 for x, w in mu_X.items())
                )
                closed = lwe_variance_bound(q, n, q, float(bd.grad_norm_sq), d_root)
                assert bd.bound <= closed * (1 + 1e-12)


# -- the simplified bracket --------------------------------------------------


def test_simplified_bracket_pairwise_independent_class():
    # affine family: eps vanishes on all pairs, so only the collision term is left
    q = 5
    cls = enumerate_secrets("uniform", q, 2)
    mu_X = FinitePmf.uniform([(x, 1) for x in range(q)])
    model = constant_model(q, support=mu_X.domain)
    bracket = simplified_bound(model, cls, mu_X)
    assert bracket == pytest.approx(math.sqrt(1 / 5), rel=1e-12)


def test_simplified_bracket_cross_module():
    q, n, a = 3, 2, 3
    spec = RestrictedInputSpec(q, n, a)
    mu_X = restricted_uniform_inputs(spec)
    cls = enumerate_secrets("uniform", q, n)
    model = constant_model(q, support=mu_X.domain)
    bracket = simplified_bound(model, cls, mu_X)
    rep = aggregate_epsilon(cls, spec, space="tv")
    expected = math.sqrt(float(rep.epsilon_sq)) + math.sqrt(float(rep.collision_prob))
    assert bracket == pytest.approx(expected, rel=1e-12)


# -- restricted-input closed-form bound ---------------------------------------


def test_restricted_bound_example_q5_a2_n3():
    s, d = 1.7, 0.4
    expected = s * d * (math.sqrt(18) + 1) / math.sqrt(7)
    assert lwe_variance_bound(5, 3, 2, s, d) == pytest.approx(expected, rel=1e-15)


def test_restricted_bound_rejects_q2_and_bad_ranges():
    with pytest.raises(ValueError, match="q >= 3"):
        lwe_variance_bound(2, 3, 2, 1.0, 1.0)
    with pytest.raises(ValueError, match="prime"):
        lwe_variance_bound(9, 3, 2, 1.0, 1.0)
    with pytest.raises(ValueError, match="a must"):
        lwe_variance_bound(5, 3, 6, 1.0, 1.0)
    with pytest.raises(ValueError):
        lwe_variance_bound(5, 0, 2, 1.0, 1.0)


def test_restricted_bound_scaling_algebra():
    # doubling n at fixed a multiplies the factor by ~ a^(-n/2)
    q, a = 7, 3
    b1 = lwe_variance_bound(q, 4, a, 1.0, 1.0)
    b2 = lwe_variance_bound(q, 8, a, 1.0, 1.0)
    assert b2 / b1 == pytest.approx(
        math.sqrt((a ** 4 - 1) / (a ** 8 - 1)), rel=1e-12
    )
    # a = q, large n: factor tracks q^(-n/2+1) scale
    q = 5
    for n in (6, 8, 10):
        factor = lwe_variance_bound(q, n, q, 1.0, 1.0)
        scale = q ** (-n / 2 + 1)
        assert 0.5 < factor / scale < 8


def test_restricted_bound_monotone_in_a():
    vals = [lwe_variance_bound(7, 3, a, 2.0, 1.5) for a in range(2, 8)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


# -- exact identities --------------------------------------------------------


def centered_g_table(rng, q, support):
    g = {}
    for x in support:
        vals = [Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(q)]
        mean = sum(vals, Fraction(0)) / q
        for y in range(q):
            g[(x, y)] = vals[y] - mean
    return g


def test_inversion_identity_residual_is_exactly_zero():
    rng = np.random.default_rng(11)
    cls = enumerate_secrets("binary", 3, 2, 1)
    mu_X = restricted_uniform_inputs(RestrictedInputSpec(3, 2, 3))
    for _ in range(5):
        g = centered_g_table(rng, 3, mu_X.domain)
        assert inversion_identity_check(cls, mu_X, g) == 0


def test_inversion_identity_zero_g():
    cls = enumerate_secrets("uniform", 3, 1)
    mu_X = FinitePmf.uniform([(1,), (2,)])
    g = {((x,), y): Fraction(0) for x in (1, 2) for y in range(3)}
    assert inversion_identity_check(cls, mu_X, g) == 0


def test_inversion_identity_single_hypothesis():
    cls = HypothesisClass(kind="binary", q=3, n=1, l=0, secrets=((1,),))
    mu_X = FinitePmf.uniform([(1,), (2,)])
    rng = np.random.default_rng(5)
    g = centered_g_table(rng, 3, mu_X.domain)
    assert inversion_identity_check(cls, mu_X, g) == 0


def test_operator_bound_orthogonal_probe():
    # probe orthogonal to every f_h: single zero secret makes f_h(x) = g(x, 0)
    cls = HypothesisClass(kind="binary", q=3, n=1, l=0, secrets=((0,),))
    mu_X = FinitePmf.uniform([(1,), (2,)])
    g = {((1,), 0): Fraction(1), ((2,), 0): Fraction(-1)}
    for y in (1, 2):
        g[((1,), y)] = Fraction(0)
        g[((2,), y)] = Fraction(0)
    probe = {(1,): Fraction(1), (2,): Fraction(1)}  # <f, probe> = (1 - 1)/2 = 0
    chk = operator_bound_check(cls, mu_X, g, probe)
    assert chk.lhs == 0
    assert chk.holds()


def test_operator_bound_equality_for_single_hypothesis():
    cls = HypothesisClass(kind="binary", q=3, n=1, l=0, secrets=((0,),))
    mu_X = FinitePmf.uniform([(1,), (2,)])
    g = {((1,), 0): Fraction(2), ((2,), 0): Fraction(-1)}
    for y in (1, 2):
        g[((1,), y)] = Fraction(0)
        g[((2,), y)] = Fraction(0)
    probe = {(1,): Fraction(2), (2,): Fraction(-1)}  # probe = f_h itself
    chk = operator_bound_check(cls, mu_X, g, probe)
    assert chk.holds()
    assert chk.lhs == pytest.approx(chk.rhs, rel=1e-15)


def test_operator_bound_random_probes_never_violate():
    rng = np.random.default_rng(3)
    cls = enumerate_secrets("binary", 3, 2, 1)
    mu_X = restricted_uniform_inputs(RestrictedInputSpec(3, 2, 3))
    g = centered_g_table(rng, 3, mu_X.domain)
    for _ in range(50):
        probe = {
            x: Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
            for x in mu_X.domain
        }
        assert operator_bound_check(cls, mu_X, g, probe).holds()
