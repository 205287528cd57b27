"""Exact finite measures: restricted input families, collision statistics, CSV."""

import io
import math
from fractions import Fraction

import pytest

from gradbound.measures import (
    FinitePmf,
    RestrictedInputSpec,
    SizeLimitError,
    collision_entropy,
    collision_probability,
    element_from_str,
    element_to_str,
    pmf_from_csv,
    pmf_to_csv,
    restricted_uniform_inputs,
)


# -- restricted input families ---------------------------------------------


def test_restricted_support_q5_n2_a2():
    pmf = restricted_uniform_inputs(RestrictedInputSpec(5, 2, 2))
    assert set(pmf.domain) == {(0, 1), (1, 0), (1, 1)}
    assert all(w == Fraction(1, 3) for w in pmf.weights)


def test_restricted_support_q3_n1_a3():
    pmf = restricted_uniform_inputs(RestrictedInputSpec(3, 1, 3))
    assert set(pmf.domain) == {(1,), (2,)}
    assert all(w == Fraction(1, 2) for w in pmf.weights)


def test_restricted_support_q5_n3_a2_has_seven_points():
    spec = RestrictedInputSpec(5, 3, 2)
    assert spec.support_size == 7
    pmf = restricted_uniform_inputs(spec)
    assert len(pmf) == 7
    assert (0, 0, 0) not in pmf
    assert all(w == Fraction(1, 7) for w in pmf.weights)
    assert all(all(c in (0, 1) for c in x) for x in pmf.domain)


def test_restricted_support_is_lexicographic_and_deterministic():
    spec = RestrictedInputSpec(7, 2, 3)
    a = restricted_uniform_inputs(spec)
    b = restricted_uniform_inputs(spec)
    assert a.domain == b.domain
    assert list(a.domain) == sorted(a.domain, key=element_key_tuple)


def element_key_tuple(x):
    return tuple(x)


def test_restricted_spec_rejects_composite_q():
    with pytest.raises(ValueError, match="prime"):
        RestrictedInputSpec(4, 2, 2)


def test_restricted_spec_rejects_a_out_of_range():
    with pytest.raises(ValueError):
        RestrictedInputSpec(5, 2, 6)


def test_restricted_spec_rejects_empty_support():
    with pytest.raises(ValueError):
        RestrictedInputSpec(5, 1, 1)  # a=1 gives a^n - 1 = 0 points


def test_restricted_cap_error_names_count():
    with pytest.raises(SizeLimitError, match="117648"):
        restricted_uniform_inputs(RestrictedInputSpec(7, 6, 7), max_points=10 ** 5)


# -- pmf construction and validation -----------------------------------------


def test_pmf_rejects_negative_weight():
    with pytest.raises(ValueError, match="nonnegative"):
        FinitePmf((0, 1), (Fraction(3, 2), Fraction(-1, 2)))


def test_pmf_rejects_wrong_rational_mass():
    with pytest.raises(ValueError, match="mass"):
        FinitePmf((0, 1), (Fraction(1, 2), Fraction(1, 3)))


def test_pmf_rejects_duplicates():
    with pytest.raises(ValueError, match="duplicate"):
        FinitePmf((0, 0), (Fraction(1, 2), Fraction(1, 2)))


def test_pmf_float_mass_tolerance():
    FinitePmf((0, 1), (0.5, 0.5 + 1e-13))  # within tolerance
    with pytest.raises(ValueError, match="mass"):
        FinitePmf((0, 1), (0.5, 0.51))


def test_pmf_uniform_constructor():
    pmf = FinitePmf.uniform([3, 1, 2])
    assert pmf.domain == (1, 2, 3)
    assert pmf.weight(3) == Fraction(1, 3)


# -- collision statistics ----------------------------------------------------


def test_collision_probability_uniform_seven():
    pmf = FinitePmf.uniform(list(range(7)))
    assert collision_probability(pmf) == Fraction(1, 7)


def test_collision_probability_half_quarter_quarter():
    pmf = FinitePmf((0, 1, 2), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    assert collision_probability(pmf) == Fraction(3, 8)


def test_collision_probability_point_mass():
    pmf = FinitePmf((5,), (Fraction(1),))
    assert collision_probability(pmf) == 1


def test_collision_entropy_uniform_is_log_m():
    for m in (2, 5, 12):
        pmf = FinitePmf.uniform(list(range(m)))
        assert collision_entropy(pmf) == pytest.approx(math.log(m), abs=1e-15)


def test_collision_entropy_point_mass_is_zero():
    assert collision_entropy(FinitePmf((0,), (Fraction(1),))) == 0.0


def test_collision_entropy_half_quarter_quarter():
    pmf = FinitePmf((0, 1, 2), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    assert collision_entropy(pmf) == pytest.approx(math.log(Fraction(8, 3)), abs=1e-15)


@pytest.mark.parametrize(
    "weights",
    [
        (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)),
        (Fraction(9, 10), Fraction(1, 20), Fraction(1, 20)),
        (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)),
    ],
)
def test_collision_bounds_and_uniform_equality(weights):
    pmf = FinitePmf((0, 1, 2), weights)
    cp = collision_probability(pmf)
    assert Fraction(0) < cp <= 1
    uniform = all(w == Fraction(1, 3) for w in weights)
    assert (cp == Fraction(1, 3)) == uniform
    ent = collision_entropy(pmf)
    assert ent <= math.log(3) + 1e-15
    assert (abs(ent - math.log(3)) < 1e-15) == uniform


def test_collision_stats_invariant_under_domain_permutation():
    w = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6))
    p1 = FinitePmf(((0, 1), (1, 0), (1, 1)), w)
    p2 = FinitePmf(((1, 1), (0, 1), (1, 0)), (w[2], w[0], w[1]))
    assert collision_probability(p1) == collision_probability(p2)
    assert collision_entropy(p1) == collision_entropy(p2)


# -- element encoding and CSV round trips ------------------------------------


def test_element_string_round_trip():
    for x in (7, (1, 2, 3), (0, 4), "label"):
        assert element_from_str(element_to_str(x)) == x
    # 1-tuples degenerate to their single coordinate under the "|"-joined
    # encoding; they read back as scalars.
    assert element_from_str(element_to_str((5,))) == 5


def test_element_string_rejects_separator_clash():
    with pytest.raises(ValueError, match="clashes"):
        element_to_str("a|b")


def test_csv_round_trip_rational_tuples():
    pmf = restricted_uniform_inputs(RestrictedInputSpec(5, 2, 2))
    buf = io.StringIO()
    pmf_to_csv(pmf, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == "element,weight_num,weight_den"
    back = pmf_from_csv(io.StringIO(text))
    assert back == pmf
    assert back.is_rational


def test_csv_round_trip_float_weights():
    pmf = FinitePmf((0, 1), (0.25, 0.75))
    buf = io.StringIO()
    pmf_to_csv(pmf, buf)
    assert buf.getvalue().splitlines()[0] == "element,weight"
    back = pmf_from_csv(io.StringIO(buf.getvalue()))
    assert not back.is_rational
    assert back.weights == pmf.weights  # repr round trip is exact


def test_csv_file_round_trip(tmp_path):
    pmf = FinitePmf((0, 1, 2), (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)))
    path = tmp_path / "pmf.csv"
    pmf_to_csv(pmf, path)
    assert pmf_from_csv(path) == pmf
