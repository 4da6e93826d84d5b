from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from graphcodes import gf2
from graphcodes.chainmap import (
    AlreadyStabilizer, ChainComplex3, ChainMap3, ChainMapError, CommutesWithAll,
    css_to_complex, measure_x_product, measure_z_product, random_css, stabsim_cross_check,
    steane_code, toric_fixture, triangle_code, verify_chain_map,
)
from graphcodes.gf2 import BitMatrix


def anticommuting_words(css, weight=None):
    """Every X support (optionally of fixed weight) that is not a stabilizer and hits some Z check."""
    n = css.n
    for word in range(1, 1 << n):
        if weight is not None and bin(word).count("1") != weight:
            continue
        if gf2.in_span(word, css.hx.rows):
            continue
        if any(gf2.dot(r, word) for r in css.hz.rows):
            yield word


def check_measurement(css, word, policy="solve"):
    c = css_to_complex(css)
    target, f, data = measure_x_product(c, word, preimage=policy)
    report = verify_chain_map(c, target, f, data)
    return c, target, f, data, report


def test_fixture_dimensions():
    assert css_to_complex(triangle_code()).dims == (3, 3, 1)
    assert css_to_complex(toric_fixture(2)).dims == (4, 8, 4)
    assert css_to_complex(steane_code()).dims == (3, 7, 3)


def test_triangle_measurement():
    c, target, f, data, report = check_measurement(triangle_code(), [0, 1])
    assert data.v_index == 1
    assert report.squares_ok
    assert (report.z_rank_delta, report.x_rank_delta) == (-1, 1)
    assert report.measurement_ranks_ok
    assert report.kills_v
    assert target.dims == (2, 3, 2)
    check = stabsim_cross_check(triangle_code(), [0, 1], random.Random(0))
    assert check.kind == "anticommuting" and check.matches
    assert check.pre_rank == check.post_rank


def test_triangle_face_is_already_a_stabilizer():
    with pytest.raises(AlreadyStabilizer):
        measure_x_product(css_to_complex(triangle_code()), [0, 1, 2])
    check = stabsim_cross_check(triangle_code(), [0, 1, 2], random.Random(1))
    assert check.kind == "stabilizer" and check.deterministic and check.matches


def test_logical_operator_commutes_with_all():
    css = toric_fixture(2)
    word = next(w for w in range(1, 1 << css.n)
                if not gf2.in_span(w, css.hx.rows) and not any(gf2.dot(r, w) for r in css.hz.rows))
    with pytest.raises(CommutesWithAll):
        measure_x_product(css_to_complex(css), word)
    check = stabsim_cross_check(css, word, random.Random(2))
    assert check.kind == "logical" and check.matches
    assert check.post_rank == check.pre_rank + 1


def test_support_out_of_range():
    with pytest.raises(ChainMapError):
        measure_x_product(css_to_complex(triangle_code()), 1 << 3)
    with pytest.raises(ChainMapError):
        measure_x_product(css_to_complex(triangle_code()), [0, 1], preimage="other")


@pytest.mark.parametrize("policy", ["solve", "basis"])
def test_steane_weight_four_measurements(policy):
    css = steane_code()
    words = list(anticommuting_words(css, weight=4))
    rng = random.Random(3)
    picks = [rng.choice(words) for _ in range(100)]
    for word in picks:
        _, _, _, _, report = check_measurement(css, word, policy)
        assert report.squares_ok, (word, report)
        assert report.measurement_ranks_ok
        assert report.kills_v


def test_steane_cross_check_all_weight_four():
    css = steane_code()
    rng = random.Random(4)
    for word in anticommuting_words(css, weight=4):
        assert stabsim_cross_check(css, word, rng).matches


@pytest.mark.parametrize("seed", range(20))
def test_random_css_codes(seed):
    rng = random.Random(seed)
    n = rng.randint(4, 9)
    css = random_css(n, rng.randint(1, 4), rng.randint(1, 3), rng)
    c = css_to_complex(css)
    for word in list(anticommuting_words(css))[:15]:
        for policy in ("solve", "basis"):
            target, f, data = measure_x_product(c, word, preimage=policy)
            report = verify_chain_map(c, target, f, data)
            assert report.squares_ok
            assert report.x_rank_delta == 1
            assert report.kills_v
        assert stabsim_cross_check(css, word, rng).matches


def test_mutated_map_is_located():
    c, target, f, data, report = check_measurement(steane_code(), 0b0001111)
    assert report.squares_ok
    rows = list(f.fQ.rows)
    rows[0] ^= 1  # flip fQ[0, 0]
    broken = ChainMap3(f.fZ, BitMatrix.from_rows(rows, f.fQ.ncols), f.fX)
    bad = verify_chain_map(c, target, broken)
    assert not bad.squares_ok
    assert bad.q_square_failures or bad.z_square_failures
    assert all(i < target.dQ.nrows for i, _ in bad.q_square_failures)


def test_identity_map_is_a_chain_map():
    c = css_to_complex(toric_fixture(2))
    report = verify_chain_map(c, c, ChainMap3.identity(c))
    assert report.squares_ok and report.z_rank_delta == 0 and report.kills_v is None


def test_shape_mismatch_rejected():
    c = css_to_complex(triangle_code())
    d = css_to_complex(steane_code())
    with pytest.raises(ChainMapError):
        verify_chain_map(c, d, ChainMap3.identity(c))


def test_complex_validation():
    with pytest.raises(ChainMapError):
        ChainComplex3(BitMatrix.from_lists([[1], [1]]), BitMatrix.from_lists([[1, 0]]))
    with pytest.raises(ChainMapError):
        ChainComplex3(BitMatrix.from_lists([[1], [1]]), BitMatrix.from_lists([[1, 0, 0]]))


def test_text_round_trip_and_dual():
    c = css_to_complex(steane_code())
    assert ChainComplex3.from_text(c.to_text()) == c
    assert c.dual().dual() == c
    assert c.dual().dims == (3, 7, 3)
    with pytest.raises(ChainMapError):
        ChainComplex3.from_text("dims 1 2 1\ndZ\n1\ndQ\n11\n")


def test_z_product_on_dual():
    c = css_to_complex(steane_code())
    target, f, data = measure_z_product(c, 0b0001111)
    assert verify_chain_map(c.dual(), target, f, data).squares_ok


def test_basis_dependent_fZ_drops_chosen_generator():
    c, target, f, data, _ = check_measurement(steane_code(), 0b0001111)
    dep = data.fZ_basis_dependent
    assert dep.nrows == 2 and dep.ncols == 3
    assert dep.apply(1 << data.v_index).is_zero()
    assert gf2.solve(c.dZ, data.v).word == data.preimage.word


def test_toric_plaquette_is_stabilizer():
    css = toric_fixture(2)
    check = stabsim_cross_check(css, css.hx.rows[0], random.Random(5))
    assert check.kind == "stabilizer" and check.matches


def test_cross_check_size_limit():
    with pytest.raises(ChainMapError):
        stabsim_cross_check(toric_fixture(3), [0], random.Random(0))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40)
def test_measurement_commutes_property(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 8)
    css = random_css(n, rng.randint(1, 3), rng.randint(0, 2), rng)
    words = list(anticommuting_words(css))
    if not words:
        return
    word = rng.choice(words)
    c = css_to_complex(css)
    target, f, data = measure_x_product(c, word)
    report = verify_chain_map(c, target, f, data)
    assert report.squares_ok and report.kills_v and report.x_rank_delta == 1
