from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphcodes import decode as dc
from graphcodes import gf2


def two_edges(p=0.1, q=None):
    q = p if q is None else q
    return dc.CheckGraph(2, ((0, 1), (0, 1)), (p, q), (1,))


def two_class(P):
    # dangling pair at one vertex: the p=0.5 edge hides which class was hit
    return dc.CheckGraph(1, ((0, None), (0, None)), (0.5, P), (1,))


def brute_class_weights(g, s):
    """Per-class total probability of error chains with syndrome s."""
    out = [0.0] * g.n_classes
    for bits in itertools.product((0, 1), repeat=g.n_edges):
        chain = gf2.pack(bits)
        if dc.syndrome(g, chain) != s:
            continue
        w = 1.0
        for b, p in zip(bits, g.probs):
            w *= p if b else 1 - p
        out[g.class_of(chain)] += w
    return out


def brute_failure(g, decoder):
    """Exact failure of a deterministic decoder over every error pattern (ties excluded)."""
    fail = 0.0
    for bits in itertools.product((0, 1), repeat=g.n_edges):
        red = gf2.pack(bits)
        w = 1.0
        for b, p in zip(bits, g.probs):
            w *= p if b else 1 - p
        fail += w * dc.decoder_failure(g, red, decoder(dc.syndrome(g, red)))
    return fail


def test_syndrome_examples():
    g = dc.CheckGraph(3, ((0, 1), (1, 2), (2, None)), (0.1,) * 3)
    assert dc.syndrome(g, 0) == 0
    assert dc.syndrome(g, 0b001) == 0b011
    assert dc.syndrome(g, 0b100) == 0b100


def test_check_graph_validation():
    with pytest.raises(ValueError):
        dc.CheckGraph(2, ((0, 1),), (1.5,))
    with pytest.raises(ValueError):
        dc.CheckGraph(2, ((0, 5),), (0.1,))


def test_sample_errors_limits():
    rng = np.random.default_rng(0)
    g = dc.cycle_graph(6, 0.0)
    assert dc.sample_errors(g, rng) == 0
    g = dc.CheckGraph(6, tuple((i, (i + 1) % 6) for i in range(6)), (1.0,) * 6)
    assert dc.sample_errors(g, rng) == 0b111111


def test_sample_errors_mean_weight():
    g = dc.cycle_graph(20, 0.5)
    batch = dc.sample_errors_batch(g, np.random.default_rng(1), 10000)
    mean = batch.sum(axis=1).mean()
    sigma = math.sqrt(20 * 0.25 / 10000)
    assert abs(mean - 10) <= 3 * sigma


def test_ml_two_parallel_edges():
    g = two_edges()
    r = dc.ml_decode(g, 0)
    assert r.posterior[1] == pytest.approx(1 / 82, abs=1e-12)
    assert r.chosen == 0 and not r.tie
    r = dc.ml_decode(g, 0b11)
    assert r.tie
    assert r.posterior.probs == pytest.approx((0.5, 0.5), abs=1e-12)
    assert dc.syndrome(g, r.blue) == 0b11


def test_zero_probability_edges_drop_out():
    g = two_edges(0.1, 0.0)
    r = dc.ml_decode(g, 0b11)
    # only edge 0 can carry the syndrome, and it crosses the cocycle
    assert r.posterior.probs == pytest.approx((0.0, 1.0))
    assert r.chosen == 1 and r.blue == 0b01


def test_no_matching_chain():
    g = dc.CheckGraph(3, ((0, 1),), (0.1,))
    with pytest.raises(dc.NoMatchingChain):
        dc.ml_decode(g, 0b100)


def test_mwpm_examples():
    g = dc.CheckGraph(3, ((0, 1), (1, 2)), (0.1, 0.1))
    assert dc.mwpm_decode(g, 0b011) == 0b01
    assert dc.mwpm_decode(two_edges(), 0b11) == 0b01


def test_mc_deterministic_when_unique():
    g = dc.CheckGraph(3, ((0, 1), (1, 2)), (0.1, 0.2))
    rng = np.random.default_rng(0)
    assert {dc.mc_decode(g, 0b101, rng) for _ in range(20)} == {0b11}


FIXTURE_GRAPHS = {
    "cycle4": dc.cycle_graph(4, 0.1),
    "pair": two_edges(0.15),
    "star2T2": dc.local_star_graph(2, 2, 0.1),
    "star3T2": dc.local_star_graph(3, 2, 0.08),
    "mixed": dc.CheckGraph(3, ((0, 1), (1, 2), (0, 2), (0, None), (2, None)), (0.1, 0.2, 0.05, 0.1, 0.3), (1 << 3,)),
}


@pytest.mark.parametrize("name", sorted(FIXTURE_GRAPHS))
def test_ml_posterior_matches_brute_force(name):
    g = FIXTURE_GRAPHS[name]
    solver = dc.ExactSolver(g)
    for s in range(1 << g.n_vertices):
        ref = brute_class_weights(g, s)
        if sum(ref) == 0:
            continue
        post = solver.posterior(s)
        assert sum(post.probs) == pytest.approx(1.0, abs=1e-12)
        assert post.probs == pytest.approx([w / sum(ref) for w in ref], abs=1e-12)


@pytest.mark.parametrize("name", sorted(FIXTURE_GRAPHS))
def test_mc_class_frequencies_follow_posterior(name):
    g = FIXTURE_GRAPHS[name]
    solver = dc.ExactSolver(g)
    rng = np.random.default_rng(7)
    s = dc.syndrome(g, dc.sample_errors(g, np.random.default_rng(3)) | 1)
    post = solver.posterior(s)
    n = 10000
    hits = sum(g.class_of(solver.mc_decode(s, rng) ^ solver.ml_decode(s).blue) for _ in range(n))
    # classes relative to the ML representative
    expected = 1 - max(post.probs) if not post.is_tie else 0.5
    sigma = math.sqrt(max(expected * (1 - expected), 1e-4) / n)
    assert abs(hits / n - expected) <= 3 * sigma


@pytest.mark.parametrize("P", [0.1, 0.25, 0.4])
def test_mc_failure_two_class_exact(P):
    assert dc.exact_mc_failure(two_class(P)) == pytest.approx(2 * P * (1 - P), abs=1e-12)
    assert dc.exact_ml_failure(two_class(P)) == pytest.approx(P, abs=1e-12)


@pytest.mark.parametrize("name", ["cycle4", "star2T2", "mixed"])
def test_mwpm_never_beats_ml(name):
    g = FIXTURE_GRAPHS[name]
    mw = brute_failure(g, lambda s: dc.mwpm_decode(g, s))
    assert mw >= dc.exact_ml_failure(g) - 1e-12


@settings(max_examples=40)
@given(st.sampled_from(sorted(FIXTURE_GRAPHS)), st.integers(0, 2 ** 32 - 1))
def test_every_decoder_reproduces_the_syndrome(name, seed):
    g = FIXTURE_GRAPHS[name]
    rng = np.random.default_rng(seed)
    s = dc.syndrome(g, dc.sample_errors(g, rng))
    assert dc.syndrome(g, dc.ml_decode(g, s).blue) == s
    assert dc.syndrome(g, dc.mc_decode(g, s, rng)) == s
    assert dc.syndrome(g, dc.mwpm_decode(g, s)) == s


def test_peierls_examples():
    assert dc.peierls_bound(2, 0.1) == pytest.approx(0.81 / 82 + 0.09 + 0.81 / 82, abs=1e-12)
    assert dc.peierls_bound(2, 0.1) == pytest.approx(0.10976, abs=1e-5)
    assert dc.peierls_bound(0, 0.1) == 0.5


@pytest.mark.parametrize("length", [2, 3, 4])
@pytest.mark.parametrize("p", [0.02, 0.1, 0.3])
def test_peierls_closed_form_matches_enumeration(length, p):
    assert dc.peierls_bound(length, p) == pytest.approx(dc.peierls_exhaustive(length, p), abs=1e-12)


def test_peierls_decreases_with_length():
    for p in (0.01, 0.05, 0.1, 0.2, 0.3, 0.45):
        vals = [dc.peierls_bound(n, p) for n in range(0, 30)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


def test_once_colored_estimates():
    rng = np.random.default_rng(11)
    assert dc.once_colored_probability(dc.cycle_graph(2, 0.0), 0b11, 100, rng)[0] == 0
    est, sigma = dc.once_colored_probability(dc.cycle_graph(2, 0.1), 0b11, 20000, rng)
    assert abs(est - dc.peierls_bound(2, 0.1)) <= 3 * sigma
    est, sigma = dc.once_colored_probability(dc.cycle_graph(4, 0.1), 0b1111, 20000, rng)
    assert est <= dc.peierls_bound(4, 0.1) + 3 * sigma


def test_bulk_graph_counts():
    g = dc.build_bulk_graph(dc.VacancySpec(3, 3))
    assert (g.n_vertices, g.n_edges, len(g.cocycles), len(g.cells)) == (9, 18, 1, 4)
    assert all(b is None or g.coords[a][1] == g.coords[b][1] for a, b in g.edges)
    g = dc.build_bulk_graph(dc.VacancySpec(4, 4, ("periodic",) * 4, T=3))
    assert (g.n_vertices, g.n_edges, len(g.cocycles)) == (48, 128, 2)
    assert not g.hole_centers


def test_bulk_graph_hole_center_degree():
    spec = dc.VacancySpec(5, 5, dead=frozenset({((2, 2), (2, 3))}), T=2)
    g = dc.build_bulk_graph(spec)
    assert (g.n_vertices, g.n_edges, len(g.cocycles)) == (48, 122, 1)
    assert g.hole_centers == frozenset({23})
    # the two-vertex hole has six live lattice neighbours
    for t in range(2):
        v = next(i for i, c in enumerate(g.coords) if c == (23, t))
        spokes = [e for e, (a, b) in enumerate(g.edges) if b is not None and v in (a, b) and g.coords[a][1] == g.coords[b][1]]
        assert len(spokes) == 6


@pytest.mark.parametrize("spec", [dc.VacancySpec(3, 3, T=2), dc.VacancySpec(4, 4, ("periodic",) * 4, T=2),
                                  dc.VacancySpec(5, 5, dead=frozenset({((2, 2), (2, 3))}), T=2)])
def test_bulk_graph_cells_are_closed_and_cocycles_even(spec):
    g = dc.build_bulk_graph(spec)
    for cell in g.cells:
        assert dc.syndrome(g, cell) == 0
        assert all(gf2.dot(cell, c) == 0 for c in g.cocycles)


def test_vacancy_spec_text_round_trip_and_errors():
    spec = dc.VacancySpec(5, 5, dead=frozenset({((2, 2), (2, 3))}), T=2)
    assert dc.VacancySpec.from_text(spec.to_text()) == spec
    with pytest.raises(dc.DecodeError):
        dc.VacancySpec(3, 3, T=0)
    with pytest.raises(dc.DecodeError):
        dc.VacancySpec(3, 3, dead=frozenset({((0, 0), (5, 5))}))


def test_star_transfer_matrix_matches_enumeration():
    for d, T in ((2, 3), (3, 4)):
        g = dc.local_star_graph(d, T, 0.05)
        solver = dc.ExactSolver(g)
        red = dc.sample_errors_batch(g, np.random.default_rng(0), 30)
        tm = dc.star_ml_classes(d, T, 0.05, red)
        for row, probs in zip(red, tm):
            s = dc.syndrome(g, gf2.pack(row.astype(int).tolist()))
            assert probs == pytest.approx(solver.posterior(s).probs, abs=1e-12)


def _planted_path(g, d):
    ns = d + 1
    eid = {e: i for i, e in enumerate(g.edges)}
    return (1 << eid[(ns, ns + 1)]) | (1 << eid[(ns, 2 * ns)]) | (1 << eid[(2 * ns, 2 * ns + 2)])


def test_two_step_decoder_examples():
    g = dc.local_star_graph(4, 4, 0.05)
    dec = dc.TwoStepHoleDecoder(g)
    r = dec.decode(0, np.random.default_rng(0))
    assert r.overall_count == 0 and not r.failed
    red = _planted_path(g, 4)
    for seed in range(3):
        r = dec.decode(red, np.random.default_rng(seed))
        assert r.overall_errors == [0, 0, 1, 0, 0]
        assert not r.failed
    blue, overall, failed = dc.two_step_hole_decoder(g, np.random.default_rng(0), red=red, decoder=dec)
    assert overall == [0, 0, 1, 0, 0] and dc.syndrome(g, blue) == dc.syndrome(g, red)


def test_two_step_decoder_needs_one_hole():
    with pytest.raises(dc.DecodeError):
        dc.TwoStepHoleDecoder(dc.cycle_graph(4, 0.1))


def test_two_step_decoder_not_better_than_ml():
    g = dc.local_star_graph(4, 4, 0.05)
    dec = dc.TwoStepHoleDecoder(g)
    solver = dc.ExactSolver(g)
    rng = np.random.default_rng(5)
    n = 4000
    ts = ml = 0.0
    for _ in range(n):
        red = dc.sample_errors(g, rng)
        r = dec.decode(red, rng)
        ts += 0.5 if r.tie else r.failed
        res = solver.ml_decode(dc.syndrome(g, red))
        ml += 0.5 if res.tie else g.class_of(red ^ res.blue)
    ts, ml = ts / n, ml / n
    sigma = math.sqrt((ts * (1 - ts) + ml * (1 - ml)) / n)
    assert ts >= ml - 3 * sigma
