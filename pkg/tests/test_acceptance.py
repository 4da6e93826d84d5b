"""Acceptance suite: one test per criterion.

Each test evaluates every sub-check before asserting, so a failure message
lists everything that went wrong rather than only the first problem.
Tolerances are module constants.
"""

from __future__ import annotations

import itertools
import math
import random

import numpy as np

from graphcodes import chainmap as cm
from graphcodes import cli
from graphcodes import complex2 as cx
from graphcodes import decode as dc
from graphcodes import effective as ef
from graphcodes import gf2
from graphcodes import ising
from graphcodes import matchcode as mc
from graphcodes.stab import Membership, PauliOperator, StabilizerTableau, kw_schedule, run_and_record, transport

EXACT = 1e-12
SIGMAS = 3.0
COLUMN_SLOPE_REL = 0.10
HOLE_LOG_REL = 0.25
TV_LIMIT = 0.05
ISING_SLOPE_TOL = {"quadratic": 0.3, "linear": 0.3, "constant": 0.2}


def _report(problems):
    assert not problems, "\n".join(map(str, problems))


def _brute_distance(checks, stabs, n):
    for w in range(1, n + 1):
        for idx in itertools.combinations(range(n), w):
            word = gf2.from_support(idx)
            if not checks.apply(word).word and not gf2.in_span(word, stabs.rows):
                return w
    return cx.INFINITY


def _span(rows):
    out = [0]
    for r in rows:
        out += [x ^ r for x in out]
    return out


# 1


def test_criterion_01_rank_formulas():
    problems = []
    for name in mc.FIXTURE_FILES:
        g = mc.load_fixture(name)
        if g.n_V > 18:
            continue
        rq = gf2.rank([c.symplectic for c in mc.all_checks(g)])
        rs = g.n_E - gf2.rank(g.incidence_matrix())
        if not rq == mc.rank_of_Q(g) == g.n_E - 1:
            problems.append((name, "rank Q", rq, g.n_E - 1))
        if not rs == mc.stabilizer_rank(g) == g.n_V // 2 + 1:
            problems.append((name, "rank S", rs, g.n_V // 2 + 1))
    _report(problems)


# 2


def _conforms(g, seq, seed):
    rep = mc.run_matching_schedule(g, seq, 3, random.Random(seed))
    final = rep.steps[-1]
    code = mc.GraphMatchingCode(g, final.matching, final.cycles)
    return rep.final_tableau.same_group(mc.predicted_isg(code))


def test_criterion_02_schedule_isg_conformance():
    # sequences are taken up to graph automorphism; honeycomb_3x3 adds length 4 over its color matchings
    problems = []
    count = 0
    for name in mc.FIXTURE_FILES:
        g = mc.load_fixture(name)
        ms = mc.enumerate_perfect_matchings(g)
        depth = 4 if len(ms) <= 17 else 3
        seqs = [[ms[i] for i in s] for s in mc.sequence_orbit_representatives(g, ms, depth)]
        if depth == 3:
            seqs += [list(s) for s in itertools.product(mc.color_matchings(g), repeat=4)]
        for k, seq in enumerate(seqs):
            count += 1
            try:
                if not _conforms(g, seq, k):
                    problems.append((name, k, "final group differs from predicted_isg"))
            except mc.ConformanceError as err:
                problems.append((name, k, str(err)))
    assert count > 4000
    _report(problems)


# 3


def _x_coset_min_weight(t, op, m):
    """Lightest X string on even qubits equal to op modulo the group (odd X singles are stabilizers)."""
    evens = list(range(0, m, 2))
    for w in range(len(evens) + 1):
        for idx in itertools.combinations(evens, w):
            if t.contains(op * PauliOperator.x_type(m, idx)) is not Membership.ABSENT:
                return w
    return None


def test_criterion_03_kw_transform():
    problems = []
    for m in (4, 6, 8, 10, 12):
        for kind in ("Z", "XX"):
            t = StabilizerTableau(m)
            if kind == "Z":
                ins = [PauliOperator.z_type(m, [(2 * j - 1) % m]) for j in range(1, m // 2 + 1)]
                outs = [PauliOperator.z_type(m, [(2 * j - 2) % m, (2 * j) % m]) for j in range(1, m // 2 + 1)]
            else:
                ins = [PauliOperator.x_type(m, [(2 * j - 1) % m, (2 * j + 1) % m]) for j in range(1, m // 2 + 1)]
                outs = [PauliOperator.x_type(m, [(2 * j) % m]) for j in range(1, m // 2 + 1)]
            for op in ins:
                t.measure(op, forced=1)
            rec = run_and_record(t, kw_schedule(m).ops, random.Random(m))
            for j, (op, want) in enumerate(zip(ins, outs), 1):
                got = transport(op, rec, simplify=True)
                # the prepared +1 eigenvalue must survive with the recorded signs
                if t.contains(got) is not Membership.WITH_SIGN:
                    problems.append((m, kind, j, "sign", got))
                if t.contains(got * want) is Membership.ABSENT:
                    problems.append((m, kind, j, "letters", got, want))
        t = StabilizerTableau(m)
        rec = run_and_record(t, kw_schedule(m).ops, random.Random(m + 1))
        if not transport(PauliOperator.z_type(m, range(1, m, 2)), rec).is_identity():
            problems.append((m, "odd Z product"))
        for j in range(1, m // 2):
            got = transport(PauliOperator.x_type(m, [1, 2 * j + 1]), rec, simplify=True)
            string = PauliOperator.x_type(m, range(2, 2 * j + 1, 2))
            if string.weight != j or t.contains(got * string) is Membership.ABSENT:
                problems.append((m, j, "error not equivalent to a weight-j string", got))
            if _x_coset_min_weight(t, got, m) != min(j, m // 2 - j):
                problems.append((m, j, "coset minimum", _x_coset_min_weight(t, got, m)))
    _report(problems)


# 4


def test_criterion_04_toric_distances():
    problems = []
    for L in (2, 3):
        css = cx.toric_code(cx.torus(L))
        got = (cx.distance_X(css), cx.distance_Z(css), _brute_distance(css.hz, css.hx, css.n),
               _brute_distance(css.hx, css.hz, css.n))
        if got != (L, L, L, L):
            problems.append(("torus", L, got))
    for L in (2, 3):
        base = cx.toric_code(cx.torus(L))
        for ell in (2, 3):
            if base.n * ell > 26:
                continue
            css = cx.toric_code(cx.subdivide_edges(cx.torus(L), ell))
            dx, dz = _brute_distance(css.hz, css.hx, css.n), _brute_distance(css.hx, css.hz, css.n)
            if (dx, dz) != (ell * L, L) or (cx.distance_X(css), cx.distance_Z(css)) != (dx, dz):
                problems.append(("subdivided", L, ell, dx, dz))
    _report(problems)


# 5


def _cut_fixtures():
    out = {"torus2": cx.toric_code(cx.torus(2)), "steane": cm.steane_code()}
    for circ, height in ((2, 2), (2, 3), (3, 2), (2, 4), (3, 3)):
        out[f"cyl{circ}x{height}"] = cx.toric_code(cx.cylinder(circ, height))
    return {k: v for k, v in out.items() if v.n <= 14}


def test_criterion_05_min_cut_equals_lightest_logical():
    problems = []
    checked = 0
    for name, css in _cut_fixtures().items():
        stab_words = _span(css.hz.rows)
        for alpha in _span(css.z_logical_basis())[1:]:
            rep_min = min((alpha ^ s).bit_count() for s in stab_words)
            cut, _ = cx.brute_force_min_cut(css, alpha, cap=14)
            checked += 1
            if cut != rep_min or cx.min_cut_for_logical(css, alpha).size != rep_min:
                problems.append((name, alpha, cut, rep_min))
    assert checked >= 8
    _report(problems)


# 6


def test_criterion_06_short_cycle_witness():
    suite = {
        "torus2": cx.torus(2), "torus3": cx.torus(3),
        "cyl2x3": cx.cylinder(2, 3), "cyl3x2": cx.cylinder(3, 2),
        "torus2/2": cx.subdivide_edges(cx.torus(2), 2), "torus2/3": cx.subdivide_edges(cx.torus(2), 3),
        "torus2/4": cx.subdivide_edges(cx.torus(2), 4), "torus2 tri": cx.triangulate_faces(cx.torus(2)),
    }
    problems = []
    for name, c in suite.items():
        css = cx.toric_code(c)
        bound = 2 * math.sqrt(css.n) + 1
        for s in cx.minimal_cocycles(css):
            w = cx.short_cycle_witness(css, s, cap=32)
            wt = math.inf if w is None else w.weight()
            if min(s.bit_count(), wt) > bound:
                problems.append((name, s, s.bit_count(), wt, bound))
    _report(problems)


# 7


def test_criterion_07_mc_decoder_two_class():
    problems = []
    trials = 100000
    for k, P in enumerate((0.1, 0.25, 0.4)):
        g = dc.CheckGraph(1, ((0, None), (0, None)), (0.5, P), (1,))
        solver = dc.ExactSolver(g)
        rng = np.random.default_rng(70 + k)
        batch = dc.sample_errors_batch(g, rng, trials)
        fails = 0
        for row in batch:
            red = int(row[0]) | (int(row[1]) << 1)
            fails += dc.decoder_failure(g, red, solver.mc_decode(dc.syndrome(g, red), rng))
        rate, want = fails / trials, 2 * P * (1 - P)
        if abs(rate - want) > SIGMAS * math.sqrt(want * (1 - want) / trials):
            problems.append((P, rate, want))
    _report(problems)


# 8


def test_criterion_08_peierls():
    problems = []
    for length in (2, 3, 4):
        for p in (0.01, 0.05, 0.1, 0.2, 0.3, 0.45):
            a, b = dc.peierls_bound(length, p), dc.peierls_exhaustive(length, p)
            if abs(a - b) > EXACT:
                problems.append(("closed form", length, p, a, b))
    rng = np.random.default_rng(8)
    for length in (2, 3, 4):
        for p in (0.05, 0.1, 0.2):
            g = dc.cycle_graph(length, p)
            est, sigma = dc.once_colored_probability(g, (1 << length) - 1, 20000, rng)
            if est > dc.peierls_bound(length, p) + SIGMAS * sigma:
                problems.append(("sampled", length, p, est))
    _report(problems)


# 9


def test_criterion_09_column_model():
    problems = []
    for d in range(1, 17):
        for T in range(1, 16 // d + 1):
            ps = tuple(0.04 + 0.03 * y for y in range(d))
            for boundary in ("periodic", "dangling"):
                g = ef.shor_column_checkgraph(T, d, ps, dangling=boundary == "dangling")
                if g.n_edges > 16 + d or g.n_edges > dc.PATTERN_CAP:
                    continue
                closed = ef.column_failure_probability(ef.ColumnModel(T, ps, boundary))
                exact = dc.exact_ml_failure(g)
                if abs(closed - exact) > EXACT:
                    problems.append(("exact", T, d, boundary, closed, exact))
    rng = np.random.default_rng(9)
    trials = 200000
    for p in (0.05, 0.1):
        for d in (1, 2, 3, 4):
            strands = ef._strands(p, d)
            Ts = [T for T in range(1, 65, 2)
                  if 2e-3 <= ef.column_failure_probability(ef.ColumnModel(T, strands)) <= 0.3]
            if len(Ts) > 5:
                Ts = [Ts[round(i * (len(Ts) - 1) / 4)] for i in range(5)]
            predicted = [ef.column_failure_probability(ef.ColumnModel(T, strands)) for T in Ts]
            sampled = [ef.sample_column_failures(ef.ColumnModel(T, strands), trials, rng) / trials for T in Ts]
            s_pred = np.polyfit(Ts, np.log(predicted), 1)[0]
            s_mc = np.polyfit(Ts, np.log(sampled), 1)[0]
            if abs(s_mc / s_pred - 1) > COLUMN_SLOPE_REL:
                problems.append(("slope", p, d, Ts, s_pred, s_mc))
    _report(problems)


# 10


def test_criterion_10_hole_center():
    problems = []
    p = 0.05
    for k, (d, T) in enumerate([(1, 6), (2, 6), (3, 4), (4, 6), (5, 3), (5, 6)]):
        g = dc.local_star_graph(d, T, p)
        red = dc.sample_errors_batch(g, np.random.default_rng(100 + k), 20000)
        post = dc.star_ml_classes(d, T, p, red)
        true = red[:, g.edges.index((0, None))].astype(int)
        tie = np.abs(post[:, 0] - post[:, 1]) < 1e-12
        P = np.where(tie, 0.5, (np.argmax(post, axis=1) != true).astype(float)).mean()
        pred = ef.column_failure_probability(ef.hole_center_effective(p, d, T).model)
        lhs, rhs = math.log(0.5 - P), math.log(0.5 - pred)
        if abs(lhs - rhs) > HOLE_LOG_REL * abs(rhs):
            problems.append((d, T, P, pred))
    _report(problems)


# 11


def test_criterion_11_ladder():
    problems = []
    rng = random.Random(11)
    for T in range(2, 13):
        m = ef.TransferMatrixModel(0.1, 0.2, T)
        configs = list(m.configurations())
        if T == 12:
            configs = rng.sample(configs, 512)
        for b in configs:
            if abs(m.exact(b) - m.enumerate_flips(b)) > EXACT:
                problems.append(("enumeration", T, b))
        if abs(sum(m.distribution().values()) - 1.0) > EXACT:
            problems.append(("normalization", T))
    flat = ef.TransferMatrixModel(0.0, 0.13, 6)
    for b in (0, 1):
        r = flat.rotated_closed_form(b)
        if r[0, 1] != 0 or r[1, 0] != 0:
            problems.append(("rotated off-diagonal", b, r))
    tv = ef.ladder_independence_check(ef.TransferMatrixModel(0.01, 0.01, 6))
    if tv > TV_LIMIT:
        problems.append(("tv", tv))
    _report(problems)


# 12


def test_criterion_12_gluing():
    problems = []
    q = np.linspace(0.0, 0.5, 100)
    for a in q:
        for b in q:
            if ef.glue_exact(a, b) > ef.glue(a, b) + 1e-15:
                problems.append(("grid", a, b))
    trials = 100000
    for k, p in enumerate((0.05, 0.1, 0.2)):
        piece = ef.shor_column_checkgraph(1, 1, p, dangling=True)
        glued = ef.glue_graphs(piece, 1, piece, 0)
        P1 = dc.exact_mc_failure(piece)
        solver = dc.ExactSolver(glued)
        cache = {}
        fails = 0.0
        for row in dc.sample_errors_batch(glued, np.random.default_rng(120 + k), trials):
            red = gf2.pack(row.astype(int).tolist())
            s = dc.syndrome(glued, red)
            if s not in cache:
                cache[s] = solver.ml_decode(s)
            res = cache[s]
            fails += 0.5 if res.tie else glued.class_of(red ^ res.blue)
        rate = fails / trials
        sigma = math.sqrt(rate * (1 - rate) / trials)
        if rate > 2 * P1 * P1 + SIGMAS * sigma:
            problems.append(("empirical", p, rate, 2 * P1 * P1, sigma))
    _report(problems)


# 13


def test_criterion_13_ising():
    problems = []
    for T in range(1, 17):
        for p in (0.05, 0.2):
            enum = sum(math.comb(T, k) * p ** k * (1 - p) ** (T - k) for k in range(1, T + 1, 2))
            if abs(ising.flip_after_rounds(p, T) - enum) > EXACT:
                problems.append(("P_flip", T, p))
    for N in range(1, 17):
        for T in range(1, 16 // N + 1):
            for p in (0.05, 0.2):
                a = ising.vacancies_everywhere_failure(N, T, p)
                b = ising.vacancies_everywhere_brute_force(N, T, p)
                if abs(a - b) > EXACT:
                    problems.append(("P_err", N, T, p, a, b))
    for N in range(1, 11):
        for T in (1, 2, 3):
            for r in range(N):
                for vac in itertools.combinations(range(1, N), r):
                    spec = ising.IsingSpec(N, T, 0.1, frozenset(vac))
                    full = (ising.brute_force_failure(spec) if N * T <= 16 else ising.record_oracle_failure(spec))
                    if abs(ising.effective_failure(spec) - full) > EXACT:
                        problems.append(("effective", N, T, vac))
    rng = np.random.default_rng(13)
    windows = [("quadratic", 2, (5, 5), 0.05, (2, 3, 4), 10 ** 7),
               ("linear", 1, (1, 5), 0.05, (30, 40, 50, 60), 10 ** 6),
               ("constant", 0, (1, 5), 0.05, (5000, 10000, 20000), 10 ** 6)]
    for regime, target, (l1, l2), p, Ts, trials in windows:
        points, _ = ising.crossover_experiment(l1, l2, p, Ts, trials, rng)
        slope = ising.fit_slope(Ts, [pt.failure for pt in points])
        if abs(slope - target) > ISING_SLOPE_TOL[regime]:
            problems.append(("slope", regime, slope))
        if regime == "constant" and any(abs(pt.failure - 0.5) > 0.01 for pt in points):
            problems.append(("saturation", [pt.failure for pt in points]))
    _report(problems)


# 14


def _anticommuting(css):
    for w in range(1, 1 << css.n):
        if not gf2.in_span(w, css.hx.rows) and any(gf2.dot(r, w) for r in css.hz.rows):
            yield w


def _check_measurement(css, w, rng, problems, label):
    c = cm.css_to_complex(css)
    for policy in ("solve", "basis"):
        target, f, data = cm.measure_x_product(c, w, preimage=policy)
        r = cm.verify_chain_map(c, target, f, data)
        total = (target.z_rank + target.x_rank) - (c.z_rank + c.x_rank)
        if not (r.squares_ok and r.measurement_ranks_ok and total == 0 and r.kills_v):
            problems.append((label, w, policy, r))
    if not cm.stabsim_cross_check(css, w, rng).matches:
        problems.append((label, w, "tableau cross-check"))


def test_criterion_14_chain_maps():
    problems = []
    rng = random.Random(14)
    for label, css in (("triangle", cm.triangle_code()), ("steane", cm.steane_code()),
                       ("toric", cm.toric_fixture(2))):
        for w in _anticommuting(css):
            _check_measurement(css, w, rng, problems, label)
    done = 0
    while done < 100:
        n = rng.randint(4, 10)
        css = cm.random_css(n, rng.randint(1, 4), rng.randint(0, 3), rng)
        words = list(_anticommuting(css))
        if not words:
            continue
        _check_measurement(css, rng.choice(words), rng, problems, f"random{done}")
        done += 1
    _report(problems)


# 15


def test_criterion_15_determinism():
    problems = []
    small = {"decode-sim": {"trials": "3000"}, "ising-toy": {"trials": "200"},
             "chainmap-demo": {"w": "random", "code": "steane", "trials": "4"},
             "column-model": {"trials": "5000"}, "ladder": {"T": "5"}}
    for name in cli.EXPERIMENTS:
        raw = small.get(name, {})
        a = cli.run(cli.build_config(name, raw, seed=15))
        b = cli.run(cli.build_config(name, raw, seed=15))
        if a != b or a.count("\n") < 2:
            problems.append(name)
    _report(problems)
