"""Floquet codes from labeled trivalent multigraphs.

Qubits sit on vertices. Each edge carries a Pauli letter at both of its ends and
defines a two-qubit check. Measuring the checks of a sequence of perfect
matchings produces instantaneous stabilizer groups generated by the current
matching's checks plus products of checks along simple cycles.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Sequence

from . import gf2
from .gf2 import BitMatrix, BitVector, support
from .stab import Membership, PauliOperator, StabilizerTableau

PAULIS = ("X", "Y", "Z")

CycleChain = BitVector


class GraphError(ValueError):
    pass


class ConformanceError(AssertionError):
    pass


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    label_u: str
    label_v: str

    def other(self, w: int) -> int:
        return self.v if w == self.u else self.u

    def label_at(self, w: int) -> str:
        return self.label_u if w == self.u else self.label_v


@dataclass(frozen=True)
class LabeledTrivalentMultigraph:
    n_V: int
    edges: tuple[Edge, ...]
    name: str = ""

    def __post_init__(self):
        inc: list[list[int]] = [[] for _ in range(self.n_V)]
        for eid, e in enumerate(self.edges):
            if e.u == e.v:
                raise GraphError(f"edge {eid} is a self-loop")
            for w in (e.u, e.v):
                if not 0 <= w < self.n_V:
                    raise GraphError(f"edge {eid} touches unknown vertex {w}")
            for lab in (e.label_u, e.label_v):
                if lab not in PAULIS:
                    raise GraphError(f"edge {eid} has bad label {lab!r}")
            inc[e.u].append(eid)
            inc[e.v].append(eid)
        for w, es in enumerate(inc):
            if len(es) != 3:
                raise GraphError(f"vertex {w} has degree {len(es)}")
            labels = sorted(self.edges[e].label_at(w) for e in es)
            if labels != list(PAULIS):
                raise GraphError(f"labels at vertex {w} are {labels}, not a permutation of XYZ")
        object.__setattr__(self, "_incident", tuple(tuple(es) for es in inc))
        if not self._connected():
            raise GraphError("graph is not connected")
        object.__setattr__(self, "_checks", tuple(
            PauliOperator.from_letters(self.n_V, {e.u: e.label_u, e.v: e.label_v}) for e in self.edges))

    @property
    def n_E(self) -> int:
        return len(self.edges)

    def incident(self, w: int) -> tuple[int, ...]:
        return self._incident[w]

    def _connected(self) -> bool:
        if self.n_V == 0:
            return True
        seen = {0}
        stack = [0]
        while stack:
            w = stack.pop()
            for e in self._incident[w]:
                o = self.edges[e].other(w)
                if o not in seen:
                    seen.add(o)
                    stack.append(o)
        return len(seen) == self.n_V

    def incidence_matrix(self) -> BitMatrix:
        """Vertex-by-edge boundary map."""
        rows = [0] * self.n_V
        for eid, e in enumerate(self.edges):
            rows[e.u] |= 1 << eid
            rows[e.v] |= 1 << eid
        return BitMatrix.from_rows(rows, self.n_E)

    def boundary(self, chain: int) -> int:
        out = 0
        for eid in support(chain):
            e = self.edges[eid]
            out ^= (1 << e.u) ^ (1 << e.v)
        return out

    def all_edges(self) -> int:
        return (1 << self.n_E) - 1

    # file format: "n_V n_E" then "id u v label_u label_v"

    def to_text(self) -> str:
        lines = [f"{self.n_V} {self.n_E}"]
        for eid, e in enumerate(self.edges):
            lines.append(f"{eid} {e.u} {e.v} {e.label_u} {e.label_v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, name: str = "") -> "LabeledTrivalentMultigraph":
        rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
        rows = [r for r in rows if r]
        n_v, n_e = int(rows[0][0]), int(rows[0][1])
        body = rows[1:]
        if len(body) != n_e:
            raise GraphError(f"header declares {n_e} edges, found {len(body)}")
        edges: list[Edge | None] = [None] * n_e
        for r in body:
            eid, u, v = int(r[0]), int(r[1]), int(r[2])
            if not 0 <= eid < n_e or edges[eid] is not None:
                raise GraphError(f"bad or repeated edge id {eid}")
            edges[eid] = Edge(u, v, r[3].upper(), r[4].upper())
        return cls(n_v, tuple(edges), name)  # type: ignore[arg-type]


def chain(g: LabeledTrivalentMultigraph, edge_ids: Iterable[int]) -> CycleChain:
    return BitVector.from_support(g.n_E, edge_ids)


def _word(c: CycleChain | int) -> int:
    return c.word if isinstance(c, BitVector) else c


# checks and ranks


def check_of_edge(g: LabeledTrivalentMultigraph, e: int) -> PauliOperator:
    if not 0 <= e < g.n_E:
        raise KeyError(f"unknown edge {e}")
    return g._checks[e]


def all_checks(g: LabeledTrivalentMultigraph) -> list[PauliOperator]:
    return [check_of_edge(g, e) for e in range(g.n_E)]


def rank_of_Q(g: LabeledTrivalentMultigraph) -> int:
    """Rank of the check group modulo signs: n_E - 1, cross-checked symplectically."""
    formula = g.n_E - 1
    computed = gf2.rank([c.symplectic for c in all_checks(g)])
    if computed != formula:
        raise AssertionError(f"check rank {computed} differs from n_E - 1 = {formula}")
    return formula


def stabilizer_rank(g: LabeledTrivalentMultigraph) -> int:
    """Rank of the cycle-operator group: n_V/2 + 1, cross-checked with the cycle space."""
    formula = g.n_V // 2 + 1
    computed = len(gf2.kernel_basis(g.incidence_matrix()))
    if computed != formula:
        raise AssertionError(f"cycle space dimension {computed} differs from n_V/2 + 1 = {formula}")
    return formula


def cycle_space_basis(g: LabeledTrivalentMultigraph) -> list[int]:
    return gf2.kernel_words(g.incidence_matrix())


def cycle_operator(g: LabeledTrivalentMultigraph, c: CycleChain | int) -> PauliOperator:
    """Product of checks along a cycle, normalized to the positive Hermitian form."""
    w = _word(c)
    if g.boundary(w):
        raise ValueError("chain has nonzero boundary")
    op = PauliOperator(g.n_V)
    checks = g._checks
    for e in support(w):
        op = op * checks[e]
    return op.with_sign(1)


def signed_cycle_operator(g: LabeledTrivalentMultigraph, order: Sequence[int],
                          outcomes: dict[int, int]) -> PauliOperator:
    """Product of signed checks taken in ``order``; the value implied by the outcomes."""
    op = PauliOperator(g.n_V)
    for e in order:
        op = op * check_of_edge(g, e).times_sign(outcomes[e])
    if not op.is_hermitian():
        raise AssertionError("cycle product is not Hermitian")
    return op


# matchings and cycles


def is_perfect_matching(g: LabeledTrivalentMultigraph, m: Iterable[int]) -> bool:
    covered = [0] * g.n_V
    for e in m:
        covered[g.edges[e].u] += 1
        covered[g.edges[e].v] += 1
    return all(c == 1 for c in covered)


def enumerate_perfect_matchings(g: LabeledTrivalentMultigraph, cap: int = 24) -> list[frozenset[int]]:
    """All perfect matchings; the lowest uncovered vertex is matched first, edges tried by id."""
    if g.n_V > cap:
        raise ValueError(f"{g.n_V} vertices exceeds matching-enumeration cap {cap}")
    out: list[frozenset[int]] = []
    covered = [False] * g.n_V
    chosen: list[int] = []

    def rec(start: int) -> None:
        w = start
        while w < g.n_V and covered[w]:
            w += 1
        if w == g.n_V:
            out.append(frozenset(chosen))
            return
        covered[w] = True
        for e in g.incident(w):
            o = g.edges[e].other(w)
            if covered[o]:
                continue
            covered[o] = True
            chosen.append(e)
            rec(w + 1)
            chosen.pop()
            covered[o] = False
        covered[w] = False

    rec(0)
    return out


def _decompose_degree_two(g: LabeledTrivalentMultigraph, edge_set: int) -> list[CycleChain]:
    """Split an edge set in which every vertex has degree 0 or 2 into simple cycles."""
    remaining = edge_set
    out = []
    while remaining:
        e0 = (remaining & -remaining).bit_length() - 1
        start = g.edges[e0].u
        cyc = 0
        e, w = e0, g.edges[e0].v
        cyc |= 1 << e
        remaining &= ~(1 << e)
        while w != start:
            nxt = [f for f in g.incident(w) if (remaining >> f) & 1]
            if len(nxt) != 1:
                raise ValueError("edge set is not a disjoint union of cycles")
            e = nxt[0]
            cyc |= 1 << e
            remaining &= ~(1 << e)
            w = g.edges[e].other(w)
        out.append(BitVector(g.n_E, cyc))
    return out


def _mask(edge_ids: Iterable[int]) -> int:
    return gf2.from_support(edge_ids)


def matching_difference(g: LabeledTrivalentMultigraph, m: Iterable[int],
                        m2: Iterable[int]) -> list[CycleChain]:
    """C(m, m'): the symmetric difference split into vertex-disjoint simple cycles."""
    return _decompose_degree_two(g, _mask(m) ^ _mask(m2))


def avoiding_cycles(g: LabeledTrivalentMultigraph, m: Iterable[int]) -> list[CycleChain]:
    m = list(m)
    if not is_perfect_matching(g, m):
        raise ValueError("not a perfect matching")
    return _decompose_degree_two(g, g.all_edges() & ~_mask(m))


def alternating_cycles(g: LabeledTrivalentMultigraph, m: Iterable[int],
                       max_length: int = 12, max_count: int = 10_000) -> list[CycleChain]:
    """Simple cycles alternating between matching and non-matching edges."""
    mset = set(m)
    if not is_perfect_matching(g, mset):
        raise ValueError("not a perfect matching")
    mate_edge = {}
    for e in mset:
        mate_edge[g.edges[e].u] = e
        mate_edge[g.edges[e].v] = e
    found: set[int] = set()
    out = []
    for start in range(g.n_V):
        # walk: leave start through its matching edge, come back through a non-matching edge
        e0 = mate_edge[start]
        w0 = g.edges[e0].other(start)
        if w0 < start:
            continue
        visited = {start, w0}

        def rec(w: int, mask: int, length: int) -> None:
            # at w having just used a matching edge; now take a non-matching edge
            for f in g.incident(w):
                if f in mset or (mask >> f) & 1:
                    continue
                o = g.edges[f].other(w)
                if o == start:
                    cyc = mask | (1 << f)
                    if cyc not in found:
                        found.add(cyc)
                        out.append(BitVector(g.n_E, cyc))
                        if len(out) > max_count:
                            raise ValueError(f"more than {max_count} alternating cycles")
                    continue
                if o < start or o in visited or length + 2 > max_length:
                    continue
                me = mate_edge[o]
                o2 = g.edges[me].other(o)
                if o2 < start or o2 in visited:
                    continue
                visited.add(o)
                visited.add(o2)
                rec(o2, mask | (1 << f) | (1 << me), length + 2)
                visited.discard(o)
                visited.discard(o2)

        rec(w0, 1 << e0, 1)
    out.sort(key=lambda c: (c.weight(), c.word))
    return out


# graph matching codes


@dataclass
class GraphMatchingCode:
    graph: LabeledTrivalentMultigraph
    matching: frozenset[int]
    cycles: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.matching = frozenset(self.matching)
        if not is_perfect_matching(self.graph, self.matching):
            raise ValueError("matching is not perfect")
        self.cycles = [_word(c) for c in self.cycles]
        for c in self.cycles:
            if self.graph.boundary(c):
                raise ValueError("cycle set contains a chain with nonzero boundary")


def _independent(ops: Sequence[PauliOperator]) -> list[PauliOperator]:
    basis: list[int] = []
    pivots: list[int] = []
    keep = []
    for op in ops:
        r = gf2.reduce(op.symplectic, basis, pivots)
        if r:
            basis, pivots = gf2.echelon(basis + [r])
            keep.append(op)
    return keep


def predicted_isg(code: GraphMatchingCode) -> list[PauliOperator]:
    """Independent generators: matching checks, then cycle operators of S."""
    g = code.graph
    ops = [check_of_edge(g, e) for e in sorted(code.matching)]
    ops += [cycle_operator(g, c) for c in code.cycles]
    return _independent(ops)


def logical_count(code: GraphMatchingCode) -> int:
    return code.graph.n_V - len(predicted_isg(code))


@dataclass
class MatchingStep:
    round: int
    index: int
    matching: frozenset[int]
    outcomes: dict[int, int]
    cycles: list[int]
    isg_rank: int
    new_cycles: list[int]
    redundant_cycles: list[int]


@dataclass
class ScheduleReport:
    steps: list[MatchingStep]
    redundancy_events: list[tuple[int, int, int]]  # (round, index, cycle)
    final_tableau: StabilizerTableau

    @property
    def final_cycles(self) -> list[int]:
        return self.steps[-1].cycles if self.steps else []


def run_matching_schedule(g: LabeledTrivalentMultigraph, matchings: Sequence[Iterable[int]],
                          rounds: int, rng: random.Random, check_signs: bool = True) -> ScheduleReport:
    """Measure the matchings cyclically for ``rounds`` periods and check every ISG.

    After each matching the simulated group must equal the prediction from the
    accumulated cycle set S, where each step adds the cycles of C(previous, current).
    Cycles of C that are already implied by the current group are redundancy
    events: their outcomes are determined and serve as error checks.
    """
    ms = [frozenset(m) for m in matchings]
    for m in ms:
        if not is_perfect_matching(g, m):
            raise ValueError("schedule contains a non-perfect matching")
    t = StabilizerTableau(g.n_V)
    last_outcome: dict[int, int] = {}
    cycles: list[int] = []
    signed: list[PauliOperator] = []
    steps: list[MatchingStep] = []
    events: list[tuple[int, int, int]] = []
    prev: frozenset[int] | None = None
    op_cache: dict[int, PauliOperator] = {}

    def cycle_op(c: int) -> PauliOperator:
        if c not in op_cache:
            op_cache[c] = cycle_operator(g, c)
        return op_cache[c]

    for r in range(rounds):
        for i, m in enumerate(ms):
            before = dict(last_outcome)
            outcomes = {}
            for e in sorted(m):
                o, _ = t.measure(check_of_edge(g, e), rng)
                outcomes[e] = o
                last_outcome[e] = o
            new, redundant = [], []
            if prev is not None:
                base = [check_of_edge(g, e) for e in sorted(m)] + [cycle_op(c) for c in cycles]
                basis, pivots = gf2.echelon([b.symplectic for b in base])
                for cyc in matching_difference(g, prev, m):
                    c = cyc.word
                    op = cycle_op(c)
                    if gf2.reduce(op.symplectic, basis, pivots) == 0:
                        redundant.append(c)
                        events.append((r, i, c))
                        continue
                    basis, pivots = gf2.echelon(basis + [op.symplectic])
                    cycles.append(c)
                    new.append(c)
                    # old-matching edges carry their pre-step outcomes
                    old = [e for e in support(c) if e not in m]
                    vals = {e: before[e] for e in old} | {e: outcomes[e] for e in support(c) if e in m}
                    signed.append(signed_cycle_operator(g, old + [e for e in support(c) if e in m], vals))
            pred = [check_of_edge(g, e) for e in sorted(m)] + [cycle_op(c) for c in cycles]
            if not t.same_group(pred):
                raise ConformanceError(
                    f"round {r}, matching {i}: simulated ISG {t} differs from prediction")
            if check_signs:
                for e in m:
                    want = check_of_edge(g, e).times_sign(outcomes[e])
                    if t.contains(want) is not Membership.WITH_SIGN:
                        raise ConformanceError(f"check {e} sign inconsistent with its outcome")
                for op in signed:
                    if t.contains(op) is not Membership.WITH_SIGN:
                        raise ConformanceError(f"cycle operator {op} sign inconsistent with outcomes")
            steps.append(MatchingStep(r, i, m, outcomes, list(cycles), t.rank, new, redundant))
            prev = m
    return ScheduleReport(steps, events, t)


# fixtures


def _colored(n_v: int, edge_list: Sequence[tuple[int, int, str]], name: str) -> LabeledTrivalentMultigraph:
    return LabeledTrivalentMultigraph(n_v, tuple(Edge(u, v, c, c) for u, v, c in edge_list), name)


def k4() -> LabeledTrivalentMultigraph:
    return _colored(4, [(0, 1, "X"), (0, 2, "Y"), (0, 3, "Z"), (1, 2, "Z"), (1, 3, "Y"), (2, 3, "X")], "k4")


def theta() -> LabeledTrivalentMultigraph:
    return _colored(2, [(0, 1, "X"), (0, 1, "Y"), (0, 1, "Z")], "theta")


def cube() -> LabeledTrivalentMultigraph:
    edges = []
    for v in range(8):
        for bit, lab in ((1, "X"), (2, "Y"), (4, "Z")):
            w = v ^ bit
            if v < w:
                edges.append((v, w, lab))
    return _colored(8, edges, "cube")


def prism() -> LabeledTrivalentMultigraph:
    return _colored(6, [(0, 1, "X"), (1, 2, "Y"), (0, 2, "Z"), (0, 3, "Y"), (1, 4, "Z"),
                        (2, 5, "X"), (3, 4, "X"), (4, 5, "Y"), (3, 5, "Z")], "prism")


def honeycomb_hexagons(lx: int, ly: int) -> list[list[int]]:
    """Vertex lists of the hexagons of :func:`honeycomb_torus`, one per unit cell."""
    def a(i, j):
        return 2 * ((i % lx) * ly + (j % ly))

    def b(i, j):
        return a(i, j) + 1

    return [[a(i, j), b(i, j), a(i, j + 1), b(i - 1, j + 1), a(i - 1, j + 1), b(i - 1, j)]
            for i in range(lx) for j in range(ly)]


def honeycomb_torus(lx: int, ly: int) -> LabeledTrivalentMultigraph:
    """Honeycomb lattice on an lx-by-ly torus, two vertices per unit cell.

    When both sides are multiples of 3 the hexagons are 3-colored by
    (i - j) mod 3 and each edge takes the color of neither hexagon it borders,
    so every hexagon boundary alternates between two edge colors. Otherwise
    edges are colored by direction.
    """
    def a(i, j):
        return 2 * ((i % lx) * ly + (j % ly))

    def b(i, j):
        return a(i, j) + 1

    plaquette = lx % 3 == 0 and ly % 3 == 0
    edges = []
    for i in range(lx):
        for j in range(ly):
            # directions 0, 1, 2 reach B(i,j), B(i-1,j), B(i,j-1)
            for d, w in enumerate((b(i, j), b(i - 1, j), b(i, j - 1))):
                col = _plaquette_edge_color(i, j, d) if plaquette else "XYZ"[d]
                edges.append((a(i, j), w, col))
    return _colored(2 * lx * ly, edges, f"honeycomb_{lx}x{ly}")


def _plaquette_edge_color(i: int, j: int, d: int) -> str:
    # hexagons bordering the edge from A(i,j) in direction d
    pairs = {0: ((i, j), (i + 1, j - 1)), 1: ((i, j), (i, j - 1)), 2: ((i, j - 1), (i + 1, j - 1))}
    (i1, j1), (i2, j2) = pairs[d]
    c1, c2 = (i1 - j1) % 3, (i2 - j2) % 3
    return "XYZ"[3 - c1 - c2]


FIXTURE_FILES = ("k4", "theta", "cube", "prism", "honeycomb_2x2", "honeycomb_2x3", "honeycomb_3x3")


def load_fixture(name: str) -> LabeledTrivalentMultigraph:
    text = resources.files("graphcodes").joinpath("data", f"{name}.txt").read_text()
    return LabeledTrivalentMultigraph.from_text(text, name)


def build_fixture(name: str) -> LabeledTrivalentMultigraph:
    if name.startswith("honeycomb_"):
        lx, ly = map(int, name.split("_")[1].split("x"))
        return honeycomb_torus(lx, ly)
    return {"k4": k4, "theta": theta, "cube": cube, "prism": prism}[name]()


def fixtures() -> dict[str, LabeledTrivalentMultigraph]:
    return {name: load_fixture(name) for name in FIXTURE_FILES}


def color_matchings(g: LabeledTrivalentMultigraph) -> list[frozenset[int]]:
    """Edges grouped by label when both ends share it; valid for the color-labeled fixtures."""
    out = []
    for lab in PAULIS:
        m = frozenset(e for e, ed in enumerate(g.edges) if ed.label_u == ed.label_v == lab)
        if is_perfect_matching(g, m):
            out.append(m)
    return out


def sequences(items: Sequence, max_length: int) -> Iterable[tuple]:
    for length in range(1, max_length + 1):
        yield from itertools.product(items, repeat=length)


def vertex_automorphisms(g: LabeledTrivalentMultigraph) -> list[tuple[int, ...]]:
    """Vertex permutations preserving edge multiplicities (labels ignored)."""
    mult: dict[tuple[int, int], int] = {}
    for e in g.edges:
        key = (min(e.u, e.v), max(e.u, e.v))
        mult[key] = mult.get(key, 0) + 1
    nbrs = [{g.edges[e].other(w) for e in g.incident(w)} for w in range(g.n_V)]
    out = []
    image = [-1] * g.n_V
    used = [False] * g.n_V

    def ok(w: int, t: int) -> bool:
        for u in range(w):
            a = mult.get((min(u, w), max(u, w)), 0)
            b = mult.get((min(image[u], t), max(image[u], t)), 0)
            if a != b:
                return False
        return True

    def rec(w: int) -> None:
        if w == g.n_V:
            out.append(tuple(image))
            return
        for t in range(g.n_V):
            if not used[t] and ok(w, t):
                image[w] = t
                used[t] = True
                rec(w + 1)
                used[t] = False
        image[w] = -1

    rec(0)
    return out


def _edge_map(g: LabeledTrivalentMultigraph, perm: Sequence[int]) -> list[int] | None:
    """Edge permutation induced by a vertex automorphism; None when parallel edges make it ambiguous."""
    where: dict[tuple[int, int], list[int]] = {}
    for eid, e in enumerate(g.edges):
        where.setdefault((min(e.u, e.v), max(e.u, e.v)), []).append(eid)
    out = []
    for e in g.edges:
        a, b = perm[e.u], perm[e.v]
        cands = where[(min(a, b), max(a, b))]
        if len(cands) != 1:
            return None
        out.append(cands[0])
    return out


def sequence_orbit_representatives(g: LabeledTrivalentMultigraph, pool: Sequence[frozenset[int]],
                                   max_length: int) -> list[tuple[int, ...]]:
    """Index sequences over ``pool``, one per orbit of the graph's automorphism group.

    An automorphism relabels qubits and changes each check only by a local
    permutation of Pauli letters, so every group-level statement about a
    schedule transfers to its image. Graphs with parallel edges fall back to
    the full list.
    """
    index = {m: i for i, m in enumerate(pool)}
    maps = []
    for perm in vertex_automorphisms(g):
        em = _edge_map(g, perm)
        if em is None:
            return list(sequences(range(len(pool)), max_length))
        img = []
        for m in pool:
            j = index.get(frozenset(em[e] for e in m))
            if j is None:
                break
            img.append(j)
        else:
            maps.append(img)
    reps = []
    for seq in sequences(range(len(pool)), max_length):
        if all(tuple(mp[i] for i in seq) >= seq for mp in maps):
            reps.append(seq)
    return reps
