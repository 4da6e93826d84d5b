"""Toric codes on 2-complexes.

Qubits live on edges, Z stabilizers on vertex stars and X stabilizers on face
boundaries. Also here: exact distances and cuts at small sizes, edge
subdivision, face triangulation, the disk fill with nested rings, integer
lifts, and the reduction of a graph matching code (with every avoiding cycle
in its cycle set) to a possibly twisted toric code.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .gf2 import BitMatrix, BitVector, support
from .matchcode import (GraphMatchingCode, LabeledTrivalentMultigraph, avoiding_cycles,
                        check_of_edge, cycle_operator)
from .stab import PauliOperator

INFINITY = math.inf
DISTANCE_CAP = 26


class ComplexError(ValueError):
    pass


class DegenerateCodeError(ComplexError):
    pass


class CapExceeded(ValueError):
    pass


# complexes


@dataclass(frozen=True)
class TwoComplex:
    """Vertices 0..n_vertices-1, oriented edges (tail, head), faces as closed walks.

    A face is a tuple of (edge id, direction) with direction +1 for tail->head.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    faces: tuple[tuple[tuple[int, int], ...], ...] = ()

    def __post_init__(self):
        for eid, (u, v) in enumerate(self.edges):
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ComplexError(f"edge {eid} has an endpoint outside the vertex range")
            if u == v:
                raise ComplexError(f"edge {eid} is a self-loop")
        for fid, walk in enumerate(self.faces):
            if not walk:
                raise ComplexError(f"face {fid} is empty")
            verts = self._walk_vertices(walk)
            if verts is None:
                raise ComplexError(f"face {fid} is not a closed walk")

    def _walk_vertices(self, walk) -> list[int] | None:
        out = []
        for (e, d), (e2, d2) in zip(walk, walk[1:] + walk[:1]):
            if not 0 <= e < len(self.edges) or d not in (1, -1):
                return None
            u, v = self.edges[e]
            tail, head = (u, v) if d > 0 else (v, u)
            u2, v2 = self.edges[e2]
            tail2 = u2 if d2 > 0 else v2
            if head != tail2:
                return None
            out.append(tail)
        return out

    def face_vertices(self, fid: int) -> list[int]:
        return self._walk_vertices(self.faces[fid])  # type: ignore[return-value]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def face_chain(self, fid: int) -> int:
        w = 0
        for e, _ in self.faces[fid]:
            w ^= 1 << e
        return w

    def degree(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj

    def graph_distance(self, a: int, b: int) -> int:
        adj = self.adjacency()
        dist = {a: 0}
        q = deque([a])
        while q:
            w = q.popleft()
            if w == b:
                return dist[w]
            for o in adj[w]:
                if o not in dist:
                    dist[o] = dist[w] + 1
                    q.append(o)
        return -1

    # text format: vertex count, then "e id u v" and "f +e -e ..." lines

    def to_text(self) -> str:
        lines = [str(self.n_vertices)]
        lines += [f"e {i} {u} {v}" for i, (u, v) in enumerate(self.edges)]
        lines += ["f " + " ".join(f"{'+' if d > 0 else '-'}{e}" for e, d in walk) for walk in self.faces]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "TwoComplex":
        rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
        rows = [r for r in rows if r]
        nv = int(rows[0][0])
        edges: dict[int, tuple[int, int]] = {}
        faces = []
        for r in rows[1:]:
            if r[0] == "e":
                edges[int(r[1])] = (int(r[2]), int(r[3]))
            elif r[0] == "f":
                faces.append(tuple((int(tok[1:]), 1 if tok[0] == "+" else -1) for tok in r[1:]))
            else:
                raise ComplexError(f"unknown line type {r[0]!r}")
        if sorted(edges) != list(range(len(edges))):
            raise ComplexError("edge ids must be 0..n-1")
        return cls(nv, tuple(edges[i] for i in range(len(edges))), tuple(faces))


def face_from_vertices(edges: Sequence[tuple[int, int]], cycle: Sequence[int],
                       edge_ids: Sequence[int]) -> tuple[tuple[int, int], ...]:
    """Signed walk following ``cycle`` (vertex list) through the given edge ids."""
    walk = []
    for k, e in enumerate(edge_ids):
        a = cycle[k]
        u, v = edges[e]
        walk.append((e, 1 if u == a else -1))
    return tuple(walk)


# CSS codes


@dataclass(frozen=True)
class CSSCode:
    """Z checks ``hz`` and X checks ``hx`` over the same ``n`` qubits."""

    hz: BitMatrix
    hx: BitMatrix

    def __post_init__(self):
        if self.hz.ncols != self.hx.ncols:
            raise ComplexError("check matrices act on different qubit counts")
        if not (self.hx @ self.hz.T).is_zero():
            raise ComplexError("X and Z checks do not commute")

    @property
    def n(self) -> int:
        return self.hz.ncols

    @property
    def k(self) -> int:
        return self.n - gf2.rank(self.hz) - gf2.rank(self.hx)

    def to_text(self) -> str:
        out = ["Hz"]
        out += ["".join(map(str, r)) for r in self.hz.to_lists()]
        out.append("Hx")
        out += ["".join(map(str, r)) for r in self.hx.to_lists()]
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CSSCode":
        blocks: dict[str, list[list[int]]] = {"Hz": [], "Hx": []}
        cur = None
        for ln in text.split():
            if ln in blocks:
                cur = ln
            else:
                blocks[cur].append([int(c) for c in ln])  # type: ignore[index]
        n = len((blocks["Hz"] or blocks["Hx"])[0])
        return cls(BitMatrix.from_lists(blocks["Hz"], n), BitMatrix.from_lists(blocks["Hx"], n))

    def x_logical_basis(self) -> list[int]:
        """Representatives of ker(hz) modulo rowspace(hx)."""
        return _quotient_basis(gf2.kernel_words(self.hz), list(self.hx.rows))

    def z_logical_basis(self) -> list[int]:
        return _quotient_basis(gf2.kernel_words(self.hx), list(self.hz.rows))

    def is_x_logical(self, x: int) -> bool:
        return not self.hz.apply(x).word and not gf2.in_span(x, self.hx.rows)

    def is_z_logical(self, z: int) -> bool:
        return not self.hx.apply(z).word and not gf2.in_span(z, self.hz.rows)


def _quotient_basis(kernel: Sequence[int], sub: Sequence[int]) -> list[int]:
    basis, pivots = gf2.echelon(list(sub))
    out = []
    for v in kernel:
        r = gf2.reduce(v, basis, pivots)
        if r:
            out.append(v)
            basis, pivots = gf2.echelon(basis + [r])
    return out


def toric_code(c: TwoComplex) -> CSSCode:
    hz = [0] * c.n_vertices
    for eid, (u, v) in enumerate(c.edges):
        hz[u] ^= 1 << eid
        hz[v] ^= 1 << eid
    hx = [c.face_chain(f) for f in range(len(c.faces))]
    return CSSCode(BitMatrix.from_rows(hz, c.n_edges), BitMatrix.from_rows(hx, c.n_edges))


# distances


def _min_weight_outside(kernel: Sequence[int], checks: BitMatrix, sub: Sequence[int],
                        n: int, odd_with: int | None = None) -> int | None:
    """Lightest vector in span(kernel) that avoids span(sub) (or has odd overlap with ``odd_with``).

    Searches by increasing weight over combinations of columns while that is
    cheaper than listing the whole kernel, then switches to the full listing.
    """
    basis, pivots = gf2.echelon(list(sub))

    def good(v: int) -> bool:
        if odd_with is not None:
            return (v & odd_with).bit_count() & 1 == 1
        return gf2.reduce(v, basis, pivots) != 0

    if not any(good(v) for v in kernel) and odd_with is None:
        return None
    kdim = len(kernel)
    cols = [0] * n
    for i, r in enumerate(checks.rows):
        for j in support(r):
            cols[j] |= 1 << i
    budget = 1 << kdim
    spent = 0
    for w in range(1, n + 1):
        spent += comb(n, w)
        if spent > budget:
            break
        for idx in itertools.combinations(range(n), w):
            s = 0
            for j in idx:
                s ^= cols[j]
            if s:
                continue
            v = gf2.from_support(idx)
            if good(v):
                return v
    best = None
    for v in gf2.span_words(list(kernel)):
        if v and good(v) and (best is None or v.bit_count() < best.bit_count()
                               or (v.bit_count() == best.bit_count() and v < best)):
            best = v
    return best


def _check_cap(css: CSSCode, cap: int) -> None:
    if css.n > cap:
        raise CapExceeded(f"{css.n} qubits exceeds the exact-search cap {cap}")


def min_x_logical(css: CSSCode, cap: int = DISTANCE_CAP) -> int | None:
    _check_cap(css, cap)
    return _min_weight_outside(gf2.kernel_words(css.hz), css.hz, css.hx.rows, css.n)


def min_z_logical(css: CSSCode, cap: int = DISTANCE_CAP) -> int | None:
    _check_cap(css, cap)
    return _min_weight_outside(gf2.kernel_words(css.hx), css.hx, css.hz.rows, css.n)


def distance_X(css: CSSCode, cap: int = DISTANCE_CAP) -> float:
    """Minimum weight of a nontrivial cycle; infinity when there are no logical qubits."""
    v = min_x_logical(css, cap)
    return INFINITY if v is None else v.bit_count()


def distance_Z(css: CSSCode, cap: int = DISTANCE_CAP) -> float:
    v = min_z_logical(css, cap)
    return INFINITY if v is None else v.bit_count()


# constructions


def torus(L: int) -> TwoComplex:
    """L-by-L square cellulation of the torus: 2L^2 edges, L^2 faces."""
    def vid(i, j):
        return (i % L) * L + (j % L)

    edges = []
    for i in range(L):
        for j in range(L):
            edges.append((vid(i, j), vid(i, j + 1)))  # horizontal, id 2*(iL+j)
            edges.append((vid(i, j), vid(i + 1, j)))  # vertical, id 2*(iL+j)+1

    def h(i, j):
        return 2 * ((i % L) * L + (j % L))

    def v(i, j):
        return h(i, j) + 1

    faces = [((h(i, j), 1), (v(i, j + 1), 1), (h(i + 1, j), -1), (v(i, j), -1))
             for i in range(L) for j in range(L)]
    return TwoComplex(L * L, tuple(edges), tuple(faces))


def cylinder(circumference: int, height: int) -> TwoComplex:
    """Squares on a cylinder: ``height`` rings of ``circumference`` vertices."""
    c = circumference

    def vid(r, j):
        return r * c + (j % c)

    edges = []
    ring = {}
    rung = {}
    for r in range(height):
        for j in range(c):
            ring[r, j] = len(edges)
            edges.append((vid(r, j), vid(r, j + 1)))
    for r in range(height - 1):
        for j in range(c):
            rung[r, j] = len(edges)
            edges.append((vid(r, j), vid(r + 1, j)))
    faces = [((ring[r, j], 1), (rung[r, (j + 1) % c], 1), (ring[r + 1, j], -1), (rung[r, j], -1))
             for r in range(height - 1) for j in range(c)]
    return TwoComplex(c * height, tuple(edges), tuple(faces))


def single_square() -> TwoComplex:
    return TwoComplex(4, ((0, 1), (1, 2), (2, 3), (3, 0)), (((0, 1), (1, 1), (2, 1), (3, 1)),))


def triangle() -> TwoComplex:
    """One triangular face; vertex j touches edges j and j+1, so Hz rows read Z1Z2, Z2Z3, Z3Z1."""
    edges = ((2, 0), (0, 1), (1, 2))
    return TwoComplex(3, edges, (((1, 1), (2, 1), (0, 1)),))


def subdivide_edges(c: TwoComplex, ell: int) -> TwoComplex:
    """Split every edge into ``ell`` edges; sub-edge k of edge e gets id e*ell + k."""
    if ell < 1:
        raise ValueError("subdivision factor must be at least 1")
    if ell == 1:
        return c
    nv = c.n_vertices
    edges = []
    for e, (u, v) in enumerate(c.edges):
        chain_v = [u] + [nv + e * (ell - 1) + k for k in range(ell - 1)] + [v]
        for k in range(ell):
            edges.append((chain_v[k], chain_v[k + 1]))
    faces = []
    for walk in c.faces:
        new = []
        for e, d in walk:
            ks = range(ell) if d > 0 else range(ell - 1, -1, -1)
            new.extend((e * ell + k, d) for k in ks)
        faces.append(tuple(new))
    return TwoComplex(nv + c.n_edges * (ell - 1), tuple(edges), tuple(faces))


def triangulate_faces(c: TwoComplex) -> TwoComplex:
    """Cone every face of size s off a new center vertex, giving s triangles."""
    edges = list(c.edges)
    faces = []
    nv = c.n_vertices
    for fid, walk in enumerate(c.faces):
        center = nv
        nv += 1
        verts = c.face_vertices(fid)
        spokes = []
        for w in verts:
            spokes.append(len(edges))
            edges.append((w, center))
        s = len(walk)
        for a in range(s):
            e, d = walk[a]
            faces.append(((e, d), (spokes[(a + 1) % s], 1), (spokes[a], -1)))
    return TwoComplex(nv, tuple(edges), tuple(faces))


def hyperbolic_fill(m: int) -> TwoComplex:
    """Disk whose boundary is an m-cycle, filled by nested rings of halving size.

    Outer vertices are 0..m-1 and edge j joins j to j+1. Inner vertex j' of
    each new ring joins outer vertices 2j and 2j+1; a ring of at most three
    vertices is closed off with a single face.
    """
    if m < 3:
        raise ValueError("boundary cycle needs at least 3 vertices")
    edges: list[tuple[int, int]] = []
    faces: list[tuple[tuple[int, int], ...]] = []
    ring = list(range(m))
    ring_edges = []
    for j in range(m):
        ring_edges.append(len(edges))
        edges.append((ring[j], ring[(j + 1) % m]))
    nv = m
    while len(ring) > 3:
        size = len(ring)
        h = size // 2
        inner = list(range(nv, nv + h))
        nv += h
        inner_edges = []
        for j in range(h):
            inner_edges.append(len(edges))
            edges.append((inner[j], inner[(j + 1) % h]))
        spoke = {}
        for j in range(h):
            for t in (2 * j, 2 * j + 1):
                spoke[j, t] = len(edges)
                edges.append((inner[j], ring[t]))
        # triangle (j', 2j, 2j+1)
        for j in range(h):
            faces.append(((spoke[j, 2 * j], 1), (ring_edges[2 * j], 1), (spoke[j, 2 * j + 1], -1)))
        # region between consecutive inner vertices: outer path 2j+1 .. 2j+2 (or further when m is odd)
        for j in range(h):
            j2 = (j + 1) % h
            start, stop = 2 * j + 1, 2 * j2
            walk = [(spoke[j, start], 1)]
            t = start
            while t % size != stop:
                walk.append((ring_edges[t % size], 1))
                t += 1
            walk.append((spoke[j2, stop], -1))
            walk.append((inner_edges[j], -1))
            faces.append(tuple(walk))
        ring = inner
        ring_edges = inner_edges
    faces.append(tuple((e, 1) for e in ring_edges))
    return TwoComplex(nv, tuple(edges), tuple(faces))


# cuts and short cycles


def _span_list(gens: Sequence[int]) -> list[int]:
    return gf2.span_words(list(gens))


def z_class_representatives(css: CSSCode, z: int) -> list[int]:
    """Every representative of the class of ``z`` (z plus the span of the Z checks)."""
    gens, _ = gf2.echelon(list(css.hz.rows))
    return [z ^ s for s in _span_list(gens)]


def lightest_in_coset(z: int, rows: Sequence[int], n: int, every: bool = False) -> list[int]:
    """Minimum-weight members of ``z + span(rows)``; all of them when ``every`` is set."""
    basis, pivots = gf2.echelon(list(rows))
    key = gf2.reduce(z, basis, pivots)
    budget = 1 << len(basis)
    spent = 0
    for w in range(n + 1):
        spent += comb(n, w)
        if spent > budget:
            break
        hits = []
        for idx in itertools.combinations(range(n), w):
            v = gf2.from_support(idx)
            if gf2.reduce(v, basis, pivots) == key:
                if not every:
                    return [v]
                hits.append(v)
        if hits:
            return sorted(hits)
    members = [z ^ s for s in _span_list(basis)]
    w = min(v.bit_count() for v in members)
    best = sorted(v for v in members if v.bit_count() == w)
    return best if every else best[:1]


def x_logical_representatives(css: CSSCode) -> list[int]:
    """Every nontrivial cycle: ker(hz) minus rowspace(hx)."""
    stab, _ = gf2.echelon(list(css.hx.rows))
    logical = css.x_logical_basis()
    out = []
    for s in _span_list(stab):
        for lg in _span_list(logical)[1:]:
            out.append(s ^ lg)
    return out


@dataclass
class CutResult:
    size: int
    witness: list[int]
    min_representative: int


def min_cut_for_logical(css: CSSCode, alpha: int, cap: int = DISTANCE_CAP) -> CutResult:
    """Smallest representative of the Z-logical class ``alpha`` and its support as a cut.

    The returned support is verified to meet every X-logical representative that
    anticommutes with ``alpha``.
    """
    _check_cap(css, cap)
    if css.k == 0:
        raise ComplexError("code has no logical qubits")
    if not css.is_z_logical(alpha):
        raise ComplexError("alpha is not a nontrivial Z-logical")
    best = lightest_in_coset(alpha, css.hz.rows, css.n)[0]
    # a cut leaves no cycle on the remaining qubits with odd overlap with alpha
    keep = [j for j in range(css.n) if not (best >> j) & 1]
    sub = BitMatrix.from_rows([_restrict(r, keep) for r in css.hz.rows], len(keep))
    for x in gf2.kernel_words(sub):
        if gf2.dot(_expand(x, keep), alpha):
            raise AssertionError("minimum representative support is not a cut")
    return CutResult(best.bit_count(), support(best), best)


def _restrict(word: int, cols: Sequence[int]) -> int:
    return sum(1 << i for i, j in enumerate(cols) if (word >> j) & 1)


def _expand(word: int, cols: Sequence[int]) -> int:
    return sum(1 << cols[i] for i in support(word))


def brute_force_min_cut(css: CSSCode, alpha: int, cap: int = 14) -> tuple[int, list[int]]:
    """Smallest qubit set hit by every X-logical representative anticommuting with ``alpha``."""
    if css.n > cap:
        raise CapExceeded(f"{css.n} qubits exceeds the brute-force cut cap {cap}")
    targets = sorted({x for x in x_logical_representatives(css) if gf2.dot(x, alpha)})
    # only inclusion-minimal targets matter
    minimal = [t for t in targets if not any(o != t and (o & t) == o for o in targets)]
    for size in range(css.n + 1):
        for idx in itertools.combinations(range(css.n), size):
            h = gf2.from_support(idx)
            if all(t & h for t in minimal):
                return size, list(idx)
    raise AssertionError("the full qubit set is always a cut")


def short_cycle_witness(css: CSSCode, cocycle: int, cap: int = DISTANCE_CAP) -> BitVector | None:
    """Lightest cycle with odd overlap with the nontrivial cocycle (None if there is none)."""
    _check_cap(css, cap)
    if css.hx.apply(cocycle).word:
        raise ComplexError("input is not a cocycle")
    if gf2.in_span(cocycle, css.hz.rows):
        raise ComplexError("cocycle is trivial")
    v = _min_weight_outside(gf2.kernel_words(css.hz), css.hz, (), css.n, odd_with=cocycle)
    return None if v is None else BitVector(css.n, v)


def minimal_cocycles(css: CSSCode) -> list[int]:
    """Every minimum-weight representative of every nontrivial Z-logical class."""
    out = []
    basis = css.z_logical_basis()
    for cls_word in _span_list(basis)[1:]:
        out.extend(lightest_in_coset(cls_word, css.hz.rows, css.n, every=True))
    return out


# integer lifts


@dataclass
class IntegerLift:
    d2: np.ndarray  # edges x faces
    d1: np.ndarray  # vertices x edges


def _complex_from_css(css: CSSCode) -> TwoComplex:
    edges = []
    cols = css.hz.T.rows
    for e, col in enumerate(cols):
        vs = support(col)
        if len(vs) != 2:
            raise ComplexError(f"qubit {e} is in {len(vs)} Z checks, need exactly 2")
        edges.append((vs[0], vs[1]))
    faces = []
    for fid, row in enumerate(css.hx.rows):
        faces.append(_euler_walk(edges, support(row), fid))
    return TwoComplex(css.hz.nrows, tuple(edges), tuple(faces))


def _euler_walk(edges, eids: list[int], fid: int):
    """Order a face's edges into one closed walk (Hierholzer)."""
    adj: dict[int, list[int]] = {}
    for e in eids:
        u, v = edges[e]
        adj.setdefault(u, []).append(e)
        adj.setdefault(v, []).append(e)
    if any(len(es) % 2 for es in adj.values()):
        raise ComplexError(f"face {fid} has odd degree at a vertex")
    used = set()
    start = edges[eids[0]][0]
    stack = [(start, None)]
    circuit = []
    while stack:
        w, via = stack[-1]
        while adj[w] and adj[w][-1] in used:
            adj[w].pop()
        if adj[w]:
            e = adj[w].pop()
            used.add(e)
            u, v = edges[e]
            stack.append((v if u == w else u, e))
        else:
            stack.pop()
            if via is not None:
                circuit.append((via, w))
    if len(used) != len(eids):
        raise ComplexError(f"face {fid} support is not a single closed walk")
    circuit.reverse()
    walk = []
    prev = start
    for e, head in circuit:
        u, v = edges[e]
        walk.append((e, 1 if (u, v) == (prev, head) else -1))
        prev = head
    return tuple(walk)


def integer_lift(obj: TwoComplex | CSSCode) -> IntegerLift:
    """Integer boundary maps with edges oriented from lower to higher vertex id."""
    c = _complex_from_css(obj) if isinstance(obj, CSSCode) else obj
    ne, nf = c.n_edges, len(c.faces)
    d1 = np.zeros((c.n_vertices, ne), dtype=np.int64)
    for e, (u, v) in enumerate(c.edges):
        lo, hi = min(u, v), max(u, v)
        d1[lo, e] -= 1
        d1[hi, e] += 1
    d2 = np.zeros((ne, nf), dtype=np.int64)
    for f, walk in enumerate(c.faces):
        for e, d in walk:
            u, v = c.edges[e]
            along = (u < v) == (d > 0)
            d2[e, f] += 1 if along else -1
    if np.any(d1 @ d2):
        raise AssertionError("integer boundary maps do not compose to zero")
    css = toric_code(c)
    if not np.array_equal(np.abs(d1) % 2, np.array(css.hz.to_lists(), dtype=np.int64).reshape(d1.shape)):
        raise AssertionError("vertex map does not reduce to Hz")
    if nf and not np.array_equal(np.abs(d2.T) % 2, np.array(css.hx.to_lists(), dtype=np.int64)):
        raise AssertionError("face map does not reduce to Hx")
    return IntegerLift(d2, d1)


def integer_weight(v: Iterable[int]) -> int:
    return int(sum(abs(int(a)) for a in v))


# reduction of graph matching codes


@dataclass(frozen=True)
class TwistedPlaquette:
    x_support: frozenset[int]
    z_dressing: frozenset[int]
    phase: complex  # 1 or 1j

    def operator(self, n: int) -> PauliOperator:
        x = gf2.from_support(self.x_support)
        z = gf2.from_support(self.z_dressing)
        op = PauliOperator(n, x, z, 0)
        return op.with_sign(1)

    @property
    def is_twisted(self) -> bool:
        return bool(self.z_dressing)


@dataclass(frozen=True)
class EdgeReduction:
    """Two-qubit Clifford for one matching edge, given by the images it keeps.

    ``check`` becomes Z on an ancilla, ``z_bar`` becomes Z and ``x_bar`` becomes X
    on the effective qubit.
    """

    edge: int
    u: int
    v: int
    check: PauliOperator
    z_bar: PauliOperator
    x_bar: PauliOperator

    def reduce(self, op: PauliOperator) -> tuple[int, int]:
        """(x, z) bits on the effective qubit of an operator commuting with the check."""
        if not op.commutes(self.check):
            raise ComplexError(f"operator anticommutes with the check of edge {self.edge}")
        mask = (1 << self.u) | (1 << self.v)
        local = PauliOperator(op.n, op.x & mask, op.z & mask)
        rows = [self.x_bar.symplectic, self.z_bar.symplectic, self.check.symplectic]
        m = BitMatrix.from_rows(rows, 2 * op.n).T
        sol = gf2.solve(m, local.symplectic)
        if sol is None:
            raise AssertionError("restricted operator outside the check commutant")
        return sol[0], sol[1]


@dataclass
class EffectiveCode:
    complex: TwoComplex
    plaquettes: list[TwistedPlaquette]
    reduction: dict[int, EdgeReduction]
    avoiding: list[int]
    s_prime: list[int]
    edge_of_qubit: list[int]  # matching edge id per effective qubit

    @property
    def untwisted(self) -> CSSCode:
        return toric_code(self.complex)

    def stabilizers(self) -> list[PauliOperator]:
        n = self.complex.n_edges
        stars = [PauliOperator(n, 0, row) for row in self.untwisted.hz.rows]
        return stars + [p.operator(n) for p in self.plaquettes]


def _pauli_letter(op: PauliOperator, q: int) -> str:
    return "IXZY"[((op.x >> q) & 1) | (((op.z >> q) & 1) << 1)]


def _anticommuting_label(label: str) -> str:
    return "X" if label != "X" else "Z"


def edge_reduction(g: LabeledTrivalentMultigraph, e: int, matching: frozenset[int]) -> EdgeReduction:
    ed = g.edges[e]
    chk = check_of_edge(g, e)
    z_bar = PauliOperator.from_letters(g.n_V, {ed.u: ed.label_u})

    def other_label(w: int) -> str:
        # label at w of its lowest-id non-matching edge; anticommutes with the matching label
        es = sorted(f for f in g.incident(w) if f not in matching)
        return g.edges[es[0]].label_at(w)

    x_bar = PauliOperator.from_letters(g.n_V, {ed.u: other_label(ed.u), ed.v: other_label(ed.v)})
    return EdgeReduction(e, ed.u, ed.v, chk, z_bar, x_bar)


def effective_code(code: GraphMatchingCode) -> EffectiveCode:
    """Reduce a graph matching code whose cycle set contains every avoiding cycle."""
    g = code.graph
    m = code.matching
    avoid = [c.word for c in avoiding_cycles(g, m)]
    avoid_set = set(avoid)
    missing = [c for c in avoid if c not in code.cycles]
    if missing:
        raise ComplexError("cycle set must contain every avoiding cycle")
    s_prime = [c for c in code.cycles if c not in avoid_set]
    if gf2.rank(avoid + s_prime) != len(avoid) + len(s_prime):
        raise ComplexError("extra cycles are not independent of the avoiding cycles")
    cycle_of_vertex = [-1] * g.n_V
    for i, c in enumerate(avoid):
        for e in support(c):
            cycle_of_vertex[g.edges[e].u] = i
            cycle_of_vertex[g.edges[e].v] = i
    medges = sorted(m)
    qubit_of_edge = {e: q for q, e in enumerate(medges)}
    eff_edges = []
    for e in medges:
        a, b = cycle_of_vertex[g.edges[e].u], cycle_of_vertex[g.edges[e].v]
        if a == b:
            raise DegenerateCodeError(f"both ends of matching edge {e} lie on the same avoiding cycle")
        eff_edges.append((a, b))
    faces = []
    for c in s_prime:
        faces.append(_face_walk(g, c, m, cycle_of_vertex, qubit_of_edge, eff_edges))
    cx = TwoComplex(len(avoid), tuple(eff_edges), tuple(faces))
    red = {e: edge_reduction(g, e, m) for e in medges}

    def reduce_op(op: PauliOperator) -> tuple[int, int]:
        x = z = 0
        for e in medges:
            a, b = red[e].reduce(op)
            q = qubit_of_edge[e]
            x |= a << q
            z |= b << q
        return x, z

    n = len(medges)
    css = toric_code(cx)
    for i, c in enumerate(avoid):
        x, z = reduce_op(cycle_operator(g, c))
        if x or z != css.hz.rows[i]:
            raise AssertionError(f"avoiding cycle {i} does not reduce to its vertex star")
    plaquettes = []
    for f, c in enumerate(s_prime):
        x, z = reduce_op(cycle_operator(g, c))
        if x != css.hx.rows[f]:
            raise AssertionError(f"cycle {f} does not reduce to X on its face")
        phase = 1j if (x & z).bit_count() % 2 else 1
        plaquettes.append(TwistedPlaquette(frozenset(support(x)), frozenset(support(z)), phase))
    eff = EffectiveCode(cx, plaquettes, red, avoid, s_prime, medges)
    stabs = eff.stabilizers()
    for i, a in enumerate(stabs):
        for b in stabs[i + 1:]:
            if not a.commutes(b):
                raise AssertionError("reduced stabilizers do not commute")
    return eff


def _face_walk(g, c: int, m, cycle_of_vertex, qubit_of_edge, eff_edges):
    """Matching edges met while walking the cycle, as a signed walk in the effective graph."""
    es = support(c)
    start_e = next((e for e in es if e in m), None)
    if start_e is None:
        raise ComplexError("cycle uses no matching edge")
    cset = set(es)
    walk = []
    e = start_e
    w = g.edges[e].u
    while True:
        w_next = g.edges[e].other(w)
        if e in m:
            q = qubit_of_edge[e]
            a = cycle_of_vertex[w]
            walk.append((q, 1 if eff_edges[q][0] == a else -1))
        cset.discard(e)
        nxt = [f for f in g.incident(w_next) if f in cset]
        w = w_next
        if not nxt:
            break
        e = nxt[0]
    return tuple(walk)


def with_avoiding(g: LabeledTrivalentMultigraph, m: Iterable[int], extra: Iterable[int]) -> GraphMatchingCode:
    """Graph matching code whose cycle set is every avoiding cycle plus ``extra``."""
    m = frozenset(m)
    return GraphMatchingCode(g, m, [c.word for c in avoiding_cycles(g, m)] + [int(c) for c in extra])


def independent_extra_cycles(g: LabeledTrivalentMultigraph, m: Iterable[int],
                             candidates: Iterable[int]) -> list[int]:
    """Greedy subset of candidates independent of the avoiding cycles and of each other."""
    base = [c.word for c in avoiding_cycles(g, m)]
    basis, pivots = gf2.echelon(base)
    out = []
    for c in candidates:
        c = c.word if isinstance(c, BitVector) else c
        r = gf2.reduce(c, basis, pivots)
        if r:
            out.append(c)
            basis, pivots = gf2.echelon(basis + [r])
    return out
