"""Spacetime check graphs and exact decoders.

Chains are packed ints over edge ids, syndromes packed ints over vertex ids.
Homology classes are labelled by inner products with a basis of logical
cocycles: class ``c`` has bit ``i`` set when the chain meets cocycle ``i`` an
odd number of times.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .gf2 import BitMatrix, support

DEFAULT_CYCLE_CAP = 22
DEFECT_CAP = 12


class DecodeError(ValueError):
    pass


class NoMatchingChain(DecodeError):
    pass


@dataclass(frozen=True)
class CheckGraph:
    """Detection-event graph; an edge with ``v is None`` is dangling."""

    n_vertices: int
    edges: tuple[tuple[int, int | None], ...]
    probs: tuple[float, ...]
    cocycles: tuple[int, ...] = ()
    cells: tuple[int, ...] = ()
    coords: tuple[tuple[int, int], ...] | None = None  # (spatial vertex, time)
    hole_centers: frozenset[int] = frozenset()  # spatial ids
    name: str = ""

    def __post_init__(self):
        if len(self.probs) != len(self.edges):
            raise DecodeError("one probability per edge")
        for p in self.probs:
            if not 0.0 <= p <= 1.0:
                raise DecodeError(f"edge probability {p} outside [0, 1]")
        for u, v in self.edges:
            if not 0 <= u < self.n_vertices or (v is not None and not 0 <= v < self.n_vertices):
                raise DecodeError("edge endpoint out of range")
        for cell in self.cells:
            for c in self.cocycles:
                if gf2.dot(cell, c):
                    raise DecodeError("logical cocycle has odd overlap with a 2-cell")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_classes(self) -> int:
        return 1 << len(self.cocycles)

    @cached_property
    def incidence(self) -> BitMatrix:
        rows = [0] * self.n_vertices
        for e, (u, v) in enumerate(self.edges):
            rows[u] ^= 1 << e
            if v is not None:
                rows[v] ^= 1 << e
        return BitMatrix.from_rows(rows, self.n_edges)

    def class_of(self, chain: int) -> int:
        out = 0
        for i, c in enumerate(self.cocycles):
            if gf2.dot(chain, c):
                out |= 1 << i
        return out

    def with_probs(self, probs: Sequence[float]) -> "CheckGraph":
        return CheckGraph(self.n_vertices, self.edges, tuple(probs), self.cocycles, self.cells,
                          self.coords, self.hole_centers, self.name)


@dataclass
class Coloring:
    red: int
    blue: int

    @property
    def once_colored(self) -> int:
        return self.red ^ self.blue


@dataclass(frozen=True)
class ClassPosterior:
    probs: tuple[float, ...]

    def __getitem__(self, c: int) -> float:
        return self.probs[c]

    @property
    def best(self) -> int:
        return max(range(len(self.probs)), key=lambda c: (self.probs[c], -c))

    @property
    def is_tie(self) -> bool:
        top = sorted(self.probs, reverse=True)
        return len(top) > 1 and abs(top[0] - top[1]) <= 1e-12 * max(top[0], 1e-300)


@dataclass
class MLResult:
    posterior: ClassPosterior
    chosen: int
    tie: bool
    blue: int


def syndrome(g: CheckGraph, chain: int) -> int:
    """Mod-2 boundary of a chain; dangling edges flip only their one vertex."""
    return g.incidence.apply(chain).word


def sample_errors(g: CheckGraph, rng: np.random.Generator) -> int:
    hits = rng.random(g.n_edges) < np.asarray(g.probs)
    return gf2.pack(hits.astype(np.uint8).tolist())


def sample_errors_batch(g: CheckGraph, rng: np.random.Generator, trials: int) -> np.ndarray:
    """Boolean array (trials, n_edges) of independent edge errors."""
    return rng.random((trials, g.n_edges)) < np.asarray(g.probs)


# exact enumeration


class ExactSolver:
    """Enumerates the cycle space once and answers per-syndrome queries from a cache."""

    def __init__(self, g: CheckGraph, cap: int = DEFAULT_CYCLE_CAP):
        self.g = g
        self.kernel = gf2.kernel_words(g.incidence)
        if len(self.kernel) > cap:
            raise DecodeError(f"cycle-space dimension {len(self.kernel)} exceeds cap {cap}")
        probs = np.asarray(g.probs, dtype=float)
        if np.any(probs >= 1.0):
            raise DecodeError("exact decoding needs every edge probability below 1")
        self.zero = probs == 0.0
        with np.errstate(divide="ignore"):
            self.logr = np.where(self.zero, 0.0, np.log(np.where(self.zero, 1.0, probs) / (1.0 - probs)))
        cycles = np.array(gf2.span_words(self.kernel), dtype=object)
        self.cycle_words = cycles
        self.cycle_bits = _bits_matrix(cycles, g.n_edges)
        self._cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._coc = np.array([[(c >> e) & 1 for e in range(g.n_edges)] for c in g.cocycles],
                             dtype=np.int64).reshape(len(g.cocycles), g.n_edges)

    def _particular(self, s: int) -> int:
        sol = gf2.solve(self.g.incidence, s)
        if sol is None:
            raise NoMatchingChain("no chain has this syndrome")
        return sol.word

    def chains(self, s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(chain words, normalized weights, class labels) for every chain with boundary s."""
        hit = self._cache.get(s)
        if hit is not None:
            return hit
        base = self._particular(s)
        base_bits = np.array([(base >> e) & 1 for e in range(self.g.n_edges)], dtype=np.uint8)
        bits = self.cycle_bits ^ base_bits
        allowed = ~(bits[:, self.zero].any(axis=1))
        logw = bits.astype(float) @ self.logr
        logw[~allowed] = -np.inf
        top = logw.max()
        w = np.exp(logw - top)
        w /= w.sum()
        words = np.array([int(c) ^ base for c in self.cycle_words], dtype=object)
        if len(self.g.cocycles):
            labels = ((bits.astype(np.int64) @ self._coc.T) % 2) @ (1 << np.arange(len(self.g.cocycles)))
        else:
            labels = np.zeros(len(words), dtype=np.int64)
        out = (words, w, labels.astype(np.int64))
        self._cache[s] = out
        return out

    def posterior(self, s: int) -> ClassPosterior:
        _, w, labels = self.chains(s)
        probs = np.bincount(labels, weights=w, minlength=self.g.n_classes)
        return ClassPosterior(tuple(float(x) for x in probs / probs.sum()))

    def ml_decode(self, s: int) -> MLResult:
        post = self.posterior(s)
        chosen = post.best
        words, w, labels = self.chains(s)
        idx = np.flatnonzero(labels == chosen)
        best = idx[np.argmax(w[idx])]
        return MLResult(post, chosen, post.is_tie, int(words[best]))

    def mc_decode(self, s: int, rng: np.random.Generator) -> int:
        words, w, _ = self.chains(s)
        return int(words[rng.choice(len(w), p=w)])


def _bits_matrix(words, n: int) -> np.ndarray:
    out = np.zeros((len(words), n), dtype=np.uint8)
    for i, wd in enumerate(words):
        for j in support(int(wd)):
            out[i, j] = 1
    return out


def ml_decode(g: CheckGraph, s: int, cap: int = DEFAULT_CYCLE_CAP) -> MLResult:
    """Exact class posterior by full cycle-space enumeration, plus the best chain in the chosen class."""
    return ExactSolver(g, cap).ml_decode(s)


def mc_decode(g: CheckGraph, s: int, rng: np.random.Generator, cap: int = DEFAULT_CYCLE_CAP,
              solver: ExactSolver | None = None) -> int:
    """A chain drawn with probability proportional to its weight among chains with boundary s."""
    return (solver or ExactSolver(g, cap)).mc_decode(s, rng)


# minimum weight


def _edge_cost(p: float) -> float:
    if p <= 0.0:
        return math.inf
    if p > 0.5:
        raise DecodeError("minimum-weight decoding assumes p <= 1/2")
    return -math.log(p / (1.0 - p))


def _shortest_paths(g: CheckGraph, source: int, boundary: int) -> dict[int, tuple[float, tuple[int, ...]]]:
    """Dijkstra with ties broken by the lexicographically smallest edge sequence."""
    adj: list[list[tuple[int, int, float]]] = [[] for _ in range(g.n_vertices + 1)]
    for e, (u, v) in enumerate(g.edges):
        c = _edge_cost(g.probs[e])
        if math.isinf(c):
            continue
        w = boundary if v is None else v
        adj[u].append((w, e, c))
        adj[w].append((u, e, c))
    best: dict[int, tuple[float, tuple[int, ...]]] = {}
    heap = [(0.0, (), source)]
    while heap:
        d, path, w = heapq.heappop(heap)
        if w in best:
            continue
        best[w] = (d, path)
        if w == boundary and w != source:
            continue
        for o, e, c in adj[w]:
            if o not in best:
                heapq.heappush(heap, (round(d + c, 9), path + (e,), o))
    return best


def mwpm_decode(g: CheckGraph, s: int) -> int:
    """Minimum total log-odds weight chain with boundary s, by exhaustive pairing of defects."""
    defects = support(s)
    if len(defects) > DEFECT_CAP:
        raise DecodeError(f"{len(defects)} flagged vertices exceeds cap {DEFECT_CAP}")
    if not defects:
        return 0
    boundary = g.n_vertices
    paths = {d: _shortest_paths(g, d, boundary) for d in defects}
    k = len(defects)

    def path_chain(a: int, b: int) -> tuple[float, int, tuple[int, ...]] | None:
        hit = paths[a].get(b)
        if hit is None:
            return None
        chain = gf2.from_support(hit[1])
        return hit[0], chain, hit[1]

    memo: dict[int, tuple[float, tuple[int, ...], int] | None] = {}

    def solve(mask: int):
        if mask == 0:
            return (0.0, (), 0)
        if mask in memo:
            return memo[mask]
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        options = []
        partners = [None] + [j for j in range(k) if (rest >> j) & 1]
        for j in partners:
            hit = path_chain(defects[i], boundary if j is None else defects[j])
            if hit is None:
                continue
            sub = solve(rest if j is None else rest & ~(1 << j))
            if sub is None:
                continue
            cost = round(hit[0] + sub[0], 9)
            chain = hit[1] ^ sub[2]
            options.append((cost, tuple(support(chain)), chain))
        memo[mask] = min(options) if options else None
        return memo[mask]

    out = solve((1 << k) - 1)
    if out is None:
        raise NoMatchingChain("defects cannot be paired")
    return out[2]


# Peierls


def peierls_bound(length: int, p: float) -> float:
    """Average over red subsets of the chance an MC decoder colors every edge of the path once."""
    r = p / (1.0 - p)
    total = 0.0
    for m in range(length + 1):
        x = r ** (length - 2 * m)
        total += math.comb(length, m) * p ** m * (1 - p) ** (length - m) * x / (x + 1.0)
    return total


def cycle_graph(length: int, p: float) -> CheckGraph:
    """A single closed loop of ``length`` edges; length 2 is a pair of parallel edges."""
    if length < 2:
        raise DecodeError("a closed loop needs at least 2 edges")
    edges = tuple((i, (i + 1) % length) for i in range(length))
    return CheckGraph(length, edges, (p,) * length, (1,), name=f"cycle{length}")


def peierls_exhaustive(length: int, p: float) -> float:
    """Exact once-colored probability on a loop by enumerating red subsets and MC chain weights."""
    g = cycle_graph(length, p)
    solver = ExactSolver(g)
    full = (1 << length) - 1
    total = 0.0
    for red in range(1 << length):
        k = red.bit_count()
        pr = p ** k * (1 - p) ** (length - k)
        words, w, _ = solver.chains(syndrome(g, red))
        for word, wt in zip(words, w):
            if red ^ int(word) == full:
                total += pr * wt
    return total


def once_colored_probability(g: CheckGraph, cycle: int, trials: int, rng: np.random.Generator,
                             solver: ExactSolver | None = None) -> tuple[float, float]:
    """Frequency with which red XOR blue is exactly the given cycle, with its standard error."""
    if any(p == 0 for p in g.probs) and all(p == 0 for p in g.probs):
        return 0.0, 0.0
    solver = solver or ExactSolver(g)
    hits = 0
    for _ in range(trials):
        red = sample_errors(g, rng)
        blue = solver.mc_decode(syndrome(g, red), rng)
        hits += (red ^ blue) == cycle
    est = hits / trials
    return est, math.sqrt(max(est * (1 - est), 1.0 / trials) / trials)


# failure statistics


def decoder_failure(g: CheckGraph, red: int, blue: int) -> int:
    if syndrome(g, red) != syndrome(g, blue):
        raise AssertionError("decoder output does not reproduce the syndrome")
    return g.class_of(red ^ blue)


def exact_ml_failure(g: CheckGraph) -> float:
    """Exact ML failure probability (ties count half) by enumerating every error pattern."""
    table = _pattern_table(g)
    fail = 0.0
    for probs in table.values():
        fail += _ml_loss(probs)
    return fail


def exact_mc_failure(g: CheckGraph) -> float:
    """Exact failure of the MC decoder: it picks class c with its posterior probability."""
    fail = 0.0
    for probs in _pattern_table(g).values():
        tot = sum(probs)
        if tot > 0:
            fail += sum(pc * (1 - pc / tot) for pc in probs)
    return fail


PATTERN_CAP = 22


def _pattern_table(g: CheckGraph) -> dict[int, list[float]]:
    """Joint probability of (syndrome, class) over every red pattern."""
    n = g.n_edges
    if n > PATTERN_CAP:
        raise DecodeError(f"{n} edges is too many to enumerate error patterns")
    if g.n_vertices + len(g.cocycles) > 62:
        raise DecodeError("syndrome keys do not fit in 64 bits")
    pats = np.arange(1 << n, dtype=np.int64)
    syn = np.zeros(1 << n, dtype=np.int64)
    cls = np.zeros(1 << n, dtype=np.int64)
    prob = np.ones(1 << n)
    cols = g.incidence.T.rows
    for e in range(n):
        bit = (pats >> e) & 1
        syn ^= bit * cols[e]
        for i, c in enumerate(g.cocycles):
            if (c >> e) & 1:
                cls ^= bit << i
        prob *= np.where(bit == 1, g.probs[e], 1.0 - g.probs[e])
    keys, inv = np.unique(syn * g.n_classes + cls, return_inverse=True)
    sums = np.bincount(inv, weights=prob)
    table: dict[int, list[float]] = {}
    for key, val in zip(keys.tolist(), sums.tolist()):
        table.setdefault(key // g.n_classes, [0.0] * g.n_classes)[key % g.n_classes] += val
    return table


def _ml_loss(probs: Sequence[float]) -> float:
    # a tied decoder picks uniformly among winners, which still loses sum - max on average
    return sum(probs) - max(probs)


# vacancy model


@dataclass(frozen=True)
class VacancySpec:
    """Square patch of detection vertices; sides are left, right, bottom, top."""

    Lx: int
    Ly: int
    sides: tuple[str, str, str, str] = ("rough", "rough", "smooth", "smooth")
    dead: frozenset[tuple[tuple[int, int], tuple[int, int]]] = frozenset()
    T: int = 1

    def __post_init__(self):
        if self.T < 1:
            raise DecodeError("T must be at least 1")
        for side in self.sides:
            if side not in ("rough", "smooth", "periodic"):
                raise DecodeError(f"unknown boundary type {side!r}")
        for a, b in self.dead:
            if not (self._inside(a) and self._inside(b)):
                raise DecodeError(f"dead edge {a}-{b} outside the patch")

    def _inside(self, v) -> bool:
        return 0 <= v[0] < self.Lx and 0 <= v[1] < self.Ly

    @property
    def periodic(self) -> bool:
        return all(s == "periodic" for s in self.sides)

    def to_text(self) -> str:
        lines = [f"Lx={self.Lx}", f"Ly={self.Ly}", f"T={self.T}", "sides=" + ",".join(self.sides)]
        for a, b in sorted(self.dead):
            lines.append(f"dead={a[0]},{a[1]}-{b[0]},{b[1]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "VacancySpec":
        vals: dict[str, str] = {}
        dead = set()
        for ln in text.splitlines():
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            key, val = (s.strip() for s in ln.split("=", 1))
            if key == "dead":
                a, b = val.split("-")
                dead.add((tuple(map(int, a.split(","))), tuple(map(int, b.split(",")))))
            else:
                vals[key] = val
        return cls(int(vals["Lx"]), int(vals["Ly"]), tuple(vals.get("sides", "rough,rough,smooth,smooth").split(",")),
                   frozenset(dead), int(vals.get("T", 1)))


def _norm_edge(a, b):
    return (a, b) if a <= b else (b, a)


def build_bulk_graph(spec: VacancySpec, p: float = 0.05) -> CheckGraph:
    """Spatial check graph with holes cut and filled by hole centers, times a T-vertex interval."""
    Lx, Ly = spec.Lx, spec.Ly
    per = spec.periodic
    if not per and "periodic" in spec.sides:
        raise DecodeError("periodic boundaries must be used on all four sides")

    def step(v, dx, dy):
        x, y = v[0] + dx, v[1] + dy
        if per:
            return (x % Lx, y % Ly)
        if 0 <= x < Lx and 0 <= y < Ly:
            return (x, y)
        return None

    grid = [(x, y) for x in range(Lx) for y in range(Ly)]
    sedges = []  # spatial edges (a, b) with b None for dangling, plus a tag
    seen = set()
    for v in grid:
        for dx, dy in ((1, 0), (0, 1)):
            w = step(v, dx, dy)
            if w is not None and w != v:
                key = (_norm_edge(v, w), dx)
                if key not in seen:
                    seen.add(key)
                    sedges.append((v, w, "h" if dx else "v"))
    dead = {_norm_edge(a, b) for a, b in spec.dead}
    for d in dead:
        if not any(_norm_edge(a, b) == d for a, b, _ in sedges):
            raise DecodeError(f"dead edge {d} is not a lattice edge")
    removed = {v for d in dead for v in d}
    live = [v for v in grid if v not in removed]
    # rough sides: each boundary vertex carries a dangling edge
    dangling = []
    if not per:
        side_vertices = {
            0: [(0, y) for y in range(Ly)], 1: [(Lx - 1, y) for y in range(Ly)],
            2: [(x, 0) for x in range(Lx)], 3: [(x, Ly - 1) for x in range(Lx)],
        }
        for side, kind in enumerate(spec.sides):
            if kind == "rough":
                dangling += [(v, side) for v in side_vertices[side] if v not in removed]
    # holes: connected groups of removed vertices
    holes: list[set] = []
    for v in sorted(removed):
        if any(v in h for h in holes):
            continue
        comp, stack = {v}, [v]
        while stack:
            a = stack.pop()
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                b = step(a, dx, dy)
                if b in removed and b not in comp:
                    comp.add(b)
                    stack.append(b)
        holes.append(comp)
    vid = {v: i for i, v in enumerate(live)}
    n_spatial = len(live) + len(holes)
    centers = list(range(len(live), n_spatial))
    spatial_edges: list[tuple[int, int | None, str]] = []
    for a, b, kind in sedges:
        if a in removed or b in removed:
            continue
        spatial_edges.append((vid[a], vid[b], kind))
    for v, side in dangling:
        spatial_edges.append((vid[v], None, f"d{side}"))
    for h, comp in enumerate(holes):
        rim = sorted({b for a in comp for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
                      for b in [step(a, dx, dy)] if b is not None and b not in removed})
        for b in rim:
            spatial_edges.append((centers[h], vid[b], "s"))
    # the logical cocycle must cross a cut column untouched by holes
    cocycle_tags = _cut_edges(spec, live, removed, spatial_edges, vid)
    # spacetime product
    T = spec.T
    edges: list[tuple[int, int | None]] = []
    coords = []
    for t in range(T):
        for sv in range(n_spatial):
            coords.append((sv, t))
    space_id = {}
    for t in range(T):
        for k, (a, b, _) in enumerate(spatial_edges):
            space_id[k, t] = len(edges)
            edges.append((t * n_spatial + a, None if b is None else t * n_spatial + b))
    time_id = {}
    for t in range(T - 1):
        for sv in range(n_spatial):
            time_id[sv, t] = len(edges)
            edges.append((t * n_spatial + sv, (t + 1) * n_spatial + sv))
    cocycles = []
    for tags in cocycle_tags:
        c = 0
        for t in range(T):
            for k in tags:
                c |= 1 << space_id[k, t]
        cocycles.append(c)
    cells = []
    # tube 2-cells: a spatial edge at t and t+1 with the two timelike edges between
    for t in range(T - 1):
        for k, (a, b, _) in enumerate(spatial_edges):
            cell = (1 << space_id[k, t]) | (1 << space_id[k, t + 1]) | (1 << time_id[a, t])
            if b is not None:
                cell |= 1 << time_id[b, t]
            cells.append(cell)
    # surviving square plaquettes in every time slice
    index = {}
    for k, (a, b, _) in enumerate(spatial_edges):
        if b is not None:
            index[_norm_edge(a, b)] = k
    for v in grid:
        corners = [v, step(v, 1, 0), step(v, 1, 1) if step(v, 1, 0) else None, step(v, 0, 1)]
        if None in corners or any(c in removed for c in corners):
            continue
        ids = [vid[c] for c in corners]
        ks = [index.get(_norm_edge(ids[i], ids[(i + 1) % 4])) for i in range(4)]
        if None in ks or len(set(ks)) < 4:
            continue
        for t in range(T):
            cells.append(sum(1 << space_id[k, t] for k in ks))
    return CheckGraph(n_spatial * T, tuple(edges), (p,) * len(edges), tuple(cocycles), tuple(cells),
                      tuple(coords), frozenset(centers), name=f"bulk{Lx}x{Ly}T{T}")


def _cut_edges(spec: VacancySpec, live, removed, spatial_edges, vid) -> list[list[int]]:
    """Spatial edge indices of each logical cocycle."""
    Lx, Ly = spec.Lx, spec.Ly
    pos = {i: v for v, i in vid.items()}
    out = []

    def column_cut(axis: int, size: int) -> list[int]:
        for c in range(size):
            c2 = (c + 1) % size
            if any(v[axis] in (c, c2) for v in removed):
                continue
            ks = [k for k, (a, b, kind) in enumerate(spatial_edges)
                  if kind == ("h" if axis == 0 else "v") and b is not None
                  and {pos[a][axis], pos[b][axis]} == {c, c2}]
            if ks:
                return ks
        raise DecodeError("every cut line meets a hole; no clean logical cocycle")

    if spec.periodic:
        return [column_cut(0, Lx), column_cut(1, Ly)]
    s = spec.sides
    if s[0] == s[1] == "rough" and s[2] == s[3] == "smooth":
        ks = [k for k, (_, b, kind) in enumerate(spatial_edges) if kind == "d0"]
        if not ks or not _reaches(spatial_edges, len(vid), "d0", "d1", len(live) + 0):
            raise DecodeError("dead edges disconnect the two rough sides")
        out.append(ks)
    elif s[2] == s[3] == "rough" and s[0] == s[1] == "smooth":
        ks = [k for k, (_, b, kind) in enumerate(spatial_edges) if kind == "d2"]
        if not ks or not _reaches(spatial_edges, len(vid), "d2", "d3", len(live) + 0):
            raise DecodeError("dead edges disconnect the two rough sides")
        out.append(ks)
    else:
        raise DecodeError("boundary conditions leave no logical qubit")
    return out


def _reaches(spatial_edges, n_live: int, start_tag: str, end_tag: str, _unused) -> bool:
    n = 1 + max(max(a, b if b is not None else 0) for a, b, _ in spatial_edges)
    adj: list[list[int]] = [[] for _ in range(n)]
    starts, ends = set(), set()
    for a, b, kind in spatial_edges:
        if b is None:
            if kind == start_tag:
                starts.add(a)
            if kind == end_tag:
                ends.add(a)
        else:
            adj[a].append(b)
            adj[b].append(a)
    seen = set(starts)
    stack = list(starts)
    while stack:
        w = stack.pop()
        if w in ends:
            return True
        for o in adj[w]:
            if o not in seen:
                seen.add(o)
                stack.append(o)
    return False


def local_star_graph(d: int, T: int, p: float) -> CheckGraph:
    """Hole center joined to d neighbors, over T time slices.

    Only spokes and timelike edges carry errors. The hole center has a
    dangling timelike edge below time 0 and above time T-1, and the logical
    cocycle is the lower one.
    """
    n_spatial = d + 1
    edges: list[tuple[int, int | None]] = []
    for t in range(T):
        for b in range(1, n_spatial):
            edges.append((t * n_spatial, t * n_spatial + b))
    for t in range(T - 1):
        for sv in range(n_spatial):
            edges.append((t * n_spatial + sv, (t + 1) * n_spatial + sv))
    bottom = len(edges)
    edges.append((0, None))
    edges.append(((T - 1) * n_spatial, None))
    coords = tuple((sv, t) for t in range(T) for sv in range(n_spatial))
    return CheckGraph(n_spatial * T, tuple(edges), (p,) * len(edges), (1 << bottom,), (), coords,
                      frozenset({0}), name=f"star{d}T{T}")


# two-step hole decoder


@dataclass
class HoleDecodeResult:
    blue: int
    overall_errors: list[int]  # parity per slot: bottom end, each time step, top end
    failed: bool
    tie: bool

    @property
    def overall_count(self) -> int:
        return sum(self.overall_errors)


def _hole_split(g: CheckGraph):
    if g.coords is None:
        raise DecodeError("graph carries no spacetime coordinates")
    if len(g.hole_centers) != 1:
        raise DecodeError(f"expected exactly one hole center, found {len(g.hole_centers)}")
    (h,) = g.hole_centers
    hole_vertices = {i for i, (sv, _) in enumerate(g.coords) if sv == h}
    keep = [i for i in range(g.n_vertices) if i not in hole_vertices]
    new_id = {v: i for i, v in enumerate(keep)}
    mod_edges, edge_map, column = [], {}, []
    for e, (u, v) in enumerate(g.edges):
        inside = [x for x in (u, v) if x is not None and x in hole_vertices]
        if not inside:
            edge_map[e] = len(mod_edges)
            mod_edges.append((new_id[u], None if v is None else new_id[v]))
        elif len(inside) == 1 and v is not None:
            # spoke: becomes a dangling edge at the neighbor
            other = v if u in hole_vertices else u
            edge_map[e] = len(mod_edges)
            mod_edges.append((new_id[other], None))
        else:
            column.append(e)
    mod = CheckGraph(len(keep), tuple(mod_edges), tuple(g.probs[e] for e in edge_map), (), (),
                     tuple(g.coords[v] for v in keep), frozenset(), name=g.name + "-cut")
    return mod, edge_map, column, hole_vertices, new_id


class TwoStepHoleDecoder:
    """MC decoding with the hole center removed, then the lighter of the two column completions."""

    def __init__(self, g: CheckGraph, cap: int = DEFAULT_CYCLE_CAP):
        self.g = g
        self.mod, self.edge_map, self.column, self.hole_vertices, self.new_id = _hole_split(g)
        self.solver = ExactSolver(self.mod, cap)
        self.inverse = {m: e for e, m in self.edge_map.items()}
        T = 1 + max(t for _, t in g.coords)
        self.T = T
        # slots are the column's dangling ends plus every internal time step, bottom to top
        internal: list[list[int]] = [[] for _ in range(T - 1)]
        bottom, top = [], []
        for e, (u, v) in enumerate(g.edges):
            if v is None:
                if u in self.hole_vertices:
                    (bottom if g.coords[u][1] == 0 else top).append(e)
            elif g.coords[u][0] == g.coords[v][0] and g.coords[u][1] != g.coords[v][1]:
                internal[min(g.coords[u][1], g.coords[v][1])].append(e)
        self.steps = [bottom] + internal + [top]
        self.column_basis = self._column_solutions()

    def _column_solutions(self):
        col_mask = gf2.from_support(self.column)
        sub = BitMatrix.from_rows([r & col_mask for r in self.g.incidence.rows], self.g.n_edges)
        kern = [k for k in gf2.kernel_words(sub) if k & col_mask == k and k]
        if len(kern) != 1:
            raise DecodeError("hole column does not admit exactly two completions")
        return kern[0], sub

    def decode(self, red: int, rng: np.random.Generator) -> HoleDecodeResult:
        g = self.g
        s = syndrome(g, red)
        mod_s = 0
        for v, i in self.new_id.items():
            if (s >> v) & 1:
                mod_s |= 1 << i
        blue_mod = self.solver.mc_decode(mod_s, rng)
        blue = 0
        for m in support(blue_mod):
            blue |= 1 << self.inverse[m]
        residual = s ^ syndrome(g, blue)
        flip, sub = self.column_basis
        sol = gf2.solve(sub, residual)
        if sol is None:
            raise AssertionError("hole column cannot absorb the remaining syndrome")
        a, b = sol.word, sol.word ^ flip
        wa, wb = a.bit_count(), b.bit_count()
        pick = a if (wa, a) <= (wb, b) else b
        overall = []
        for es in self.steps:
            cnt = sum((red >> e) & 1 for e in es)
            cnt += sum((blue >> e) & 1 for e in es if e not in self.column)
            overall.append(cnt % 2)
        final = blue | pick
        failed = bool(decoder_failure(g, red, final))
        tie = wa == wb
        if not tie and failed != (2 * sum(overall) > len(overall)):
            raise AssertionError("overall-error count disagrees with the homology class")
        return HoleDecodeResult(final, overall, failed, tie)


def two_step_hole_decoder(g: CheckGraph, rng: np.random.Generator, red: int | None = None,
                          decoder: TwoStepHoleDecoder | None = None) -> tuple[int, list[int], bool]:
    """(blue chain, per-step overall-error parities, logical failure) for one sampled disorder."""
    decoder = decoder or TwoStepHoleDecoder(g)
    if red is None:
        red = sample_errors(g, rng)
    out = decoder.decode(red, rng)
    return out.blue, out.overall_errors, out.failed


# local star exact ML by transfer matrix over time


def star_ml_classes(d: int, T: int, p: float, red: np.ndarray) -> np.ndarray:
    """Class posteriors (trials, 2) for the local star graph, by a transfer matrix over time.

    ``red`` is a boolean array (trials, n_edges) in the edge order of
    :func:`local_star_graph`. The state carries the timelike bit entering each
    neighbor from below and the hole-column bit entering the center.
    """
    g = local_star_graph(d, T, p)
    trials = red.shape[0]
    inc = np.array(g.incidence.to_lists(), dtype=np.uint8)
    syn = (red.astype(np.uint8) @ inc.T) % 2  # (trials, vertices)
    r = p / (1 - p)
    n_spatial = d + 1
    n_state = 1 << (d + 1)
    states = np.arange(n_state)
    pats = np.arange(1 << d)
    pat_w = np.array([r ** bin(s).count("1") for s in pats])
    out = np.zeros((trials, 2))
    nb_mask = (1 << d) - 1
    popcnt = np.array([bin(x).count("1") for x in range(1 << d)])
    for cls in (0, 1):
        # state bits 0..d-1: neighbor timelike from below; bit d: column edge from below
        vec = np.zeros((trials, n_state))
        vec[:, cls << d] = r ** cls
        for t in range(T):
            sn = np.zeros((trials,), dtype=np.int64)
            for b in range(d):
                sn |= syn[:, t * n_spatial + 1 + b].astype(np.int64) << b
            sh = syn[:, t * n_spatial].astype(np.int64)
            new = np.zeros_like(vec)
            for s_pat in pats:
                below = states & nb_mask
                col = (states >> d) & 1
                # neighbor timelike above: syndrome ^ below ^ spoke
                above = (below[None, :] ^ sn[:, None] ^ s_pat)  # (trials, states)
                col_up = col[None, :] ^ sh[:, None] ^ (popcnt[s_pat] & 1)
                w = vec * pat_w[s_pat]
                if t < T - 1:
                    w = w * np.power(r, popcnt[above])
                    w = w * np.where(col_up == 1, r, 1.0)
                    idx = above | (col_up << d)
                    np.add.at(new, (np.arange(trials)[:, None].repeat(n_state, 1), idx), w)
                else:
                    ok = above == 0
                    w = np.where(ok, w, 0.0) * np.where(col_up == 1, r, 1.0)
                    new[:, 0] += w.sum(axis=1)
            vec = new
        out[:, cls] = vec[:, 0]
    tot = out.sum(axis=1, keepdims=True)
    return out / tot
