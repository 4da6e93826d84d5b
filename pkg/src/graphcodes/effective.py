"""Closed-form effective models for decoding near high-degree vertices.

Covers the strand column (a repetition code whose bits are parities of
bundles of parallel edges), the hole-center strand accounting, the
two-spin-flip ladder and its transfer matrices, the gluing bound, merging of
two nearby hole centers, and the piecewise single-hole failure prediction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decode import CheckGraph, DecodeError


class ModelError(ValueError):
    pass


def _strands(p, d: int | None = None) -> tuple[float, ...]:
    if isinstance(p, (int, float)):
        if d is None:
            raise ModelError("give d with a scalar probability")
        return (float(p),) * d
    return tuple(float(x) for x in p)


def parity_probabilities(p, d: int | None = None) -> tuple[float, float]:
    """(P_even, P_odd) for the number of flipped strands in one bundle."""
    probs = _strands(p, d)
    prod = 1.0
    for q in probs:
        if not 0.0 <= q <= 1.0:
            raise ModelError(f"strand probability {q} outside [0, 1]")
        prod *= 1.0 - 2.0 * q
    return (1.0 + prod) / 2.0, (1.0 - prod) / 2.0


@dataclass(frozen=True)
class ColumnModel:
    """T column vertices joined by bundles of parallel strands.

    Periodic columns have T bundles (the last wraps to vertex 0). Dangling
    columns have T-1 internal bundles plus a dangling bundle at each end, so
    T+1 in all.
    """

    T: int
    probs: tuple[float, ...]
    boundary: str = "periodic"

    def __post_init__(self):
        if self.T < 1:
            raise ModelError("T must be at least 1")
        if self.boundary not in ("periodic", "dangling"):
            raise ModelError(f"unknown boundary {self.boundary!r}")
        for q in self.probs:
            if not 0.0 <= q <= 0.5:
                raise ModelError(f"strand probability {q} outside [0, 1/2]")

    @property
    def d(self) -> int:
        return len(self.probs)

    @property
    def bundles(self) -> int:
        return self.T if self.boundary == "periodic" else self.T + 1

    @property
    def flip_probability(self) -> float:
        return parity_probabilities(self.probs)[1]


def majority_failure(n: int, q: float) -> float:
    """Probability that more than half of n independent bits flip; an exact half counts 1/2."""
    total = 0.0
    for s in range(n // 2 + 1, n + 1):
        total += math.comb(n, s) * q ** s * (1 - q) ** (n - s)
    if n % 2 == 0:
        total += 0.5 * math.comb(n, n // 2) * (q * (1 - q)) ** (n // 2)
    return total


def column_failure_probability(model: ColumnModel) -> float:
    return majority_failure(model.bundles, model.flip_probability)


def shor_column_checkgraph(T: int, d: int, p, dangling: bool = False) -> CheckGraph:
    """Check graph of a strand column; the logical cocycle is the wrap (or bottom dangling) bundle."""
    probs = _strands(p, d)
    edges: list[tuple[int, int | None]] = []
    eprobs: list[float] = []
    cocycle = 0
    if dangling:
        for q in probs:
            cocycle |= 1 << len(edges)
            edges.append((0, None))
            eprobs.append(q)
        for i in range(T - 1):
            for q in probs:
                edges.append((i, i + 1))
                eprobs.append(q)
        for q in probs:
            edges.append((T - 1, None))
            eprobs.append(q)
    else:
        for i in range(T):
            for q in probs:
                if i == T - 1:
                    cocycle |= 1 << len(edges)
                edges.append((i, (i + 1) % T))
                eprobs.append(q)
    kind = "dangling" if dangling else "periodic"
    return CheckGraph(T, tuple(edges), tuple(eprobs), (cocycle,), name=f"column-{kind}-T{T}-d{d}")


def sample_column_failures(model: ColumnModel, trials: int, rng: np.random.Generator,
                           chunk: int = 20000) -> int:
    """Count decoding failures by sampling every strand and decoding bundle parities by majority."""
    if model.d == 0:
        return int(rng.binomial(trials, 0.5)) if model.bundles % 2 == 0 else 0
    probs = np.asarray(model.probs)
    n = model.bundles
    fails = 0.0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        red = rng.random((m, n, model.d)) < probs
        odd = red.sum(axis=2) % 2
        flips = odd.sum(axis=1)
        fails += np.count_nonzero(2 * flips > n)
        ties = np.count_nonzero(2 * flips == n)
        fails += rng.binomial(ties, 0.5) if ties else 0
        done += m
    return int(fails)


# hole center


@dataclass(frozen=True)
class HoleCenterColumn:
    model: ColumnModel
    suppression: float  # leading-order -log of prod(1 - 2 p_y)


def hole_center_effective(p: float, d: int, T: int = 1, boundary: str = "dangling") -> HoleCenterColumn:
    """Strand column seen by the hole center: d strands at p^3 plus round(pd) at p and at 2p."""
    if d < 0:
        raise ModelError("degree must be nonnegative")
    k = max(0, round(p * d))
    strands = (p ** 3,) * d + (p,) * k + (min(2 * p, 0.5),) * k
    return HoleCenterColumn(ColumnModel(T, strands, boundary), 3 * p * p * d)


# ladder


@dataclass(frozen=True)
class TransferMatrixModel:
    """T spins each flipped with probability 1/2 - eps; neighbouring pairs flipped with 1/2 - eps_p."""

    eps: float
    eps_p: float
    T: int

    def __post_init__(self):
        if not (0.0 <= self.eps <= 0.5 and 0.0 <= self.eps_p <= 0.5):
            raise ModelError("biases must lie in [0, 1/2]")
        if self.T < 2:
            raise ModelError("the ladder needs T >= 2")

    @property
    def y(self) -> float:
        return (0.5 - self.eps_p) / (0.5 + self.eps_p)

    @property
    def z(self) -> float:
        return (0.5 - self.eps) / (0.5 + self.eps)

    @property
    def normalization(self) -> float:
        return (0.5 + self.eps) ** self.T * (0.5 + self.eps_p) ** (self.T - 1)

    def matrix(self, b: int) -> np.ndarray:
        y, z = self.y, self.z
        s = math.sqrt(y)
        if b == 0:
            return np.array([[1.0, z * s], [s * z, y]])
        return np.array([[z, s], [s, z * y]])

    def boundary_vector(self, b: int) -> np.ndarray:
        # end spins see only one pair variable, carrying half of its y weight
        y, z = self.y, self.z
        return np.array([z ** b, z ** (1 - b) * math.sqrt(y)])

    def exact(self, b: Sequence[int]) -> float:
        if len(b) != self.T:
            raise ModelError(f"configuration must have {self.T} spins")
        vec = self.boundary_vector(b[0])
        for bj in b[1:-1]:
            vec = vec @ self.matrix(bj)
        return float(self.normalization * (vec @ self.boundary_vector(b[-1])))

    def enumerate_flips(self, b: Sequence[int]) -> float:
        """Direct sum over pair-flip variables of the generating process."""
        e, ep = self.eps, self.eps_p
        total = 0.0
        for f in itertools.product((0, 1), repeat=self.T - 1):
            w = 1.0
            for j in range(self.T):
                left = f[j - 1] if j > 0 else 0
                right = f[j] if j < self.T - 1 else 0
                w *= (0.5 - e) if b[j] ^ left ^ right else (0.5 + e)
            for fj in f:
                w *= (0.5 - ep) if fj else (0.5 + ep)
            total += w
        return total

    @property
    def upper_left(self) -> tuple[float, float]:
        y, z = self.y, self.z
        return 1 + 2 * z * y + y * y, z + 2 * y + z * y * y

    def approximate(self, b: Sequence[int]) -> float:
        a0, a1 = self.upper_left
        down = sum(b)
        return a0 ** (len(b) - down) * a1 ** down / (a0 + a1) ** len(b)

    def rotation(self) -> np.ndarray:
        y = self.y
        return np.array([[1.0, math.sqrt(y)], [math.sqrt(y), -1.0]]) / math.sqrt(1 + y)

    def rotated(self, b: int) -> np.ndarray:
        u = self.rotation()
        return u @ self.matrix(b) @ u.T

    def rotated_closed_form(self, b: int) -> np.ndarray:
        y, z = self.y, self.z
        off = (1 - y) * (1 - z) * math.sqrt(y)
        a0, a1 = self.upper_left
        if b == 0:
            m = [[a0, off], [off, 2 * (1 - z) * y]]
        else:
            m = [[a1, -off], [-off, 2 * (z - 1) * y]]
        return np.array(m) / (1 + y)

    def configurations(self):
        return itertools.product((0, 1), repeat=self.T)

    def distribution(self) -> dict[tuple[int, ...], float]:
        return {b: self.exact(b) for b in self.configurations()}


def ladder_probability(m: TransferMatrixModel, b: Sequence[int]) -> tuple[float, float]:
    """(exact, independent-flip approximation) probability of a spin configuration."""
    return m.exact(b), m.approximate(b)


def ladder_independence_check(m: TransferMatrixModel) -> float:
    """Total-variation distance between the exact distribution and the independent-flip one."""
    return 0.5 * sum(abs(m.exact(b) - m.approximate(b)) for b in m.configurations())


# gluing and merging


def glue(p1: float, p2: float) -> float:
    return 2.0 * p1 * p2


def glue_exact(q1: float, q2: float) -> float:
    num = q1 * q2
    den = num + (1 - q1) * (1 - q2)
    return num / den if den else 0.5


def glue_graphs(g1: CheckGraph, e1: int, g2: CheckGraph, e2: int) -> CheckGraph:
    """Join dangling edge e1 of g1 and e2 of g2 at a new shared vertex.

    The result keeps g1's logical cocycle; both inputs must have exactly two
    classes.
    """
    if len(g1.cocycles) != 1 or len(g2.cocycles) != 1:
        raise DecodeError("gluing needs two-class graphs")
    if g1.edges[e1][1] is not None or g2.edges[e2][1] is not None:
        raise DecodeError("only dangling edges can be glued")
    shift = g1.n_vertices
    joint = g1.n_vertices + g2.n_vertices
    edges = list(g1.edges)
    edges[e1] = (edges[e1][0], joint)
    for i, (u, v) in enumerate(g2.edges):
        if i == e2:
            edges.append((u + shift, joint))
        else:
            edges.append((u + shift, None if v is None else v + shift))
    return CheckGraph(joint + 1, tuple(edges), g1.probs + g2.probs, g1.cocycles,
                      name=f"{g1.name}+{g2.name}")


def two_hole_merge(eps1: float, eps2: float) -> float:
    """Timelike flip probability of the merged column of two hole centers."""
    for e in (eps1, eps2):
        if not 0.0 <= e <= 0.5:
            raise ModelError("bias outside [0, 1/2]")
    return parity_probabilities([0.5 - eps1, 0.5 - eps2])[1]


# single hole


@dataclass(frozen=True)
class SingleHolePrediction:
    regime: str
    failure: float
    crossover_time: float


def single_hole_prediction(ell: float, r: float, d: int, p: float, T: float,
                           c: float | None = None, c_prime: float | None = None) -> SingleHolePrediction:
    """Piecewise failure scaling for one hole of degree d at distance r from a rough side.

    Quadratic T^2 exp(-c ell) until T reaches min(exp(c r), exp(c' d)), then
    linear, continuing the quadratic value at the crossover. Without explicit
    constants, c = log(1/p)/2 and c' comes from the hole-center strand column.
    """
    if r > ell / 2:
        raise ModelError("r must be at most ell/2")
    if c is None:
        c = 0.5 * math.log(1.0 / p)
    if c_prime is None:
        eps = 0.5 * (1 - 2 * hole_center_effective(p, d).model.flip_probability)
        c_prime = -math.log(eps) / d if d else 0.0
    t_hole = math.exp(c_prime * d)
    t_side = math.exp(c * r)
    t_cross = min(t_hole, t_side)
    if T <= t_cross:
        regime, value = "quadratic", T * T * math.exp(-c * ell)
    elif t_side >= t_hole:
        regime, value = "linear-hole", T * t_hole * math.exp(-c * ell)
    else:
        regime, value = "linear-far-side", T * math.exp(-c * (ell - r))
    if value >= 0.5:
        return SingleHolePrediction("saturated", 0.5, t_cross)
    return SingleHolePrediction(regime, value, t_cross)


@dataclass(frozen=True)
class RowHoleModel:
    """One spatial row through a hole center, repeated over T rounds.

    The row has ell edges from the left rough side to the right one, the hole
    center sits r edges from the left, and only the hole center carries
    timelike edges (flip probability q). The logical class is the parity of
    left dangling edges.
    """

    ell: int
    r: int
    p: float
    q: float
    T: int

    def __post_init__(self):
        if not 1 <= self.r <= self.ell - 1:
            raise ModelError("the hole must sit strictly inside the row")
        if not (0 < self.p < 0.5 and 0 <= self.q <= 0.5):
            raise ModelError("probabilities out of range")

    @classmethod
    def from_hole(cls, ell: int, r: int, p: float, d: int, T: int) -> "RowHoleModel":
        """Hole-column flip rate from the hole-center strands plus the column's own edge."""
        strands = hole_center_effective(p, d).model.probs + (p,)
        return cls(ell, r, p, parity_probabilities(strands)[1], T)

    def failures(self, trials: int, rng: np.random.Generator, chunk: int = 50000) -> float:
        """Failures of exact ML decoding (ties count 1/2), summed over sampled trials."""
        total = 0.0
        done = 0
        while done < trials:
            m = min(chunk, trials - done)
            total += self._batch(m, rng)
            done += m
        return total

    def _batch(self, m: int, rng: np.random.Generator) -> float:
        ell, r, T = self.ell, self.r, self.T
        rp = self.p / (1 - self.p)
        rq = self.q / (1 - self.q) if self.q < 1 else 1.0
        n_left = rng.binomial(r, self.p, size=(m, T))
        n_right = rng.binomial(ell - r, self.p, size=(m, T))
        col = rng.random((m, max(T - 1, 0))) < self.q
        # weights relative to the red chain: a flips the whole row, x = a ^ (column step) flips the right part
        wl = np.stack([np.ones((m, T)), rp ** (r - 2 * n_left)], axis=-1)
        wr = np.stack([np.ones((m, T)), rp ** ((ell - r) - 2 * n_right)], axis=-1)
        # state index = 2 * (column offset below) + (class parity)
        state = np.zeros((m, 4))
        state[:, 0] = 1.0
        for t in range(T):
            new = np.zeros_like(state)
            last = t == T - 1
            for below in (0, 1):
                for cls in (0, 1):
                    w0 = state[:, 2 * below + cls]
                    for above in ((0,) if last else (0, 1)):
                        step = below ^ above
                        if last:
                            cw = np.ones(m)
                        else:
                            red_c = col[:, t]
                            cw = np.where(red_c ^ bool(above), rq, 1.0) / np.where(red_c, rq, 1.0)
                        for a in (0, 1):
                            w = w0 * wl[:, t, a] * wr[:, t, a ^ step] * cw
                            new[:, 2 * above + (cls ^ a)] += w
            scale = new.max(axis=1, keepdims=True)
            state = new / scale
        z0, z1 = state[:, 0], state[:, 1]
        wrong = np.where(z1 > z0 * (1 + 1e-12), 1.0, np.where(np.abs(z1 - z0) <= 1e-12 * z0, 0.5, 0.0))
        return float(wrong.sum())


def local_slopes(ts: Sequence[float], values: Sequence[float]) -> list[float]:
    """Successive log-log slopes."""
    out = []
    for (t0, v0), (t1, v1) in zip(zip(ts, values), zip(ts[1:], values[1:])):
        out.append(math.log(v1 / v0) / math.log(t1 / t0))
    return out
