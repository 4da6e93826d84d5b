"""Repetition code on a 1D Ising chain with missing checks.

N spins start all 0 or all 1, each round flips every spin with probability
p, and then the checks ``s_i xor s_{i+1}`` are read out except at vacancies.
The final spins are read perfectly. Vacancies cut the chain into intervals;
within an interval each round's error is known up to its complement, so
each interval behaves as one effective spin with a known per-round flip bias.

Spins are 0-indexed here; vacancy ``i`` removes the check between spins
``i-1`` and ``i`` (so ``i`` ranges over 1..N-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np


class IsingError(ValueError):
    pass


@dataclass(frozen=True)
class IsingSpec:
    N: int
    T: int
    p: float
    vacancies: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.N < 1 or self.T < 1:
            raise IsingError("need N >= 1 and T >= 1")
        if not 0.0 <= self.p <= 0.5:
            raise IsingError("p must lie in [0, 1/2]")
        bad = [v for v in self.vacancies if not 1 <= v <= self.N - 1]
        if bad:
            raise IsingError(f"vacancies {sorted(bad)} outside 1..N-1")

    @property
    def intervals(self) -> list[int]:
        cuts = [0] + sorted(self.vacancies) + [self.N]
        return [b - a for a, b in zip(cuts, cuts[1:])]

    @property
    def checks(self) -> list[int]:
        return [i for i in range(1, self.N) if i not in self.vacancies]


@dataclass
class IsingRecord:
    spec: IsingSpec
    initial: int
    checks: np.ndarray  # (T, N-1); vacancy columns are zero
    final: np.ndarray  # (N,)
    spins: np.ndarray | None = None  # (T+1, N) trajectory, for diagnostics


def simulate(spec: IsingSpec, rng: np.random.Generator, initial: int | None = None) -> IsingRecord:
    if initial is None:
        initial = int(rng.integers(2))
    spins = np.zeros((spec.T + 1, spec.N), dtype=np.uint8)
    spins[0] = initial
    flips = (rng.random((spec.T, spec.N)) < spec.p).astype(np.uint8)
    spins[1:] = (initial + np.cumsum(flips, axis=0)) % 2
    checks = (spins[1:, 1:] ^ spins[1:, :-1]).astype(np.uint8)
    for v in spec.vacancies:
        checks[:, v - 1] = 0
    return IsingRecord(spec, initial, checks, spins[-1].copy(), spins)


# vacancies everywhere


def flip_after_rounds(p: float, T: int) -> float:
    return (1.0 - (1.0 - 2.0 * p) ** T) / 2.0


def vacancies_everywhere_failure(N: int, T: int, p: float) -> float:
    """Majority-vote failure when no checks are read; an even-N tie counts 1/2."""
    q = flip_after_rounds(p, T)
    total = sum(math.comb(N, j) * q ** j * (1 - q) ** (N - j) for j in range(N // 2 + 1, N + 1))
    if N % 2 == 0:
        total += 0.5 * math.comb(N, N // 2) * (q * (1 - q)) ** (N // 2)
    return total


# interval model


def error_count_probability(m: int, ell: int, p: float) -> float:
    return math.comb(ell, m) * p ** m * (1 - p) ** (ell - m)


def interval_flip_bias(ell: int, m: int, p: float) -> float:
    """Chance that the complementary (heavier) error pattern occurred, given the lighter has m errors."""
    if not 0 <= 2 * m <= ell:
        raise IsingError(f"m={m} outside 0..{ell}/2")
    if 2 * m == ell:
        return 0.5
    light = error_count_probability(m, ell, p)
    heavy = error_count_probability(ell - m, ell, p)
    return heavy / (light + heavy)


def revealed_count_distribution(ell: int, p: float) -> list[float]:
    """Probability of each revealed light-side count m = 0..ell//2."""
    out = []
    for m in range(ell // 2 + 1):
        if 2 * m == ell:
            out.append(error_count_probability(m, ell, p))
        else:
            out.append(error_count_probability(m, ell, p) + error_count_probability(ell - m, ell, p))
    return out


@dataclass
class IntervalModel:
    lengths: list[int]
    counts: list[list[int]]  # revealed m per interval per round
    biases: list[list[float]]
    observed: list[int]  # effective-spin flip relative to the lightest explanation, assuming start 0

    @property
    def flip_probabilities(self) -> list[float]:
        return [(1.0 - math.prod(1.0 - 2.0 * b for b in bs)) / 2.0 for bs in self.biases]


def effective_model(record: IsingRecord) -> IntervalModel:
    spec = record.spec
    lengths = spec.intervals
    starts = np.cumsum([0] + lengths[:-1])
    counts, biases, observed = [], [], []
    for start, ell in zip(starts, lengths):
        prev = np.zeros(ell, dtype=np.uint8)
        ms, bs = [], []
        for t in range(spec.T):
            # pattern fixed up to complement by the interior checks; gauge the first spin to 0
            inner = record.checks[t, start:start + ell - 1]
            pattern = np.concatenate([[0], np.cumsum(inner) % 2]).astype(np.uint8)
            k = int(np.count_nonzero(pattern ^ prev))
            m = min(k, ell - k)
            if k > ell - k:
                pattern = pattern ^ 1  # follow the lighter explanation
            prev = pattern
            ms.append(m)
            bs.append(interval_flip_bias(ell, m, spec.p))
        final = record.final[start:start + ell]
        # the final read is either the tracked pattern or its complement
        observed.append(int(final[0] != prev[0]))
        counts.append(ms)
        biases.append(bs)
    return IntervalModel(lengths, counts, biases, observed)


@dataclass(frozen=True)
class RecordVerdict:
    posterior: tuple[float, float]  # P(initial = 0), P(initial = 1)
    decoded: int
    tie: bool


def ml_decode_record(record: IsingRecord) -> RecordVerdict:
    model = effective_model(record)
    l0 = l1 = 1.0
    for pf, f in zip(model.flip_probabilities, model.observed):
        l0 *= pf if f else 1 - pf
        l1 *= 1 - pf if f else pf
    tot = l0 + l1
    post = (l0 / tot, l1 / tot)
    tie = abs(l0 - l1) <= 1e-12 * tot
    return RecordVerdict(post, 0 if l0 >= l1 else 1, tie)


# exact failure probabilities


def _merge(tables: Iterable[list[tuple[float, float]]]) -> float:
    """Half the sum over joint records of min(P(rec | start 0), P(rec | start 1)).

    Each table lists (P(rec | 0), P(rec | 1)) for one interval; records of
    different intervals are independent given the start, so joint weights are
    products. Entries are bucketed by likelihood ratio to keep the sum small.
    """
    acc: dict[int, list[float]] = {0: [1.0, 1.0]}
    for table in tables:
        new: dict[int, list[float]] = {}
        for a0, a1 in acc.values():
            for w0, w1 in table:
                b0, b1 = a0 * w0, a1 * w1
                if b0 == 0.0 and b1 == 0.0:
                    continue
                key = _ratio_key(b0, b1)
                slot = new.setdefault(key, [0.0, 0.0])
                slot[0] += b0
                slot[1] += b1
        acc = new
    return 0.5 * sum(min(a, b) for a, b in acc.values())


def _ratio_key(a: float, b: float) -> int:
    if a == 0.0:
        return 1 << 62
    if b == 0.0:
        return -(1 << 62)
    return round(math.log(b / a) * 1e9)


def effective_failure(spec: IsingSpec) -> float:
    """Exact ML failure of the effective interval model."""
    tables = []
    for ell in spec.intervals:
        dist = revealed_count_distribution(ell, spec.p)
        bias = [interval_flip_bias(ell, m, spec.p) for m in range(ell // 2 + 1)]
        table = []
        for seq in product(range(len(dist)), repeat=spec.T):
            prob = math.prod(dist[m] for m in seq)
            if prob == 0.0:
                continue
            pf = (1.0 - math.prod(1.0 - 2.0 * bias[m] for m in seq)) / 2.0
            table.append((prob * (1 - pf), prob * pf))  # observed = 0
            table.append((prob * pf, prob * (1 - pf)))  # observed = 1
        tables.append(table)
    return _merge(tables)


def record_oracle_failure(spec: IsingSpec) -> float:
    """Exact ML failure of the full record, grouped by per-round pattern weights.

    Within an interval, gauge every round's pattern so its first spin is 0;
    k_t is the weight of the change between consecutive gauged patterns and h
    the final first spin. The record likelihood given the start sums over the
    hidden per-round complement bits with a 2x2 transfer matrix, and the
    number of records sharing (k_1..k_T, h) is prod C(ell-1, k_t).
    """
    p = spec.p
    tables = []
    for ell in spec.intervals:
        table = []
        for ks in product(range(ell), repeat=spec.T):
            mult = math.prod(math.comb(ell - 1, k) for k in ks)
            for h in (0, 1):
                w = [mult * _gauge_sum(ell, ks, h, x, p) for x in (0, 1)]
                table.append((w[0], w[1]))
        tables.append(table)
    return _merge(tables)


def _gauge_sum(ell: int, ks: Sequence[int], h: int, x: int, p: float) -> float:
    vec = np.zeros(2)
    vec[x] = 1.0
    for t, k in enumerate(ks):
        same = p ** k * (1 - p) ** (ell - k)
        diff = p ** (ell - k) * (1 - p) ** k
        vec = np.array([vec[0] * same + vec[1] * diff, vec[0] * diff + vec[1] * same])
    return float(vec[h])


def brute_force_failure(spec: IsingSpec) -> float:
    """Exact ML failure by enumerating every flip history (N*T <= 20)."""
    N, T = spec.N, spec.T
    if N * T > 20:
        raise IsingError("too many flip variables for brute force")
    n = N * T
    pats = np.arange(1 << n, dtype=np.int64)
    bits = ((pats[:, None] >> np.arange(n)) & 1).astype(np.uint8).reshape(-1, T, N)
    spins = np.cumsum(bits, axis=1) % 2  # start 0
    weight = bits.sum(axis=(1, 2))
    prob = spec.p ** weight * (1 - spec.p) ** (n - weight)
    keep = spec.checks
    chk = (spins[:, :, 1:] ^ spins[:, :, :-1])[:, :, [c - 1 for c in keep]].reshape(len(pats), -1)
    final = spins[:, -1, :]
    rec0 = _pack_rows(np.concatenate([chk, final], axis=1))
    rec1 = _pack_rows(np.concatenate([chk, final ^ 1], axis=1))  # start 1 flips finals only
    table0: dict[int, float] = {}
    for r, w in zip(rec0.tolist(), prob.tolist()):
        table0[r] = table0.get(r, 0.0) + w
    table1: dict[int, float] = {}
    for r, w in zip(rec1.tolist(), prob.tolist()):
        table1[r] = table1.get(r, 0.0) + w
    total = 0.0
    for r in set(table0) | set(table1):
        total += min(table0.get(r, 0.0), table1.get(r, 0.0))
    return 0.5 * total


def _pack_rows(bits: np.ndarray) -> np.ndarray:
    if bits.shape[1] > 62:
        raise IsingError("record too long to pack")
    acc = np.zeros(len(bits), dtype=np.int64)
    for j in range(bits.shape[1]):
        acc |= bits[:, j].astype(np.int64) << j
    return acc


def vacancies_everywhere_brute_force(N: int, T: int, p: float) -> float:
    return brute_force_failure(IsingSpec(N, T, p, frozenset(range(1, N))))


# two intervals


STIRLING_C = math.sqrt(2) / math.pi


def interval_effective_flip(ell: int, p: float) -> float:
    """Per-round flip rate of an interval's effective spin, averaged over the revealed count."""
    total = sum(error_count_probability(ell - m, ell, p) for m in range((ell + 1) // 2))
    if ell % 2 == 0:
        total += 0.5 * error_count_probability(ell // 2, ell, p)
    return total


def interval_effective_flip_approx(ell: int, p: float) -> float:
    return STIRLING_C * p ** (ell // 2 + 1) * 2 ** ell / math.sqrt(ell)


@dataclass(frozen=True)
class TwoIntervalAnalysis:
    p1_eff: float
    p2_eff: float
    p1_eff_approx: float
    p2_eff_approx: float
    p_both: float
    p_both_approx: float
    regime: str
    exponent: int


def _both_flipped(p1: float, p2: float, T: float) -> float:
    return (1 - (1 - 2 * p1) ** T) / 2 * (1 - (1 - 2 * p2) ** T) / 2


def two_interval_analysis(ell1: int, ell2: int, p: float, T: float) -> TwoIntervalAnalysis:
    if ell1 > ell2:
        raise IsingError("order the intervals so ell1 <= ell2")
    p1, p2 = interval_effective_flip(ell1, p), interval_effective_flip(ell2, p)
    a1, a2 = interval_effective_flip_approx(ell1, p), interval_effective_flip_approx(ell2, p)
    if T * p1 < 1:
        regime, exponent = "quadratic", 2
    elif T * p2 < 1:
        regime, exponent = "linear", 1
    else:
        regime, exponent = "constant", 0
    return TwoIntervalAnalysis(p1, p2, a1, a2, _both_flipped(p1, p2, T), _both_flipped(a1, a2, T),
                               regime, exponent)


def two_interval_failure(ell1: int, ell2: int, p: float, T: int) -> float:
    """Exact ML failure of the two-interval effective model via revealed-count multiplicities."""
    per = []
    for ell in (ell1, ell2):
        dist = revealed_count_distribution(ell, p)
        bias = [interval_flip_bias(ell, m, p) for m in range(ell // 2 + 1)]
        table = []
        for counts, prob in _multinomial_outcomes(T, dist):
            pf = (1.0 - math.prod((1.0 - 2.0 * b) ** c for b, c in zip(bias, counts))) / 2.0
            table.append((prob * (1 - pf), prob * pf))
            table.append((prob * pf, prob * (1 - pf)))
        per.append(table)
    return _merge(per)


def _multinomial_outcomes(T: int, probs: Sequence[float]):
    k = len(probs)

    def rec(i: int, left: int):
        if i == k - 1:
            yield (left,)
            return
        for c in range(left + 1):
            for rest in rec(i + 1, left - c):
                yield (c,) + rest

    for counts in rec(0, T):
        coef = math.factorial(T)
        prob = 1.0
        for c, q in zip(counts, probs):
            coef //= math.factorial(c)
            prob *= q ** c
        yield counts, coef * prob


@dataclass(frozen=True)
class CrossoverPoint:
    T: int
    failure: float
    sigma: float


def sample_interval_failures(lengths: Sequence[int], p: float, T: int, trials: int,
                             rng: np.random.Generator, chunk: int = 250000) -> float:
    """Monte Carlo ML failures of the effective model (ties count 1/2), start state 0.

    Sufficient statistics only: the number of rounds with each revealed count
    is multinomial and the complementary flips per count are binomial, so the
    cost does not depend on T.
    """
    fails = 0.0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        log_ratio = np.zeros(m)  # log L(start 1) - log L(start 0)
        for ell in lengths:
            dist = np.array(revealed_count_distribution(ell, p))
            bias = np.array([interval_flip_bias(ell, k, p) for k in range(ell // 2 + 1)])
            counts = rng.multinomial(T, dist / dist.sum(), size=m)
            flips = rng.binomial(counts, bias).sum(axis=1) % 2
            with np.errstate(divide="ignore", invalid="ignore"):
                lg = np.log(np.abs(1.0 - 2.0 * bias))
                pf = np.where(np.any((counts > 0) & (bias == 0.5), axis=1), 0.5,
                              (1.0 - np.exp(np.where(counts > 0, counts * lg, 0.0).sum(axis=1))) / 2.0)
            pf = np.clip(pf, 1e-300, 0.5)
            lr = np.log(pf) - np.log1p(-pf)
            log_ratio += np.where(flips == 1, -lr, lr)
        fails += np.count_nonzero(log_ratio > 1e-9) + 0.5 * np.count_nonzero(np.abs(log_ratio) <= 1e-9)
        done += m
    return float(fails)


def crossover_experiment(ell1: int, ell2: int, p: float, Ts: Sequence[int], trials: int,
                         rng: np.random.Generator) -> tuple[list[CrossoverPoint], list[float]]:
    """Failure curve over Ts with per-point sigma, and local log-log slopes."""
    if trials <= 0:
        raise IsingError("trials must be positive")
    points = []
    for T in Ts:
        f = sample_interval_failures((ell1, ell2), p, T, trials, rng) / trials
        if f == 0.0:
            raise IsingError(f"no failures at T={T}; increase trials")
        points.append(CrossoverPoint(T, f, math.sqrt(f * (1 - f) / trials)))
    slopes = [math.log(b.failure / a.failure) / math.log(b.T / a.T) for a, b in zip(points, points[1:])]
    return points, slopes


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
