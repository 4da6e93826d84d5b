"""Pauli operators, stabilizer tableaux and measurement schedules.

A Pauli operator is stored as ``i**phase * prod_j X_j**x_j Z_j**z_j`` with the
x and z parts packed into ints, so ``Y = i X Z`` has ``phase = 1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .gf2 import BitVector, rank, support


_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


class NotHermitianError(ValueError):
    pass


class TransportError(RuntimeError):
    pass


class PauliOperator:
    __slots__ = ("n", "x", "z", "phase")

    def __init__(self, n: int, x: int = 0, z: int = 0, phase: int = 0):
        if (x | z) >> n:
            raise ValueError("operator acts outside its qubit range")
        self.n = n
        self.x = x
        self.z = z
        self.phase = phase % 4

    @classmethod
    def _raw(cls, n: int, x: int, z: int, phase: int) -> "PauliOperator":
        op = object.__new__(cls)
        op.n = n
        op.x = x
        op.z = z
        op.phase = phase & 3
        return op

    def __eq__(self, other) -> bool:
        return (isinstance(other, PauliOperator) and self.n == other.n and self.x == other.x
                and self.z == other.z and self.phase == other.phase)

    def __hash__(self) -> int:
        return hash((self.n, self.x, self.z, self.phase))

    # construction

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def from_string(cls, text: str) -> "PauliOperator":
        """Parse ``"+XIZ"``, ``"-YY"`` or ``"XZ"`` (leading sign optional)."""
        text = text.strip()
        sign = 0
        if text[:1] in "+-":
            sign = 2 if text[0] == "-" else 0
            text = text[1:]
        if text[:1] == "i":
            raise NotHermitianError("imaginary prefactor in schedule text")
        x = z = 0
        ny = 0
        for j, ch in enumerate(text.upper()):
            if ch == "X":
                x |= 1 << j
            elif ch == "Z":
                z |= 1 << j
            elif ch == "Y":
                x |= 1 << j
                z |= 1 << j
                ny += 1
            elif ch != "I":
                raise ValueError(f"bad Pauli letter {ch!r}")
        return cls(len(text), x, z, sign + ny)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliOperator":
        return cls.from_letters(n, {qubit: letter})

    @classmethod
    def from_letters(cls, n: int, letters: dict[int, str], sign: int = 1) -> "PauliOperator":
        x = z = 0
        ny = 0
        for q, ch in letters.items():
            if ch in "XY":
                x ^= 1 << q
            if ch in "ZY":
                z ^= 1 << q
            if ch == "Y":
                ny += 1
        return cls(n, x, z, ny + (0 if sign > 0 else 2))

    @classmethod
    def x_type(cls, n: int, qubits: Iterable[int]) -> "PauliOperator":
        w = 0
        for q in qubits:
            w ^= 1 << q
        return cls(n, x=w)

    @classmethod
    def z_type(cls, n: int, qubits: Iterable[int]) -> "PauliOperator":
        w = 0
        for q in qubits:
            w ^= 1 << q
        return cls(n, z=w)

    # views

    @property
    def x_bits(self) -> BitVector:
        return BitVector(self.n, self.x)

    @property
    def z_bits(self) -> BitVector:
        return BitVector(self.n, self.z)

    @property
    def symplectic(self) -> int:
        """x bits in the low half, z bits in the high half."""
        return self.x | (self.z << self.n)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def qubits(self) -> list[int]:
        return support(self.x | self.z)

    def is_hermitian(self) -> bool:
        return (self.phase - (self.x & self.z).bit_count()) % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian operators, relative to the letter form."""
        if not self.is_hermitian():
            raise NotHermitianError(str(self))
        return 1 if (self.phase - (self.x & self.z).bit_count()) % 4 == 0 else -1

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letters(self) -> str:
        return "".join(_LETTER[((self.x >> j) & 1, (self.z >> j) & 1)] for j in range(self.n))

    def __str__(self) -> str:
        extra = (self.phase - (self.x & self.z).bit_count()) % 4
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[extra]
        return prefix + self.letters()

    def __repr__(self) -> str:
        return f"PauliOperator({self})"

    # algebra

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        # Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
        extra = 2 * ((self.z & other.x).bit_count() & 1)
        return PauliOperator._raw(self.n, self.x ^ other.x, self.z ^ other.z, self.phase + other.phase + extra)

    def __neg__(self) -> "PauliOperator":
        return PauliOperator._raw(self.n, self.x, self.z, self.phase + 2)

    def times_sign(self, s: int) -> "PauliOperator":
        return self if s > 0 else -self

    def with_sign(self, s: int) -> "PauliOperator":
        """Same letters, overall sign ``s`` (Hermitian result)."""
        base = (self.x & self.z).bit_count()
        return PauliOperator._raw(self.n, self.x, self.z, base + (0 if s > 0 else 2))

    def commutes(self, other: "PauliOperator") -> bool:
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def same_letters(self, other: "PauliOperator") -> bool:
        return self.n == other.n and self.x == other.x and self.z == other.z

    def embed(self, n: int, qubits: Sequence[int]) -> "PauliOperator":
        """Place this operator on the listed qubits of an ``n``-qubit register."""
        x = z = 0
        for j, q in enumerate(qubits):
            if (self.x >> j) & 1:
                x |= 1 << q
            if (self.z >> j) & 1:
                z |= 1 << q
        return PauliOperator(n, x, z, self.phase)


def product(ops: Iterable[PauliOperator], n: int) -> PauliOperator:
    out = PauliOperator(n)
    for p in ops:
        out = out * p
    return out


class Membership(Enum):
    WITH_SIGN = "with_sign"
    UP_TO_SIGN = "up_to_sign"
    ABSENT = "absent"


@dataclass
class StabilizerTableau:
    """Independent, pairwise commuting Hermitian generators with signs."""

    n: int
    generators: list[PauliOperator] = field(default_factory=list)
    _cache: tuple | None = field(default=None, repr=False, compare=False)
    _version: int = field(default=0, repr=False, compare=False)

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, list(self.generators))

    def __len__(self) -> int:
        return len(self.generators)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def _echelon(self) -> tuple[list[int], list[int]]:
        # generators are only replaced through measure(), which bumps the version;
        # the length guards against direct appends
        key = (self._version, len(self.generators))
        if self._cache is not None and self._cache[0] == key:
            return self._cache[1], self._cache[2]
        n2 = 2 * self.n
        basis: list[int] = []
        pivots: list[int] = []
        for i, g in enumerate(self.generators):
            r = g.symplectic | (1 << (n2 + i))
            for b, pc in zip(basis, pivots):
                if (r >> pc) & 1:
                    r ^= b
            low = r & ((1 << n2) - 1)
            if not low:
                raise AssertionError("tableau generators are dependent")
            pc = (low & -low).bit_length() - 1
            basis.append(r)
            pivots.append(pc)
        self._cache = (key, basis, pivots)
        return basis, pivots

    def decompose(self, p: PauliOperator) -> int | None:
        """Bitmask of generators whose product has the letters of ``p``, or None."""
        basis, pivots = self._echelon()
        n2 = 2 * self.n
        r = p.symplectic
        for b, pc in zip(basis, pivots):
            if (r >> pc) & 1:
                r ^= b
        if r & ((1 << n2) - 1):
            return None
        return r >> n2

    def group_element(self, mask: int) -> PauliOperator:
        out = PauliOperator(self.n)
        for i in support(mask):
            out = out * self.generators[i]
        return out

    def check(self) -> None:
        """Raise if the generators fail to commute or are dependent."""
        gens = self.generators
        for i, a in enumerate(gens):
            if not a.is_hermitian():
                raise AssertionError(f"non-Hermitian generator {a}")
            for b in gens[i + 1:]:
                if not a.commutes(b):
                    raise AssertionError(f"{a} and {b} anticommute")
        self.decompose(PauliOperator(self.n))

    def symplectic_rows(self) -> list[int]:
        return [g.symplectic for g in self.generators]

    def measure(self, p: PauliOperator, rng: random.Random | None = None,
                forced: int | None = None) -> tuple[int, bool]:
        """Measure ``p`` in place; returns (outcome, deterministic)."""
        if p.n != self.n:
            raise ValueError("qubit count mismatch")
        if not p.is_hermitian():
            raise NotHermitianError(f"cannot measure non-Hermitian {p}")
        if p.is_identity():
            return p.sign, True
        gens = self.generators
        anti = [i for i, g in enumerate(gens) if not g.commutes(p)]
        if not anti:
            mask = self.decompose(p)
            if mask is not None:
                q = self.group_element(mask)
                # state is +1 on q, and p = (q.phase vs p.phase) * q
                return (1 if (p.phase - q.phase) % 4 == 0 else -1), True
            outcome = _draw(rng, forced)
            gens.append(p.with_sign(p.sign * outcome))
            self._version += 1
            return outcome, False
        g0 = anti[0]
        g = gens[g0]
        for i in anti[1:]:
            gens[i] = gens[i] * g
        outcome = _draw(rng, forced)
        gens[g0] = p.with_sign(p.sign * outcome)
        self._version += 1
        return outcome, False

    def contains(self, p: PauliOperator) -> Membership:
        mask = self.decompose(p)
        if mask is None:
            return Membership.ABSENT
        q = self.group_element(mask)
        return Membership.WITH_SIGN if q.phase == p.phase else Membership.UP_TO_SIGN

    def same_group(self, ops: Sequence[PauliOperator], signs: bool = False) -> bool:
        """Group equality with the group generated by ``ops`` (optionally with signs)."""
        if rank([o.symplectic for o in ops]) != self.rank:
            return False
        for o in ops:
            mask = self.decompose(o)
            if mask is None:
                return False
            if signs and self.group_element(mask).phase != o.phase:
                return False
        return True

    def __str__(self) -> str:
        return "{" + ", ".join(str(g) for g in self.generators) + "}"


def _draw(rng: random.Random | None, forced: int | None) -> int:
    if forced is not None:
        if forced not in (1, -1):
            raise ValueError("forced outcome must be +1 or -1")
        return forced
    if rng is None:
        raise ValueError("random outcome needs an rng")
    return 1 if rng.random() < 0.5 else -1


def measure(t: StabilizerTableau, p: PauliOperator, rng: random.Random | None = None,
            forced: int | None = None) -> tuple[StabilizerTableau, int, bool]:
    """Measure ``p`` on ``t`` (mutated in place and returned)."""
    outcome, det = t.measure(p, rng, forced)
    return t, outcome, det


def contains(t: StabilizerTableau, p: PauliOperator) -> Membership:
    return t.contains(p)


@dataclass
class MeasurementSchedule:
    ops: list[PauliOperator]
    period: int | None = None

    def __len__(self) -> int:
        return len(self.ops)

    def to_text(self) -> str:
        return "".join(f"{'+' if op.sign > 0 else '-'}{op.letters()}\n" for op in self.ops)

    @classmethod
    def from_text(cls, text: str) -> "MeasurementSchedule":
        ops = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                ops.append(PauliOperator.from_string(line))
        if ops and len({o.n for o in ops}) != 1:
            raise ValueError("mixed qubit counts in schedule")
        return cls(ops)


@dataclass
class RoundRecord:
    tableau: StabilizerTableau
    outcomes: list[int]
    deterministic: list[bool]


def run_schedule(t: StabilizerTableau, s: MeasurementSchedule, rounds: int,
                 rng: random.Random | None = None, validate: bool = False) -> list[RoundRecord]:
    """Apply the schedule ``rounds`` times; one record (tableau snapshot) per round."""
    trace = []
    for _ in range(rounds):
        outs, dets = [], []
        for op in s.ops:
            o, d = t.measure(op, rng)
            if validate:
                t.check()
            outs.append(o)
            dets.append(d)
        trace.append(RoundRecord(t.copy(), outs, dets))
    return trace


def _still_in_isg(measured: Sequence[tuple[PauliOperator, int]], j: int, k: int) -> bool:
    """Whether check j survives the measurements j+1 .. k-1."""
    mj = measured[j][0]
    return all(mj.commutes(measured[i][0]) for i in range(j + 1, k))


def transport(p: PauliOperator, measured: Sequence[tuple[PauliOperator, int]],
              simplify: bool = False) -> PauliOperator:
    """Carry ``p`` through a sequence of measured checks.

    Whenever ``p`` anticommutes with the next check, it is multiplied by one
    earlier check (times its outcome) that is still in the stabilizer group and
    restores commutation; the lightest product wins, earliest check on ties.
    With ``simplify``, checks still in the final group are then multiplied in
    whenever that lowers the weight.
    """
    cur = p
    for k, (mk, _) in enumerate(measured):
        if cur.commutes(mk):
            continue
        best = None
        for j in range(k):
            mj, sj = measured[j]
            if mj.commutes(mk) or not mj.commutes(cur):
                continue
            if not _still_in_isg(measured, j, k):
                continue
            cand = cur * mj.times_sign(sj)
            if best is None or cand.weight < best.weight:
                best = cand
        if best is None:
            raise TransportError(f"{cur} anticommutes with {mk} and no earlier check fixes it")
        cur = best
    if simplify:
        end = len(measured)
        improved = True
        while improved:
            improved = False
            for j in range(end):
                mj, sj = measured[j]
                if not _still_in_isg(measured, j, end) or not mj.commutes(cur):
                    continue
                cand = cur * mj.times_sign(sj)
                if cand.weight < cur.weight:
                    cur = cand
                    improved = True
    return cur


def kw_schedule(m: int) -> MeasurementSchedule:
    """Kramers-Wannier sequence on a ring of ``m`` qubits (qubit ``m`` is qubit 0).

    Blocks, each over j = 1..m/2: Z on 2j; X on 2j-1, 2j; Z on 2j, 2j+1; X on 2j-1.
    """
    if m % 2 or m < 4:
        raise ValueError("ring size must be even and at least 4")
    h = m // 2

    def q(i: int) -> int:
        return i % m

    ops = [PauliOperator.z_type(m, [q(2 * j)]) for j in range(1, h + 1)]
    ops += [PauliOperator.x_type(m, [q(2 * j - 1), q(2 * j)]) for j in range(1, h + 1)]
    ops += [PauliOperator.z_type(m, [q(2 * j), q(2 * j + 1)]) for j in range(1, h + 1)]
    ops += [PauliOperator.x_type(m, [q(2 * j - 1)]) for j in range(1, h + 1)]
    return MeasurementSchedule(ops, period=len(ops))


def run_and_record(t: StabilizerTableau, ops: Sequence[PauliOperator],
                   rng: random.Random | None = None) -> list[tuple[PauliOperator, int]]:
    """Measure ``ops`` in order and return (check, outcome) pairs for ``transport``."""
    out = []
    for op in ops:
        o, _ = t.measure(op, rng)
        out.append((op, o))
    return out
