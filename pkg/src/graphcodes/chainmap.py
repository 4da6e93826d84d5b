"""CSS codes as three-term chain complexes, and the chain map induced by measuring an X product.

Degrees are Z (Z-stabilizer generators), Q (qubits) and X (X-stabilizer
generators), with boundary maps dZ: Z -> Q and dQ: Q -> X. Measuring an
X-type operator O = X^w that anticommutes with some Z generator keeps the
stabilizer rank: one Z generator is lost, O joins the X generators, and the
map f_Q(q) = q + <q, w> v (v the chosen anticommuting Z generator) extends to
a chain map from the old complex to the new one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import gf2
from . import complex2
from .complex2 import CSSCode
from .gf2 import BitMatrix, BitVector
from .stab import PauliOperator, StabilizerTableau


class ChainMapError(ValueError):
    pass


class AlreadyStabilizer(ChainMapError):
    pass


class CommutesWithAll(ChainMapError):
    pass


@dataclass(frozen=True)
class ChainComplex3:
    dZ: BitMatrix  # n_Q x n_Z; column j is the support of Z generator j
    dQ: BitMatrix  # n_X x n_Q; row i is the support of X generator i

    def __post_init__(self):
        if self.dZ.nrows != self.dQ.ncols:
            raise ChainMapError("dZ codomain and dQ domain differ")
        if not (self.dQ @ self.dZ).is_zero():
            raise ChainMapError("dQ dZ != 0: stabilizers do not commute")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.dZ.ncols, self.dZ.nrows, self.dQ.nrows

    @property
    def z_rank(self) -> int:
        return gf2.rank(self.dZ.T)

    @property
    def x_rank(self) -> int:
        return gf2.rank(self.dQ)

    def z_generator(self, j: int) -> BitVector:
        return self.dZ.apply(1 << j)

    def dual(self) -> "ChainComplex3":
        """Swap the roles of X and Z generators."""
        return ChainComplex3(self.dQ.T, self.dZ.T)

    def to_css(self) -> CSSCode:
        return CSSCode(self.dZ.T, self.dQ)

    def to_text(self) -> str:
        lines = ["dims " + " ".join(map(str, self.dims)), "dZ"]
        lines += ["".join(map(str, r)) for r in self.dZ.to_lists()]
        lines.append("dQ")
        lines += ["".join(map(str, r)) for r in self.dQ.to_lists()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ChainComplex3":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        nz, nq, nx = map(int, lines[0].split()[1:])
        i = lines.index("dZ")
        j = lines.index("dQ")
        dz = [[int(c) for c in ln] for ln in lines[i + 1:j]]
        dq = [[int(c) for c in ln] for ln in lines[j + 1:]]
        if len(dz) != nq or len(dq) != nx:
            raise ChainMapError("matrix sizes disagree with the dims header")
        return cls(BitMatrix.from_lists(dz, nz), BitMatrix.from_lists(dq, nq))


@dataclass(frozen=True)
class ChainMap3:
    fZ: BitMatrix
    fQ: BitMatrix
    fX: BitMatrix

    @classmethod
    def identity(cls, c: ChainComplex3) -> "ChainMap3":
        nz, nq, nx = c.dims
        return cls(BitMatrix.identity(nz), BitMatrix.identity(nq), BitMatrix.identity(nx))


@dataclass(frozen=True)
class MeasurementData:
    w: BitVector
    v: BitVector
    v_index: int
    preimage: BitVector  # a solution z of dZ z = v
    fZ_basis_dependent: BitMatrix


def css_to_complex(css: CSSCode) -> ChainComplex3:
    return ChainComplex3(css.hz.T, css.hx)


def _as_word(w) -> int:
    if isinstance(w, BitVector):
        return w.word
    if isinstance(w, int):
        return w
    return gf2.from_support(w)


def measure_x_product(c: ChainComplex3, w, preimage: str = "solve") -> tuple[ChainComplex3, ChainMap3, MeasurementData]:
    """New complex and chain map after measuring X on the support w.

    The new Z degree uses the rotated generator basis: every other
    anticommuting generator is multiplied by the chosen one, which is then
    dropped. ``preimage`` picks the dZ-preimage of v used in the
    basis-independent f_Z: "solve" for the canonical solver output,
    "basis" for the generator's own basis vector.
    """
    nz, nq, nx = c.dims
    word = _as_word(w)
    if word >> nq:
        raise ChainMapError("support outside the qubit range")
    if gf2.in_span(word, c.dQ.rows):
        raise AlreadyStabilizer("operator is already in the X-stabilizer group")
    cols = c.dZ.T.rows
    anti = [j for j in range(nz) if gf2.dot(cols[j], word)]
    if not anti:
        raise CommutesWithAll("operator commutes with every Z generator")
    j0 = anti[0]
    v = cols[j0]
    keep = [j for j in range(nz) if j != j0]
    # rotated basis of Z' inside Z, as columns
    rotated = [(1 << j) | ((1 << j0) if j in anti else 0) for j in keep]
    new_cols = [c.dZ.apply(r).word for r in rotated]
    dZ_new = BitMatrix.from_rows(new_cols, nq).T if keep else BitMatrix.zeros(nq, 0)
    dQ_new = c.dQ.with_rows([word])
    target = ChainComplex3(dZ_new, dQ_new)

    fQ = BitMatrix.from_rows([(1 << i) ^ (v if (word >> i) & 1 else 0) for i in range(nq)], nq).T
    fX = BitMatrix.from_rows([1 << i for i in range(nx)], nx + 1).T
    # drop coordinate j0: valid coordinates for any z in Z' in the rotated basis
    fZ_dep = BitMatrix.from_rows([(1 << keep.index(j)) if j != j0 else 0 for j in range(nz)], nz - 1).T
    if preimage == "solve":
        sol = gf2.solve(c.dZ, v)
        if sol is None:
            raise AssertionError("a Z generator has no preimage")
        pre = sol.word
    elif preimage == "basis":
        pre = 1 << j0
    else:
        raise ChainMapError(f"unknown preimage policy {preimage!r}")
    images = []
    for j in range(nz):
        z = (1 << j) ^ (pre if gf2.dot(cols[j], word) else 0)
        images.append(sum(1 << keep.index(i) for i in gf2.support(z) if i != j0))
    fZ = BitMatrix.from_rows(images, nz - 1).T
    data = MeasurementData(BitVector(nq, word), BitVector(nq, v), j0, BitVector(nz, pre), fZ_dep)
    return target, ChainMap3(fZ, fQ, fX), data


def measure_z_product(c: ChainComplex3, w, preimage: str = "solve"):
    """Z-product measurement: the X-product construction on the dual complex.

    Returned complexes are in dual form (dZ and dQ exchanged and transposed).
    """
    return measure_x_product(c.dual(), w, preimage)


@dataclass
class ChainMapReport:
    z_square: bool
    q_square: bool
    z_square_failures: list[tuple[int, int]] = field(default_factory=list)
    q_square_failures: list[tuple[int, int]] = field(default_factory=list)
    z_rank_delta: int = 0
    x_rank_delta: int = 0
    kills_v: bool | None = None

    @property
    def squares_ok(self) -> bool:
        return self.z_square and self.q_square

    @property
    def measurement_ranks_ok(self) -> bool:
        return self.z_rank_delta == -1 and self.x_rank_delta == 1

    @property
    def ok(self) -> bool:
        return self.squares_ok


def _differences(a: BitMatrix, b: BitMatrix) -> list[tuple[int, int]]:
    out = []
    for i, (ra, rb) in enumerate(zip(a.rows, b.rows)):
        out += [(i, j) for j in gf2.support(ra ^ rb)]
    return out


def verify_chain_map(source: ChainComplex3, target: ChainComplex3, f: ChainMap3,
                     data: MeasurementData | None = None) -> ChainMapReport:
    """Check dZ' fZ = fQ dZ and dQ' fQ = fX dQ entrywise, and record rank changes."""
    if (f.fZ.ncols, f.fQ.ncols, f.fX.ncols) != source.dims or \
            (f.fZ.nrows, f.fQ.nrows, f.fX.nrows) != target.dims:
        raise ChainMapError("map shapes do not match the complexes")
    lz, rz = target.dZ @ f.fZ, f.fQ @ source.dZ
    lq, rq = target.dQ @ f.fQ, f.fX @ source.dQ
    zf, qf = _differences(lz, rz), _differences(lq, rq)
    report = ChainMapReport(not zf, not qf, zf, qf,
                            target.z_rank - source.z_rank, target.x_rank - source.x_rank)
    if data is not None:
        report.kills_v = f.fQ.apply(data.v).is_zero()
    return report


# simulation cross-check


@dataclass
class StabCrossCheck:
    kind: str  # "stabilizer", "logical" or "anticommuting"
    outcome: int
    deterministic: bool
    pre_rank: int
    post_rank: int
    matches: bool


def _independent(rows) -> list[int]:
    picked: list[int] = []
    for r in rows:
        if not gf2.in_span(r, picked):
            picked.append(r)
    return picked


def stabsim_cross_check(css: CSSCode, w, rng: random.Random) -> StabCrossCheck:
    """Measure X^w on a code state in the tableau simulator and compare with the new complex."""
    n = css.n
    if n > 16:
        raise ChainMapError("cross-check limited to 16 qubits")
    word = _as_word(w)
    t = StabilizerTableau(n)
    for r in _independent(css.hx.rows):
        t.measure(PauliOperator(n, x=r), rng)
    for r in _independent(css.hz.rows):
        t.measure(PauliOperator(n, z=r), rng)
    pre = t.copy()
    pre_rank = t.rank

    def signed(op: PauliOperator) -> PauliOperator:
        mask = pre.decompose(op)
        if mask is None:
            raise AssertionError("expected stabilizer missing before measurement")
        return pre.group_element(mask)

    op = PauliOperator(n, x=word)
    outcome, det = t.measure(op, rng)
    c = css_to_complex(css)
    if gf2.in_span(word, css.hx.rows):
        ok = det and t.same_group(pre.generators, signs=True)
        return StabCrossCheck("stabilizer", outcome, det, pre_rank, t.rank, ok)
    if not any(gf2.dot(r, word) for r in css.hz.rows):
        expected = list(pre.generators) + [op.with_sign(outcome)]
        return StabCrossCheck("logical", outcome, det, pre_rank, t.rank,
                              t.same_group(expected, signs=True))
    target, _, _ = measure_x_product(c, word)
    expected = [signed(PauliOperator(n, z=col)) for col in target.dZ.T.rows if col]
    expected += [signed(PauliOperator(n, x=r)) for r in c.dQ.rows if r]
    expected.append(op.with_sign(outcome))
    ok = t.same_group(expected, signs=True) and t.rank == pre_rank
    return StabCrossCheck("anticommuting", outcome, det, pre_rank, t.rank, ok)


# fixtures


def triangle_code() -> CSSCode:
    """Three qubits on the edges of one triangle: Z checks on vertices, one X check on the face."""
    return complex2.toric_code(complex2.triangle())


def toric_fixture(L: int = 2) -> CSSCode:
    return complex2.toric_code(complex2.torus(L))


def steane_code() -> CSSCode:
    h = BitMatrix.from_lists([[0, 0, 0, 1, 1, 1, 1], [0, 1, 1, 0, 0, 1, 1], [1, 0, 1, 0, 1, 0, 1]])
    return CSSCode(h, h)


def random_css(n: int, n_z: int, n_x: int, rng: random.Random) -> CSSCode:
    """Random Z checks, then X checks drawn from the space orthogonal to them."""
    hz_rows = [rng.getrandbits(n) for _ in range(n_z)]
    hz = BitMatrix.from_rows(hz_rows, n)
    kernel = [b.word for b in gf2.kernel_basis(hz)]
    hx_rows = []
    for _ in range(n_x):
        r = 0
        for k in kernel:
            if rng.getrandbits(1):
                r ^= k
        hx_rows.append(r)
    return CSSCode(hz, BitMatrix.from_rows(hx_rows, n))
