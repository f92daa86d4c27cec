"""Grading analysis of nilpotent Higgs fields and diagonal gauge rescalings.

The central construction: given a flat family whose leading term phi is
nilpotent and presented in a graded frame (the orthogonal splitting is an
input, not computed), conjugation by a diagonal one-parameter gauge splits
every term into graded pieces carrying exact rational parameter exponents.
The lowest surviving piece phi + A_{1-m} is the secondary (non-nilpotent)
Higgs field and the integer m is the invariant controlling the holonomy
growth exponent (m-1)/m.

Exponent bookkeeping is exact throughout: conjugation by diag(zeta^{e_1}, ...,
zeta^{e_n}) scales entry (i, j) by the formal monomial zeta^{e_j - e_i}, and
the monomial only ever lives as a Fraction added to a term's exponent.
Fractional powers are never materialized numerically here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .algebra import (
    BiRationalFunction,
    GaussianRational,
    RationalFunctionMatrix,
    matrix_rank_exact,
)
from .connection import ConnectionFamily, MatrixOneForm, check_flatness
from .errors import (
    BadBlocks,
    DimensionMismatch,
    FixedPointDetected,
    FrameNotAligned,
    NotNilpotent,
    ZeroHiggsField,
)

GradedForm = Dict[Fraction, MatrixOneForm]


@dataclass(frozen=True)
class NilpotentType:
    """Jordan data of a nilpotent field: kernel-growth partition and its transpose.

    partition[i-1] = dim ker(phi^i) - dim ker(phi^{i-1}) at a generic point;
    the transpose partition lists Jordan block sizes in decreasing order;
    nilpotency_index is the smallest k with phi^k = 0.
    """

    partition: Tuple[int, ...]
    transpose: Tuple[int, ...]
    nilpotency_index: int

    def __post_init__(self):
        if conjugate_partition(self.partition) != self.transpose:
            raise BadBlocks("transpose is not the conjugate partition")


def conjugate_partition(partition: Sequence[int]) -> Tuple[int, ...]:
    if not partition:
        return ()
    return tuple(
        sum(1 for p in partition if p >= i) for i in range(1, max(partition) + 1)
    )


@dataclass(frozen=True)
class GaugeProfile:
    """Diagonal gauge data: formal exponents e_i, per-block integers, and m.

    The exponents sum to zero (determinant one up to the central sign coming
    from the choice of root).  Entry (i, j) of a conjugated matrix is scaled
    by zeta^{e_j - e_i}; the overall sign of the exponent vector is the choice
    of which side the gauge acts on, and both signs round-trip.
    """

    exponents: Tuple[Fraction, ...]
    block_m: Tuple[int, ...] = ()
    m: int = 0

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(Fraction(e) for e in self.exponents))
        if sum(self.exponents, Fraction(0)) != 0:
            raise ValueError("gauge profile exponents must sum to zero")

    @property
    def n(self) -> int:
        return len(self.exponents)

    def negated(self) -> "GaugeProfile":
        return GaugeProfile(tuple(-e for e in self.exponents), self.block_m, self.m)

    def shift(self, row: int, col: int) -> Fraction:
        return self.exponents[col] - self.exponents[row]

    @classmethod
    def sl2(cls) -> "GaugeProfile":
        """Quarter-power gauge for rank 2, exponents increasing down the grading."""
        return cls((Fraction(-1, 4), Fraction(1, 4)), block_m=(2,), m=2)

    @classmethod
    def maximal_type(cls, n: int) -> "GaugeProfile":
        """Unit-spaced profile ((1-n)/2, ..., (n-1)/2) for a full Jordan block."""
        return cls(
            tuple(Fraction(2 * i - 1 - n, 2) for i in range(1, n + 1)),
            block_m=(n,),
            m=n,
        )

    @classmethod
    def from_splitting(cls, partition: Sequence[int], block_m: Sequence[int]) -> "GaugeProfile":
        """Per-block profile e = (2j - 1 - k_i) / (2 m_i) on line j of block i.

        partition is the grading (dim V_1, ..., dim V_k); block i runs over
        the transpose partition entries k_i, and block_m[i-1] is that block's
        invariant (1 for degenerate blocks).
        """
        layout = _line_layout(partition)
        transpose = conjugate_partition(partition)
        if len(block_m) != len(transpose):
            raise BadBlocks("need one m per transpose-partition block")
        exps = []
        for level, slot in layout:
            k_i = transpose[slot - 1]
            m_i = max(1, block_m[slot - 1])
            exps.append(Fraction(2 * level - 1 - k_i, 2 * m_i))
        return cls(tuple(exps), block_m=tuple(block_m), m=max(block_m) if block_m else 0)

    def to_json(self) -> dict:
        return {
            "exponents": [str(e) for e in self.exponents],
            "block_m": list(self.block_m),
            "m": self.m,
        }


def _line_layout(partition: Sequence[int]) -> List[Tuple[int, int]]:
    """Global frame order of the graded lines: [(level j, slot i), ...].

    Level j contributes partition[j-1] lines; slot i within a level belongs to
    the i-th transpose block.
    """
    layout = []
    for j, nj in enumerate(partition, start=1):
        for i in range(1, nj + 1):
            layout.append((j, i))
    return layout


def _block_index_of(entry_index: int, blocks: Sequence[int]) -> int:
    total = 0
    for b, size in enumerate(blocks):
        total += size
        if entry_index < total:
            return b
    raise BadBlocks(f"index {entry_index} outside blocks {blocks}")


def jordan_type(phi: MatrixOneForm, seed: int = 2301) -> NilpotentType:
    """Jordan type of a nilpotent (1,0)-field from generic-point exact ranks.

    Ranks of phi^j at generic exact sample points give dim ker(phi^j); the
    kernel-dimension increments form the partition, constant away from
    finitely many points of the chart.
    """
    if not phi.dzbar_part.is_zero:
        raise ValueError("jordan_type expects a (1,0)-form Higgs field")
    mat = phi.dz_part
    n = mat.rows
    if mat.is_zero:
        raise ZeroHiggsField("phi = 0 has no Jordan type here")
    if not mat.power(n).is_zero:
        raise NotNilpotent("phi^n != 0")
    kernel_dims = [0]
    power = RationalFunctionMatrix.identity(n)
    while kernel_dims[-1] < n:
        power = power @ mat
        rank = matrix_rank_exact(power, fallback_generic=True, seed=seed)
        kernel_dims.append(n - rank)
    partition = tuple(
        kernel_dims[j] - kernel_dims[j - 1] for j in range(1, len(kernel_dims))
    )
    return NilpotentType(
        partition=partition,
        transpose=conjugate_partition(partition),
        nilpotency_index=len(partition),
    )


def graded_decompose(A: MatrixOneForm, blocks: Sequence[int]) -> Dict[int, MatrixOneForm]:
    """Split a form by block distance: piece k collects blocks (r, c) with c - r = k.

    Summing the pieces reassembles the input exactly; zero pieces are omitted.
    """
    n = A.n
    if sum(blocks) != n or any(b <= 0 for b in blocks):
        raise BadBlocks(f"blocks {blocks} do not partition dimension {n}")
    zero = BiRationalFunction.zero()
    pieces: Dict[int, Tuple[list, list]] = {}
    for i in range(n):
        bi = _block_index_of(i, blocks)
        for j in range(n):
            k = _block_index_of(j, blocks) - bi
            dz_e = A.dz_part.entries[i][j]
            dzb_e = A.dzbar_part.entries[i][j]
            if not dz_e and not dzb_e:
                continue
            if k not in pieces:
                pieces[k] = (
                    [[zero] * n for _ in range(n)],
                    [[zero] * n for _ in range(n)],
                )
            pieces[k][0][i][j] = dz_e
            pieces[k][1][i][j] = dzb_e
    return {
        k: MatrixOneForm(RationalFunctionMatrix(dz), RationalFunctionMatrix(dzb))
        for k, (dz, dzb) in sorted(pieces.items())
    }


def gauge_conjugate(obj, profile: GaugeProfile):
    """Conjugate by the diagonal gauge, tracking exponents exactly.

    Entry (i, j) is scaled by the formal monomial zeta^{e_j - e_i}.  A
    MatrixOneForm (or a graded dict of them) comes back as a graded dict
    keyed by exact rational exponent shift; a ConnectionFamily comes back as
    a graded dict keyed by total term exponent.  The inhomogeneous term is
    untouched: the gauge is constant on the chart.
    """
    if isinstance(obj, MatrixOneForm):
        return _merge_graded(_conjugate_pieces(obj, profile, Fraction(0)), obj.n)
    if isinstance(obj, dict):
        out: List[Tuple[Fraction, int, int, object, object]] = []
        for base, form in obj.items():
            out.extend(_conjugate_pieces(form, profile, Fraction(base)))
        return _merge_graded(out, profile.n)
    if isinstance(obj, ConnectionFamily):
        pieces = []
        for _name, exponent, form in obj.terms():
            pieces.extend(_conjugate_pieces(form, profile, exponent))
        return _merge_graded(pieces, obj.n)
    raise TypeError(f"cannot gauge-conjugate {type(obj).__name__}")


def _conjugate_pieces(form: MatrixOneForm, profile: GaugeProfile, base: Fraction):
    if form.n != profile.n:
        raise DimensionMismatch(
            f"profile of length {profile.n} on a rank-{form.n} form"
        )
    out = []
    for i in range(form.n):
        for j in range(form.n):
            dz_e = form.dz_part.entries[i][j]
            dzb_e = form.dzbar_part.entries[i][j]
            if not dz_e and not dzb_e:
                continue
            out.append((base + profile.shift(i, j), i, j, dz_e, dzb_e))
    return out


def _merge_graded(pieces, n: int) -> GradedForm:
    if not pieces:
        return {}
    zero = BiRationalFunction.zero()
    grids: Dict[Fraction, Tuple[list, list]] = {}
    for exp, i, j, dz_e, dzb_e in pieces:
        if exp not in grids:
            grids[exp] = ([[zero] * n for _ in range(n)], [[zero] * n for _ in range(n)])
        dzg, dzbg = grids[exp]
        dzg[i][j] = dzg[i][j] + dz_e
        dzbg[i][j] = dzbg[i][j] + dzb_e
    out = {}
    for exp, (dzg, dzbg) in sorted(grids.items()):
        form = MatrixOneForm(RationalFunctionMatrix(dzg), RationalFunctionMatrix(dzbg))
        if not form.is_zero:
            out[exp] = form
    return out


@dataclass(frozen=True)
class SecondaryData:
    """Output of the rescaling: the secondary field, its exponent, and the rest.

    Phi is the exact leading piece at exponent (1 - m) in the m-th-power
    reparametrized family; residual_terms carry every other graded piece with
    its exact exponent, so the original family can be reassembled exactly.
    """

    Phi: MatrixOneForm
    diag_connection: MatrixOneForm
    m: int
    residual_terms: Tuple[Tuple[Fraction, MatrixOneForm], ...]
    profile: GaugeProfile
    splitting: Tuple[int, ...]

    @property
    def leading_exponent(self) -> Fraction:
        return Fraction(1 - self.m)

    def graded_family(self) -> GradedForm:
        """All pieces keyed by exponent, leading field and diagonal included."""
        merged: GradedForm = {}
        items = [(self.leading_exponent, self.Phi), (Fraction(0), self.diag_connection)]
        items += list(self.residual_terms)
        for exp, form in items:
            if form.is_zero:
                continue
            if exp in merged:
                merged[exp] = merged[exp] + form
            else:
                merged[exp] = form
        return dict(sorted(merged.items()))

    def to_json(self) -> dict:
        return {
            "schema": "nilwkb/1",
            "m": self.m,
            "splitting": list(self.splitting),
            "leading_exponent": str(self.leading_exponent),
            "profile": self.profile.to_json(),
            "phi_secondary": self.Phi.to_json(),
            "diag_connection": self.diag_connection.to_json(),
            "residual_terms": [[str(e), f.to_json()] for e, f in self.residual_terms],
        }


def _check_graded_frame(phi: MatrixOneForm, partition: Sequence[int]) -> None:
    """The input frame must exhibit phi in graded shape: pure weight +1 with
    slot-aligned lines (slot s of level j+1 maps onto slot s of level j)."""
    layout = _line_layout(partition)
    n = len(layout)
    for r in range(n):
        for c in range(n):
            entry = phi.dz_part.entries[r][c]
            lr, sr = layout[r]
            lc, sc = layout[c]
            if entry:
                if lc - lr != 1 or sr != sc:
                    raise FrameNotAligned(
                        f"phi entry ({r},{c}) sits at grading step {lc - lr}, slot "
                        f"{sr}->{sc}; the splitting frame must align phi on the "
                        "graded superdiagonal"
                    )
            else:
                if lc - lr == 1 and sr == sc:
                    raise FrameNotAligned(
                        f"phi entry ({r},{c}) on the graded superdiagonal vanishes; "
                        "the grading lines are not matched by phi"
                    )


def secondary_higgs(
    family: ConnectionFamily,
    splitting: Sequence[int],
    check_flat: bool = True,
    seed: int = 2301,
) -> SecondaryData:
    """Extract the secondary Higgs field and the invariant m.

    Blockwise over the transpose partition: within block i, m_i is the
    largest t with a nonzero connection piece at grading weight 1 - t
    (m_i = 1 when all such pieces vanish).  With m = max m_i, the secondary
    field collects phi and the weight (1-m) connection piece of every block
    attaining the maximum; the diagonal graded piece of the connection stays
    at exponent 0 and every other graded piece is kept with its exact
    exponent, so undoing the gauge reproduces the family exactly.

    Raises FixedPointDetected when m = 1: the scaling-fixed-point case, where
    the leading piece would stay nilpotent and the construction degenerates.
    """
    splitting = tuple(int(b) for b in splitting)
    n = family.n
    if sum(splitting) != n or any(b <= 0 for b in splitting):
        raise BadBlocks(f"splitting {splitting} does not partition rank {n}")
    phi = family.phi
    if phi.is_zero:
        raise ZeroHiggsField("cannot rescale around phi = 0")
    if not phi.dz_part.power(n).is_zero:
        raise NotNilpotent("phi^n != 0; the leading term must be nilpotent")
    if check_flat and not check_flatness(family).is_flat:
        raise ValueError("family is not flat; secondary field needs a flat input")

    jt = jordan_type(phi, seed=seed)
    if jt.partition != splitting:
        raise BadBlocks(
            f"splitting {splitting} is inconsistent with the Jordan type {jt.partition}"
        )
    _check_graded_frame(phi, splitting)

    layout = _line_layout(splitting)
    transpose = jt.transpose
    nblocks = len(transpose)

    # per-block largest t >= 2 with a nonzero weight-(1-t) connection piece
    conn = family.conn
    block_m = [1] * nblocks
    for r in range(n):
        for c in range(n):
            if not conn.dz_part.entries[r][c] and not conn.dzbar_part.entries[r][c]:
                continue
            lr, sr = layout[r]
            lc, sc = layout[c]
            if sr != sc:
                continue
            t = 1 - (lc - lr)
            if t >= 2:
                block_m[sr - 1] = max(block_m[sr - 1], t)
    m = max(block_m)
    if m == 1:
        raise FixedPointDetected(
            "all lower graded connection pieces vanish: scaling fixed point, "
            "the secondary field would remain nilpotent"
        )

    profile = GaugeProfile.from_splitting(splitting, block_m)

    zero = BiRationalFunction.zero()
    phi_dz = [[zero] * n for _ in range(n)]
    phi_dzb = [[zero] * n for _ in range(n)]
    diag_dz = [[zero] * n for _ in range(n)]
    diag_dzb = [[zero] * n for _ in range(n)]
    residual_pieces: List[Tuple[Fraction, int, int, object, object]] = []

    for name, term_exp, form in family.terms():
        for r in range(n):
            for c in range(n):
                dz_e = form.dz_part.entries[r][c]
                dzb_e = form.dzbar_part.entries[r][c]
                if not dz_e and not dzb_e:
                    continue
                lr, sr = layout[r]
                lc, sc = layout[c]
                shift = profile.shift(r, c)
                exponent = m * term_exp + m * shift
                same_block = sr == sc
                weight = lc - lr
                if name == "phi" and same_block and weight == 1 and block_m[sr - 1] == m:
                    phi_dz[r][c] = dz_e
                    phi_dzb[r][c] = dzb_e
                elif name == "conn" and same_block and weight == 1 - m and block_m[sr - 1] == m:
                    phi_dz[r][c] = dz_e
                    phi_dzb[r][c] = dzb_e
                elif name == "conn" and shift == 0 and weight == 0:
                    diag_dz[r][c] = dz_e
                    diag_dzb[r][c] = dzb_e
                else:
                    residual_pieces.append((exponent, r, c, dz_e, dzb_e))

    Phi = MatrixOneForm(RationalFunctionMatrix(phi_dz), RationalFunctionMatrix(phi_dzb))
    if not Phi.dzbar_part.is_zero:
        raise ValueError(
            "the weight (1-m) connection piece has a (0,1) component; flat "
            "families cannot produce this, check the input"
        )
    diag = MatrixOneForm(RationalFunctionMatrix(diag_dz), RationalFunctionMatrix(diag_dzb))
    residual = tuple(sorted(_merge_graded(residual_pieces, n).items()))
    return SecondaryData(
        Phi=Phi,
        diag_connection=diag,
        m=m,
        residual_terms=residual,
        profile=profile,
        splitting=splitting,
    )


def undo_gauge(data: SecondaryData) -> Tuple[MatrixOneForm, MatrixOneForm, MatrixOneForm]:
    """Reverse the rescaling: (phi, conn, psi) of the original family, exactly.

    Each entry's exponent is shifted back by the gauge and divided by m; the
    result must land on the integer exponents (-1, 0, +1), which identify the
    term the entry came from.
    """
    m = data.m
    n = data.Phi.n
    zero = BiRationalFunction.zero()
    grids = {
        Fraction(-1): ([[zero] * n for _ in range(n)], [[zero] * n for _ in range(n)]),
        Fraction(0): ([[zero] * n for _ in range(n)], [[zero] * n for _ in range(n)]),
        Fraction(1): ([[zero] * n for _ in range(n)], [[zero] * n for _ in range(n)]),
    }
    for exponent, form in data.graded_family().items():
        for r in range(n):
            for c in range(n):
                dz_e = form.dz_part.entries[r][c]
                dzb_e = form.dzbar_part.entries[r][c]
                if not dz_e and not dzb_e:
                    continue
                original = (exponent - m * data.profile.shift(r, c)) / m
                if original not in grids:
                    raise ValueError(
                        f"entry ({r},{c}) ungauges to exponent {original}, not in (-1,0,1)"
                    )
                dzg, dzbg = grids[original]
                dzg[r][c] = dzg[r][c] + dz_e
                dzbg[r][c] = dzbg[r][c] + dzb_e
    forms = {
        e: MatrixOneForm(RationalFunctionMatrix(dz), RationalFunctionMatrix(dzb))
        for e, (dz, dzb) in grids.items()
    }
    return forms[Fraction(-1)], forms[Fraction(0)], forms[Fraction(1)]


def is_m_cyclic(Phi: MatrixOneForm, profile: GaugeProfile, m: int) -> bool:
    """Exact cyclic-grading check: every nonzero entry sits one step up mod m.

    The weight unit is the smallest positive gap between profile exponents;
    each nonzero entry's shift must be an integer number of units congruent
    to 1 mod m.  No floating roots of unity are involved.
    """
    gaps = sorted(
        {
            abs(a - b)
            for a in profile.exponents
            for b in profile.exponents
            if a != b
        }
    )
    unit = gaps[0] if gaps else Fraction(1)
    for r in range(Phi.n):
        for c in range(Phi.n):
            if not Phi.dz_part.entries[r][c] and not Phi.dzbar_part.entries[r][c]:
                continue
            delta = profile.shift(r, c)
            steps = delta / unit
            if steps.denominator != 1 or (int(steps) - 1) % m != 0:
                return False
    return True


def k_differentials(Phi: MatrixOneForm, up_to: int) -> List[BiRationalFunction]:
    """Tr(Phi^k) for k = 2..up_to, as exact coefficients of dz^k."""
    if Phi.dz_part.rows != Phi.dz_part.cols:
        raise DimensionMismatch("k_differentials of a non-square field")
    if not Phi.dzbar_part.is_zero:
        raise ValueError("k_differentials expects a (1,0)-form field")
    out = []
    power = Phi.dz_part @ Phi.dz_part
    for k in range(2, up_to + 1):
        out.append(power.trace())
        if k < up_to:
            power = power @ Phi.dz_part
    return out


def reality_obstruction(Phi: MatrixOneForm, Psi: MatrixOneForm) -> bool:
    """True when det(-conj(Psi)) = -det(Phi) as exact rational functions.

    The sign mismatch of the two determinants is exactly what obstructs the
    rescaled section from being real.  conj is the formal swap z <-> zbar
    plus coefficient conjugation.  The all-zero case is degenerate: no
    obstruction is detectable and False is returned.
    """
    if Phi.n != 2 or Psi.n != 2:
        raise DimensionMismatch("reality obstruction is a rank-2 predicate")
    det_phi = _det2(Phi.dz_part)
    minus_conj_psi = Psi.dzbar_part.conj_swap().scale(GaussianRational(-1))
    det_mirror = _det2(minus_conj_psi)
    if det_phi.is_zero and det_mirror.is_zero:
        return False
    return det_mirror == -det_phi


def _det2(M: RationalFunctionMatrix) -> BiRationalFunction:
    e = M.entries
    return e[0][0] * e[1][1] - e[0][1] * e[1][0]
