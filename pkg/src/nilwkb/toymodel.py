"""Four-punctured-sphere catalog: weights, stability, explicit nilpotent fields.

Punctures sit at 0, 1, infinity and a movable point p; flags are exact
projective lines, weights are exact rationals, and every check in this module
is case arithmetic over Gaussian rationals with no tolerances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Sequence, Tuple

from .algebra import (
    BiPolynomial,
    BiRationalFunction,
    GaussianRational,
    RationalFunctionMatrix,
)
from .connection import MatrixOneForm, transform_chart_inverse
from .errors import BadPuncture, UnstableWeights

BRF = BiRationalFunction

GR0 = GaussianRational(0)
GR1 = GaussianRational(1)


@dataclass(frozen=True)
class ParabolicWeights:
    """Four weights, each strictly between 0 and 1/2."""

    rho: Tuple[Fraction, Fraction, Fraction, Fraction]

    def __post_init__(self):
        rho = tuple(Fraction(r) for r in self.rho)
        if len(rho) != 4:
            raise ValueError("exactly four weights")
        if any(not (0 < r < Fraction(1, 2)) for r in rho):
            raise ValueError("weights must lie strictly between 0 and 1/2")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def parse(cls, text: str) -> "ParabolicWeights":
        return cls(tuple(Fraction(part) for part in text.split(",")))


@dataclass(frozen=True)
class WeightInequalityReport:
    """Pass/fail per inequality family, with violating permutations as witnesses."""

    permutation_bounds_ok: bool
    permutation_violations: Tuple[tuple, ...]
    two_plus_two_ok: bool
    two_plus_two_violations: Tuple[tuple, ...]
    sum_ok: bool
    total: Fraction

    @property
    def all_pass(self) -> bool:
        return self.permutation_bounds_ok and self.two_plus_two_ok and self.sum_ok

    def to_json(self) -> dict:
        return {
            "schema": "nilwkb/1",
            "permutation_bounds": {
                "pass": self.permutation_bounds_ok,
                "violations": [list(v) for v in self.permutation_violations],
            },
            "two_plus_two": {
                "pass": self.two_plus_two_ok,
                "violations": [list(v) for v in self.two_plus_two_violations],
            },
            "sum_bound": {"pass": self.sum_ok, "total": str(self.total)},
            "all_pass": self.all_pass,
        }


def check_weight_inequalities(weights: ParabolicWeights) -> WeightInequalityReport:
    """Evaluate the three stability inequality families exactly.

    (i)  rho_s1 < rho_s2 + rho_s3 + rho_s4 < 1 + rho_s1 over all of S4;
    (ii) rho_s1 + rho_4 < rho_s2 + rho_s3 over permutations of the first three;
    (iii) sum of all four < 1.
    """
    r = weights.rho
    perm_viol = []
    for sigma in permutations(range(4)):
        lead = r[sigma[0]]
        rest = r[sigma[1]] + r[sigma[2]] + r[sigma[3]]
        if not (lead < rest):
            perm_viol.append((sigma, "lower"))
        if not (rest < 1 + lead):
            perm_viol.append((sigma, "upper"))
    two_viol = []
    for sigma in permutations(range(3)):
        if not (r[sigma[0]] + r[3] < r[sigma[1]] + r[sigma[2]]):
            two_viol.append((sigma,))
    total = r[0] + r[1] + r[2] + r[3]
    return WeightInequalityReport(
        permutation_bounds_ok=not perm_viol,
        permutation_violations=tuple(perm_viol),
        two_plus_two_ok=not two_viol,
        two_plus_two_violations=tuple(two_viol),
        sum_ok=total < 1,
        total=total,
    )


def pdeg(line_degree: int, incidence: Sequence[bool], weights: ParabolicWeights) -> Fraction:
    """Parabolic degree of a line subbundle: deg + sum of (+rho if the line
    passes through that puncture's flag, else -rho)."""
    if len(incidence) != 4:
        raise ValueError("incidence is one flag per puncture")
    total = Fraction(line_degree)
    for hit, r in zip(incidence, weights.rho):
        total += r if hit else -r
    return total


def pdeg_table(weights: ParabolicWeights, degrees: Sequence[int] = (0, -1)) -> List[dict]:
    """Exact parabolic degrees over every incidence pattern, per degree."""
    rows = []
    for deg in degrees:
        for mask in range(16):
            incidence = tuple(bool(mask >> i & 1) for i in range(4))
            rows.append(
                {
                    "degree": deg,
                    "incidence": incidence,
                    "pdeg": pdeg(deg, incidence, weights),
                }
            )
    return rows


@dataclass(frozen=True)
class FlagConfig:
    """Puncture positions and the four flag lines in normalized position."""

    p: GaussianRational
    lines: Tuple[Tuple[GaussianRational, GaussianRational], ...]
    w: str  # "0", "1", "inf" or "p": the cross-ratio slot of the fourth flag

    def to_json(self) -> dict:
        return {
            "p": [str(self.p.re), str(self.p.im)],
            "lines": [[[str(a.re), str(a.im)], [str(b.re), str(b.im)]] for a, b in self.lines],
            "w": self.w,
        }


@dataclass(frozen=True)
class ToyHiggsField:
    """One of the explicit nilpotent fields, with its flag configuration.

    ``matrix`` carries the full rational matrix including the denominator
    prefactor; ``poles`` names the punctures with nonzero residue and
    ``vanishing`` those where the residue is required to vanish.
    """

    which: str
    matrix: RationalFunctionMatrix
    flags: FlagConfig
    poles: Tuple[str, ...]
    vanishing: Tuple[str, ...]
    finite_poles: Tuple[GaussianRational, ...]

    def one_form(self) -> MatrixOneForm:
        return MatrixOneForm.from_dz(self.matrix)


_L1 = (GR0, GR1)
_L2 = (GR1, GR1)
_L3 = (GR1, GR0)


def _flag_for_w(w: str, p: GaussianRational):
    if w == "0":
        return _L1
    if w == "1":
        return _L2
    if w == "inf":
        return _L3
    return (p, GR1)


def build_toy_higgs(which: str, p=2) -> ToyHiggsField:
    """Construct one of the four explicit fields; all invariants are verified
    exactly at construction time."""
    p = GaussianRational.coerce(p)
    if p == GaussianRational(0) or p == GaussianRational(1):
        raise BadPuncture("the movable puncture must avoid 0 and 1")
    z = BRF.z()
    one = BRF.one()
    zero = BRF.zero()
    if which == "phi_p":
        pref = BRF.from_poles(1, [GR0, GR1, p])
        grid = [[z, -(z * z)], [one, -z]]
        w = "p"
        poles = ("0", "1", "inf", "p")
    elif which == "phi_0":
        pref = BRF.from_poles(1, [GR0, p])
        grid = [[zero, zero], [one, zero]]
        w = "0"
        poles = ("0", "p")
    elif which == "phi_1":
        pref = BRF.from_poles(1, [GR1, p])
        grid = [[one, -one], [one, -one]]
        w = "1"
        poles = ("1", "p")
    elif which == "phi_inf":
        pref = BRF.from_poles(1, [p])
        grid = [[zero, one], [zero, zero]]
        w = "inf"
        poles = ("inf", "p")
    else:
        raise ValueError(f"unknown toy field {which!r}; use phi_p, phi_0, phi_1, phi_inf")

    matrix = RationalFunctionMatrix(grid).scale(pref)
    flags = FlagConfig(
        p=p,
        lines=(_L1, _L2, _L3, _flag_for_w(w, p)),
        w=w,
    )
    vanishing = tuple(s for s in ("0", "1", "inf", "p") if s not in poles)
    positions = {"0": GaussianRational(0), "1": GaussianRational(1), "p": p}
    field = ToyHiggsField(
        which=which,
        matrix=matrix,
        flags=flags,
        poles=poles,
        vanishing=vanishing,
        finite_poles=tuple(positions[s] for s in poles if s != "inf"),
    )
    _verify_toy_invariants(field)
    return field


def _verify_toy_invariants(field: ToyHiggsField) -> None:
    m = field.matrix
    if not (m @ m).is_zero:
        raise ValueError(f"{field.which}: matrix square is not exactly zero")
    if m.trace():
        raise ValueError(f"{field.which}: matrix is not exactly traceless")
    res = residues(field)
    flags = dict(zip(("0", "1", "inf", "p"), field.flags.lines))
    for site in ("0", "1", "inf", "p"):
        r = res[site]
        if site in field.vanishing:
            if any(any(x for x in row) for row in r):
                raise ValueError(f"{field.which}: residue at {site} must vanish")
            continue
        if not any(any(x for x in row) for row in r):
            raise ValueError(f"{field.which}: residue at {site} must be nonzero")
        _check_strong_parabolic(r, flags[site], field.which, site)


def _check_strong_parabolic(res, flag, which: str, site: str) -> None:
    """res kills the flag line and maps everything into it (nilpotent, rank 1)."""
    a, b = flag
    v0 = res[0][0] * a + res[0][1] * b
    v1 = res[1][0] * a + res[1][1] * b
    if v0 or v1:
        raise ValueError(f"{which}: residue at {site} does not annihilate the flag")
    # image inside the flag line: columns proportional to (a, b)
    for col in range(2):
        x, y = res[0][col], res[1][col]
        if x * b != y * a:
            raise ValueError(f"{which}: residue image at {site} leaves the flag line")


# -- residues ----------------------------------------------------------------


def _univariate_coeffs(poly: BiPolynomial) -> List[GaussianRational]:
    """Coefficient list in z of a zbar-free polynomial, low degree first."""
    deg_z, deg_zb = poly.degree()
    if deg_zb > 0:
        raise ValueError("expected a holomorphic (zbar-free) polynomial")
    coeffs = [GR0] * (deg_z + 1 if deg_z >= 0 else 1)
    for (i, _j), c in poly.terms.items():
        coeffs[i] = c
    return coeffs


def _eval_coeffs(coeffs, a: GaussianRational) -> GaussianRational:
    total = GR0
    for c in reversed(coeffs):
        total = total * a + c
    return total


def _deflate(coeffs, a: GaussianRational):
    """Divide by (z - a) via synthetic division; the remainder is discarded
    (callers only deflate at verified roots)."""
    out = [GR0] * (len(coeffs) - 1)
    carry = GR0
    for i in range(len(coeffs) - 1, 0, -1):
        carry = coeffs[i] + carry * a
        out[i - 1] = carry
    return out


def _entry_residue(entry: BRF, a: GaussianRational) -> GaussianRational:
    """Exact residue at a simple pole z = a of a holomorphic rational entry."""
    num = _univariate_coeffs(entry.num)
    den = _univariate_coeffs(entry.den)
    if _eval_coeffs(den, a):
        return GR0
    quotient = _deflate(den, a)
    qa = _eval_coeffs(quotient, a)
    if not qa:
        raise ValueError(f"pole at {a!r} is not simple")
    return _eval_coeffs(num, a) / qa


def residues(field: ToyHiggsField) -> Dict[str, list]:
    """Exact residue matrix at each of the four punctures.

    Finite punctures by direct partial fractions; infinity through the
    w = 1/z chart with its Jacobian factor.
    """
    positions = {"0": GaussianRational(0), "1": GaussianRational(1), "p": field.flags.p}
    out: Dict[str, list] = {}
    for site, a in positions.items():
        out[site] = [
            [_entry_residue(e, a) for e in row] for row in field.matrix.entries
        ]
    flipped = transform_chart_inverse(MatrixOneForm.from_dz(field.matrix))
    out["inf"] = [
        [_entry_residue(e, GaussianRational(0)) for e in row]
        for row in flipped.dz_part.entries
    ]
    return out


def toy_quadratic_differential(c, p=2) -> BRF:
    """c / (z (z-1) (z-p)), the dz^2 coefficient of the only available shape."""
    c = GaussianRational.coerce(c)
    p = GaussianRational.coerce(p)
    if not c:
        return BRF.zero()
    return BRF.from_poles(c, [GR0, GR1, p])


def parabolic_model_connection(rho) -> MatrixOneForm:
    """Unitary-frame model connection around a weighted puncture.

    The angular form rewrites rationally: (rho/2) diag(1,-1) (dz/z - dzbar/zbar).
    """
    rho = Fraction(rho)
    if not (0 <= rho < Fraction(1, 2)):
        raise ValueError("weight must lie in [0, 1/2)")
    if rho == 0:
        return MatrixOneForm.zero(2)
    half = GaussianRational(rho / 2)
    z, zbar = BRF.z(), BRF.zbar()
    dz_coeff = BRF.constant(half) / z
    dzbar_coeff = -(BRF.constant(half) / zbar)
    dz = RationalFunctionMatrix([[dz_coeff, BRF.zero()], [BRF.zero(), -dz_coeff]])
    dzbar = RationalFunctionMatrix([[dzbar_coeff, BRF.zero()], [BRF.zero(), -dzbar_coeff]])
    return MatrixOneForm(dz, dzbar)


def nilpotent_cone_graph(p, weights: ParabolicWeights) -> dict:
    """Incidence graph of the nilpotent locus: a star-of-spheres configuration.

    One central node (the sphere of stable parabolic bundles, parameter w),
    four family nodes (scaling orbits attached at w = 0, 1, inf, p) and four
    limit-point tips; 9 nodes and 8 edges.  The fixed-point locus is the
    central sphere plus the four tips.
    """
    report = check_weight_inequalities(weights)
    if not report.all_pass:
        raise UnstableWeights("weights fail the stability inequalities")
    p = GaussianRational.coerce(p)
    if p == GaussianRational(0) or p == GaussianRational(1):
        raise BadPuncture("the movable puncture must avoid 0 and 1")

    sites = (
        ("0", "phi_0", "limit of the w=0 orbit (unstable underlying bundle)"),
        ("1", "phi_1", "limit of the w=1 orbit (unstable underlying bundle)"),
        ("inf", "phi_inf", "limit of the w=inf orbit (unstable underlying bundle)"),
        ("p", "phi_p", "uniformization point"),
    )
    w_values = {"0": "0", "1": "1", "inf": "inf", "p": str(p.re) if not p.im else f"{p.re}+{p.im}i"}
    nodes = [
        {
            "id": "center",
            "kind": "center",
            "label": "sphere of stable parabolic bundles, parameter w",
            "vhs": True,
            "attachments": [w_values[s] for s, _f, _l in sites],
        }
    ]
    edges = []
    for site, field, limit_label in sites:
        fam = f"family_{site}"
        lim = f"limit_{site}"
        nodes.append(
            {
                "id": fam,
                "kind": "family",
                "label": f"scaling orbit of {field}",
                "w": w_values[site],
                "vhs": False,
            }
        )
        nodes.append({"id": lim, "kind": "limit", "label": limit_label, "vhs": True})
        edges.append(["center", fam])
        edges.append([fam, lim])
    return {"schema": "nilwkb/1", "nodes": nodes, "edges": edges}
