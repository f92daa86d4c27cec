import json
import random
from fractions import Fraction

import pytest

from nilwkb.algebra import (
    BiRationalFunction as BRF,
    GaussianRational,
    RationalFunctionMatrix,
)
from nilwkb.catalog import catalog, nilpotent_sl2
from nilwkb.connection import (
    ConnectionFamily,
    MatrixOneForm,
    check_flatness,
    conformal_limit_family,
    scale_orbit,
    transform_chart_inverse,
)
from nilwkb.errors import DimensionMismatch, ZeroScale

E12 = RationalFunctionMatrix.from_scalars([[0, 1], [0, 0]])
E21 = RationalFunctionMatrix.from_scalars([[0, 0], [1, 0]])


def _family(phi_dz=None, conn_dz=None, psi_dzbar=None, n=2, **kw):
    zero = MatrixOneForm.zero(n)
    return ConnectionFamily(
        n,
        MatrixOneForm.from_dz(phi_dz) if phi_dz is not None else zero,
        MatrixOneForm.from_dz(conn_dz) if conn_dz is not None else zero,
        MatrixOneForm.from_dzbar(psi_dzbar) if psi_dzbar is not None else zero,
        **kw,
    )


def test_flatness_examples():
    assert check_flatness(_family(phi_dz=E12)).is_flat
    assert check_flatness(_family(phi_dz=E12, conn_dz=E21)).is_flat

    z, zbar = BRF.z(), BRF.zbar()
    phi = RationalFunctionMatrix([[BRF.zero(), z], [BRF.zero(), BRF.zero()]])
    psi = RationalFunctionMatrix([[BRF.zero(), BRF.zero()], [zbar, BRF.zero()]])
    report = check_flatness(_family(phi_dz=phi, psi_dzbar=psi))
    assert not report.is_flat
    assert not report.residuals["curvature_plus_phi_wedge_psi"].is_zero
    for name in ("phi_wedge_phi", "psi_wedge_psi", "D_phi", "D_psi"):
        assert report.residuals[name].is_zero


def test_flatness_detects_nonholomorphic_phi():
    phi = RationalFunctionMatrix([[BRF.zero(), BRF.zbar()], [BRF.zero(), BRF.zero()]])
    report = check_flatness(_family(phi_dz=phi))
    assert not report.is_flat
    assert not report.residuals["D_phi"].is_zero


def test_family_type_invariants():
    with pytest.raises(DimensionMismatch):
        ConnectionFamily(2, MatrixOneForm.from_dzbar(E21), MatrixOneForm.zero(2), MatrixOneForm.zero(2))
    with pytest.raises(ValueError):
        _family(phi_dz=RationalFunctionMatrix.from_scalars([[1, 0], [0, 0]]))


def test_undeclared_pole_rejected():
    from nilwkb.errors import PoleHit

    z = BRF.z()
    phi = RationalFunctionMatrix([[BRF.zero(), BRF.one() / z], [BRF.zero(), BRF.zero()]])
    with pytest.raises(PoleHit):
        _family(phi_dz=phi)  # pole at 0, nothing declared
    with pytest.raises(PoleHit):
        _family(phi_dz=phi, punctures=[GaussianRational(1)])  # wrong point
    fam = _family(phi_dz=phi, punctures=[GaussianRational(0)])
    assert check_flatness(fam).is_flat
    # zbar-side poles count against the conjugate locus
    psi = RationalFunctionMatrix(
        [[BRF.zero(), BRF.zero()], [BRF.one() / BRF.zbar(), BRF.zero()]]
    )
    fam2 = ConnectionFamily(
        2,
        MatrixOneForm.zero(2),
        MatrixOneForm.zero(2),
        MatrixOneForm.from_dzbar(psi),
        punctures=[GaussianRational(0)],
    )
    assert fam2.punctures == (GaussianRational(0),)


def test_conformal_limit_assembly():
    fam = conformal_limit_family(
        MatrixOneForm.from_dz(E12),
        MatrixOneForm.zero(2),
        MatrixOneForm.zero(2),
        MatrixOneForm.from_dzbar(E21),
    )
    assert fam.exponents == (Fraction(-1), Fraction(0), Fraction(1))
    assert fam.phi.dz_part == E12
    assert fam.psi.dzbar_part == E21
    # all-zero input gives the trivial flat family
    triv = conformal_limit_family(
        MatrixOneForm.zero(2), MatrixOneForm.zero(2), MatrixOneForm.zero(2), MatrixOneForm.zero(2)
    )
    assert check_flatness(triv).is_flat
    with pytest.raises(DimensionMismatch):
        conformal_limit_family(
            MatrixOneForm.from_dz(E12),
            MatrixOneForm.zero(3),
            MatrixOneForm.zero(2),
            MatrixOneForm.zero(2),
        )


def test_scale_orbit():
    fam = _family(phi_dz=E12)
    assert scale_orbit(fam, 1) == fam
    doubled = scale_orbit(fam, 2)
    assert doubled.phi.dz_part.entries[0][1] == BRF.constant(2)
    with pytest.raises(ZeroScale):
        scale_orbit(fam, 0)


def test_scale_orbit_preserves_flatness_with_inverse_psi():
    # phi -> xi phi together with psi -> xi^-1 psi keeps every catalog family flat
    xi = GaussianRational(Fraction(3), Fraction(1, 2))
    for name, fam in catalog().items():
        scaled = ConnectionFamily(
            fam.n,
            fam.phi.scale(xi),
            fam.conn,
            fam.psi.scale(GaussianRational(1) / xi),
            punctures=fam.punctures,
            exponents=fam.exponents,
        )
        assert check_flatness(scaled).is_flat, name


def test_catalog_is_exactly_flat():
    for name, fam in catalog().items():
        assert check_flatness(fam).is_flat, name


def _random_constant_gauge(rng, n):
    while True:
        grid = [
            [GaussianRational(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(n)]
            for _ in range(n)
        ]
        det = grid[0][0] * grid[1][1] - grid[0][1] * grid[1][0] if n == 2 else None
        if n == 2 and det:
            inv = [
                [grid[1][1] / det, -grid[0][1] / det],
                [-grid[1][0] / det, grid[0][0] / det],
            ]
            return (
                RationalFunctionMatrix.from_scalars(grid),
                RationalFunctionMatrix.from_scalars(
                    [[GaussianRational.coerce(x) for x in row] for row in inv]
                ),
            )


def test_flatness_gauge_natural_under_constant_gauge():
    rng = random.Random(5)
    for name, fam in catalog().items():
        if fam.n != 2:
            continue
        g, g_inv = _random_constant_gauge(rng, 2)
        conjugated = ConnectionFamily(
            fam.n,
            fam.phi.conjugate_by(g_inv, g),
            fam.conn.conjugate_by(g_inv, g),
            fam.psi.conjugate_by(g_inv, g),
            punctures=fam.punctures,
        )
        assert check_flatness(conjugated).is_flat == check_flatness(fam).is_flat, name


def test_chart_transform():
    z, one = BRF.z(), BRF.one()
    # dz/z -> -dw/w
    form = MatrixOneForm.from_dz(RationalFunctionMatrix([[one / z]]))
    assert transform_chart_inverse(form).dz_part.entries[0][0] == -(one / z)
    # constant dz picks up -1/w^2
    const = MatrixOneForm.from_dz(RationalFunctionMatrix([[one]]))
    assert transform_chart_inverse(const).dz_part.entries[0][0] == -(one / (z * z))


def test_family_json_round_trip():
    for name, fam in catalog().items():
        blob = json.dumps(fam.to_json(), sort_keys=True)
        back = ConnectionFamily.from_json(json.loads(blob))
        assert back == fam, name
        assert json.dumps(back.to_json(), sort_keys=True) == blob


def test_cli_family_flatness_exit_code(tmp_path):
    from nilwkb.cli import main

    path = tmp_path / "fam.json"
    path.write_text(json.dumps(nilpotent_sl2().to_json()))
    assert main(["flatness", str(path)]) == 0
