import math
from fractions import Fraction

import pytest

from nilwkb.algebra import BiRationalFunction as BRF, GaussianRational
from nilwkb.errors import BadPuncture, UnstableWeights
from nilwkb.toymodel import (
    ParabolicWeights,
    build_toy_higgs,
    check_weight_inequalities,
    nilpotent_cone_graph,
    parabolic_model_connection,
    pdeg,
    pdeg_table,
    residues,
    toy_quadratic_differential,
)

GOOD = ParabolicWeights.parse("1/4,1/4,1/4,1/8")


def test_weight_inequalities_pass():
    report = check_weight_inequalities(GOOD)
    assert report.all_pass
    assert report.total == Fraction(7, 8)


def test_weight_inequalities_sum_failure():
    report = check_weight_inequalities(ParabolicWeights.parse("1/4,1/4,1/4,1/4"))
    assert not report.sum_ok
    assert report.total == 1


def test_weight_inequalities_permutation_failure():
    report = check_weight_inequalities(ParabolicWeights.parse("1/3,1/8,1/8,1/16"))
    assert not report.permutation_bounds_ok
    # the witness places the large weight first: 1/3 > 1/8 + 1/8 + 1/16
    assert any(sigma[0] == 0 and side == "lower" for sigma, side in report.permutation_violations)


def test_weight_domain():
    with pytest.raises(ValueError):
        ParabolicWeights.parse("1/2,1/4,1/4,1/8")
    with pytest.raises(ValueError):
        ParabolicWeights.parse("0,1/4,1/4,1/8")


def test_pdeg_examples():
    assert pdeg(0, [True, False, False, True], GOOD) == Fraction(-1, 8)
    assert pdeg(-1, [True, True, True, False], GOOD) == Fraction(-3, 8)
    # degree -2 lines are negative for any incidence with these weights
    for row in pdeg_table(GOOD, degrees=(-2,)):
        assert row["pdeg"] < 0


def test_pdeg_stability_enumeration():
    # stable weights: every degree-0 line through at most one flag and every
    # degree -1 line through at most three flags has negative parabolic degree
    for row in pdeg_table(GOOD, degrees=(0, -1)):
        hits = sum(row["incidence"])
        if row["degree"] == 0 and hits <= 1:
            assert row["pdeg"] < 0
        if row["degree"] == -1 and hits <= 3:
            assert row["pdeg"] < 0


def test_build_all_fields_verify_invariants():
    for which in ("phi_p", "phi_0", "phi_1", "phi_inf"):
        field = build_toy_higgs(which, 2)
        m = field.matrix
        assert (m @ m).is_zero
        assert not m.trace()
        assert len(field.poles) + len(field.vanishing) == 4


def test_build_rejects_bad_puncture():
    with pytest.raises(BadPuncture):
        build_toy_higgs("phi_p", 1)
    with pytest.raises(BadPuncture):
        build_toy_higgs("phi_0", 0)
    with pytest.raises(ValueError):
        build_toy_higgs("phi_q", 2)


def test_residues_phi_p():
    field = build_toy_higgs("phi_p", 2)
    res = residues(field)
    half = GaussianRational(Fraction(1, 2))
    assert res["0"] == [[GaussianRational(0), GaussianRational(0)], [half, GaussianRational(0)]]
    # residue at infinity is E12 (computed in the inverse chart)
    assert res["inf"][0][1] == GaussianRational(1)
    assert res["inf"][1][0] == GaussianRational(0)
    # every nonzero residue is nilpotent
    for site in field.poles:
        r = res[site]
        sq = [
            [
                r[0][0] * r[0][0] + r[0][1] * r[1][0],
                r[0][0] * r[0][1] + r[0][1] * r[1][1],
            ],
            [
                r[1][0] * r[0][0] + r[1][1] * r[1][0],
                r[1][0] * r[0][1] + r[1][1] * r[1][1],
            ],
        ]
        assert all(not x for row in sq for x in row), site


def test_residues_vanish_where_declared():
    for which in ("phi_0", "phi_1", "phi_inf"):
        field = build_toy_higgs(which, 2)
        res = residues(field)
        for site in field.vanishing:
            assert all(not x for row in res[site] for x in row), (which, site)
        for site in field.poles:
            assert any(x for row in res[site] for x in row), (which, site)


def test_phi_inf_regular_at_origin():
    field = build_toy_higgs("phi_inf", 2)
    assert residues(field)["0"] == [[GaussianRational(0)] * 2] * 2


def test_quadratic_differential():
    assert toy_quadratic_differential(0, 2).is_zero
    q = toy_quadratic_differential(1, 2)
    assert q.evaluate(3.0) == pytest.approx(1 / 6)
    # simple pole at infinity: the dz^2 coefficient transforms with the squared
    # Jacobian, q(1/w) / w^4, and w * that is finite and nonzero at w = 0
    z = BRF.z()
    w_chart = q.invert_chart() / (z * z * z * z)
    softened = w_chart * z
    num0 = softened.num.eval_exact(GaussianRational(0), GaussianRational(0))
    den0 = softened.den.eval_exact(GaussianRational(0), GaussianRational(0))
    assert den0 and num0


def test_parabolic_model_connection_form():
    mc = parabolic_model_connection(Fraction(1, 4))
    assert mc.dz_part.entries[0][0] == BRF.constant(Fraction(1, 8)) / BRF.z()
    assert mc.dzbar_part.entries[0][0] == -(BRF.constant(Fraction(1, 8)) / BRF.zbar())
    assert parabolic_model_connection(0).is_zero


def test_parabolic_model_holonomy_is_rotation():
    # loop holonomy of d + A around the puncture: diag(e^{-2 pi i rho}, e^{2 pi i rho})
    from nilwkb.algebra import GaussianRational
    from nilwkb.connection import ConnectionFamily, MatrixOneForm
    from nilwkb.holonomy import ParamPath, transport

    rho = Fraction(1, 4)
    mc = parabolic_model_connection(rho)
    fam = ConnectionFamily(
        2,
        MatrixOneForm.zero(2),
        mc,
        MatrixOneForm.zero(2),
        punctures=[GaussianRational(0)],
    )
    sample = transport(fam, ParamPath.circle(), 1.0, rel_tol=1e-11)
    expected = 2 * math.cos(2 * math.pi * rho)
    assert abs(sample.trace - expected) < 1e-9


def test_cone_graph_shape():
    graph = nilpotent_cone_graph(2, GOOD)
    assert len(graph["nodes"]) == 9
    assert len(graph["edges"]) == 8
    degree = {}
    for a, b in graph["edges"]:
        degree[a] = degree.get(a, 0) + 1
        degree[b] = degree.get(b, 0) + 1
    assert degree["center"] == 4
    assert sorted(degree.values()) == [1, 1, 1, 1, 2, 2, 2, 2, 4]
    center = next(n for n in graph["nodes"] if n["id"] == "center")
    assert set(center["attachments"]) == {"0", "1", "inf", "2"}
    # the fixed-point locus: the central sphere and the four tips
    vhs = {n["id"] for n in graph["nodes"] if n["vhs"]}
    assert vhs == {"center", "limit_0", "limit_1", "limit_inf", "limit_p"}
    assert any("uniformization" in n["label"] for n in graph["nodes"] if n["kind"] == "limit")


def test_cone_graph_rejects_unstable_weights():
    with pytest.raises(UnstableWeights):
        nilpotent_cone_graph(2, ParabolicWeights.parse("1/4,1/4,1/4,1/4"))


def test_kernel_line_meets_flags():
    # the kernel line (z, 1) of the movable-puncture field passes through each
    # flag at the corresponding puncture
    field = build_toy_higgs("phi_p", 3)
    res = residues(field)
    for site, position in (("0", 0), ("1", 1), ("p", 3)):
        r = res[site]
        v = (GaussianRational(position), GaussianRational(1))
        image = (
            r[0][0] * v[0] + r[0][1] * v[1],
            r[1][0] * v[0] + r[1][1] * v[1],
        )
        assert not image[0] and not image[1], site
