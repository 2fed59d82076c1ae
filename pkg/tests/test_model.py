"""Potential evaluation, admissibility, sectors, and the gap window."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diracgap.model import (
    Admissibility,
    GapWindow,
    PotentialSpec,
    SpaceDim,
    check_admissible,
    enumerate_sectors,
    evaluate_potential,
    gap_window,
    indicial_exponent,
    make_sector,
    sector_degeneracy,
    sup_potential,
)


class TestSpaceDim:
    def test_parse_accepts_value_digit_and_name(self):
        for text in ("3d", "3", "ThreeD", SpaceDim.ThreeD):
            assert SpaceDim.parse(text) is SpaceDim.ThreeD
        for text in ("2d", "2", "TwoD", SpaceDim.TwoD):
            assert SpaceDim.parse(text) is SpaceDim.TwoD

    def test_parse_rejects_unknown(self):
        with pytest.raises(ValueError, match="unknown dimension"):
            SpaceDim.parse("4d")

    def test_critical_couplings(self):
        assert SpaceDim.ThreeD.nu_crit == 1.0
        assert SpaceDim.TwoD.nu_crit == 0.5


class TestPotentialValues:
    def test_coulomb(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.5)
        assert evaluate_potential(spec, 2.0) == -0.25
        r = np.array([0.5, 1.0, 4.0])
        np.testing.assert_allclose(evaluate_potential(spec, r),
                                   [-1.0, -0.5, -0.125])

    def test_truncated_plateau_and_tail(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="truncated", nu=0.5,
                             eps=0.1)
        # plateau -1/eps = -10 holds for r < nu*eps = 0.05
        assert evaluate_potential(spec, 0.01) == -10.0
        assert evaluate_potential(spec, 1.0) == -0.5

    def test_scaled(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="scaled", nu=0.5,
                             eps=0.2)
        assert evaluate_potential(spec, 1.0) == pytest.approx(-0.4)

    def test_step_inside_and_outside(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb_step",
                             nu=0.5, height=0.3, radius=2.0)
        assert evaluate_potential(spec, 1.0) == pytest.approx(-0.5 + 0.3)
        assert evaluate_potential(spec, 4.0) == pytest.approx(-0.125)

    def test_rejects_nonpositive_radius(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.5)
        with pytest.raises(ValueError, match="r > 0"):
            evaluate_potential(spec, 0.0)
        with pytest.raises(ValueError, match="r > 0"):
            evaluate_potential(spec, np.array([1.0, -2.0]))

    def test_sup_potential_matches_dense_sampling(self):
        r = np.geomspace(1e-6, 1e6, 20001)
        for spec in (
            PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.9),
            PotentialSpec(dim=SpaceDim.ThreeD, kind="truncated", nu=0.9,
                          eps=0.3),
            PotentialSpec(dim=SpaceDim.ThreeD, kind="scaled", nu=0.9,
                          eps=0.5),
            PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb_step", nu=0.9,
                          height=0.7, radius=2.0),
            PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb_step", nu=0.9,
                          height=0.1, radius=0.5),
        ):
            sampled = float(np.max(evaluate_potential(spec, r)))
            assert sup_potential(spec) >= sampled - 1e-12, spec.kind
            # the sup is tight: approached somewhere on the sampled range
            assert sup_potential(spec) <= sampled + 1e-3, spec.kind


class TestPotentialValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown potential kind"):
            PotentialSpec(dim=SpaceDim.ThreeD, kind="yukawa", nu=0.5)

    def test_nonpositive_nu(self):
        with pytest.raises(ValueError, match="nu must be positive"):
            PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.0)

    def test_truncated_needs_eps(self):
        with pytest.raises(ValueError, match="eps > 0"):
            PotentialSpec(dim=SpaceDim.ThreeD, kind="truncated", nu=0.5)

    def test_scaled_eps_range(self):
        with pytest.raises(ValueError, match="eps in"):
            PotentialSpec(dim=SpaceDim.ThreeD, kind="scaled", nu=0.5,
                          eps=1.0)

    def test_step_needs_height_and_radius(self):
        with pytest.raises(ValueError, match="height and radius"):
            PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb_step", nu=0.5,
                          height=0.1)

    def test_roundtrip_json(self):
        spec = PotentialSpec(dim=SpaceDim.TwoD, kind="coulomb_step", nu=0.3,
                             height=0.25, radius=1.5)
        assert PotentialSpec.from_json(spec.to_json()) == spec

    def test_roundtrip_dict(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="truncated", nu=0.7,
                             eps=0.01)
        data = spec.to_dict()
        assert data == {"dim": "3d", "kind": "truncated", "nu": 0.7,
                        "eps": 0.01}
        assert PotentialSpec.from_dict(data) == spec


class TestAdmissibility:
    def test_subcritical_passes(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.999)
        verdict = check_admissible(spec)
        assert verdict
        assert verdict.violations == ()

    def test_critical_coupling_passes(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=1.0)
        assert check_admissible(spec)
        spec2d = PotentialSpec(dim=SpaceDim.TwoD, kind="coulomb", nu=0.5)
        assert check_admissible(spec2d)

    def test_overcritical_fails(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=1.01)
        verdict = check_admissible(spec)
        assert not verdict
        assert "critical coupling" in verdict.violations[0]

    def test_2d_critical_is_half(self):
        spec = PotentialSpec(dim=SpaceDim.TwoD, kind="coulomb", nu=0.6)
        assert not check_admissible(spec)

    def test_step_sup_bound(self):
        # sup V = height - nu/radius must stay below 1 + sqrt(1 - nu^2)
        nu = 0.8
        bound = 1.0 + math.sqrt(1.0 - nu * nu)
        good = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb_step", nu=nu,
                             height=bound + nu - 0.01, radius=1.0)
        bad = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb_step", nu=nu,
                            height=bound + nu + 0.01, radius=1.0)
        assert check_admissible(good)
        assert not check_admissible(bad)

    def test_negative_step_height_fails(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb_step",
                             nu=0.5, height=-0.1, radius=1.0)
        verdict = check_admissible(spec)
        assert not verdict
        assert "lower bound" in verdict.violations[0]

    def test_bool_protocol(self):
        assert bool(Admissibility(ok=True, violations=()))
        assert not bool(Admissibility(ok=False, violations=("x",)))


class TestGapWindow:
    def test_pure_tail_window(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.9)
        gap = gap_window(spec)
        assert (gap.lower, gap.upper) == (-1.0, 1.0)
        assert gap.width == 2.0

    def test_step_raises_lower_edge(self):
        spec = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb_step",
                             nu=0.5, height=1.7, radius=1.0)
        gap = gap_window(spec)
        assert gap.lower == pytest.approx(sup_potential(spec) - 1.0)
        assert gap.lower > -1.0

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError, match="empty gap window"):
            GapWindow(lower=0.5, upper=0.5)


class TestSectors:
    def test_3d_validation(self):
        assert make_sector(SpaceDim.ThreeD, -1).coupling == -1
        with pytest.raises(ValueError, match="nonzero integer"):
            make_sector(SpaceDim.ThreeD, 0)
        with pytest.raises(ValueError, match="nonzero integer"):
            make_sector(SpaceDim.ThreeD, 0.5)

    def test_2d_validation(self):
        assert make_sector(SpaceDim.TwoD, -0.5).coupling == -0.5
        with pytest.raises(ValueError, match="half-odd-integer"):
            make_sector(SpaceDim.TwoD, 1)

    def test_degeneracy(self):
        assert sector_degeneracy(SpaceDim.ThreeD, -1) == 2
        assert sector_degeneracy(SpaceDim.ThreeD, 2) == 4
        assert sector_degeneracy(SpaceDim.TwoD, -0.5) == 1
        assert sector_degeneracy(SpaceDim.TwoD, 1.5) == 1

    def test_enumerate_3d_order(self):
        couplings = [s.coupling for s in
                     enumerate_sectors(SpaceDim.ThreeD, 2.0)]
        assert couplings == [-1, 1, -2, 2]

    def test_enumerate_2d_order(self):
        couplings = [s.coupling for s in
                     enumerate_sectors(SpaceDim.TwoD, 1.5)]
        assert couplings == [-0.5, 0.5, -1.5, 1.5]

    def test_enumerate_rejects_empty_range(self):
        with pytest.raises(ValueError, match="coupling_max"):
            enumerate_sectors(SpaceDim.ThreeD, 0.5)
        with pytest.raises(ValueError, match="coupling_max"):
            enumerate_sectors(SpaceDim.TwoD, 0.4)

    def test_indicial_exponent(self):
        assert indicial_exponent(make_sector(SpaceDim.ThreeD, -1), 0.6) == \
            pytest.approx(0.8)
        assert indicial_exponent(make_sector(SpaceDim.ThreeD, 1), 1.0) == 0.0
        with pytest.raises(ValueError):
            indicial_exponent(make_sector(SpaceDim.ThreeD, -1), 1.2)


@given(nu=st.floats(min_value=1e-6, max_value=1.0),
       r=st.floats(min_value=1e-6, max_value=1e6))
def test_all_kinds_dominate_their_coulomb_tail(nu, r):
    """Every shipped potential satisfies V(r) >= -nu/r pointwise."""
    coulomb = -nu / r
    specs = [
        PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=nu),
        PotentialSpec(dim=SpaceDim.ThreeD, kind="truncated", nu=nu, eps=0.37),
        PotentialSpec(dim=SpaceDim.ThreeD, kind="scaled", nu=nu, eps=0.37),
        PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb_step", nu=nu,
                      height=0.2, radius=1.3),
    ]
    for spec in specs:
        assert evaluate_potential(spec, r) >= coulomb - 1e-15, spec.kind


@given(kappa=st.integers(min_value=-5, max_value=5).filter(lambda k: k != 0),
       nu=st.floats(min_value=0.01, max_value=0.99))
def test_indicial_exponent_formula(kappa, nu):
    sector = make_sector(SpaceDim.ThreeD, kappa)
    s = indicial_exponent(sector, nu)
    assert s == pytest.approx(math.sqrt(kappa * kappa - nu * nu))
