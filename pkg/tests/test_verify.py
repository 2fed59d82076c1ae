"""Property checks: Hardy functional, algebraic identities, pollution demo.

The identity checks are near machine precision by construction, so their
assertions are tight; the Hardy and truncation checks are inequalities
and only get one-sided floors.
"""

import json
import math

import pytest

from diracgap.mesh import build_mesh
from diracgap.model import PotentialSpec, SpaceDim, make_sector
from diracgap.verify import (DISCREPANCY_TOL, HARDY_FLOOR, TrialFamily,
                             _trials, hardy_check, pollution_demo,
                             qshift_identity_check, sos_identity_check,
                             suite, truncation_convergence)

SMALL_FAMILY = TrialFamily(seed=11, size=10)


class TestTrialFamily:
    def test_seed_determinism(self):
        def snapshot(fam):
            return [(b.a, b.b, tuple(b.coeffs)) for b in _trials(fam)]

        assert snapshot(TrialFamily(seed=3)) == snapshot(TrialFamily(seed=3))
        assert snapshot(TrialFamily(seed=3)) != snapshot(TrialFamily(seed=4))

    def test_supports_stay_away_from_origin(self):
        for bump in _trials(TrialFamily(seed=5, size=50)):
            assert 0.05 <= bump.a < bump.b


class TestHardyCheck:
    @pytest.mark.parametrize("dim,coupling", [
        (SpaceDim.ThreeD, -1), (SpaceDim.ThreeD, 1),
        (SpaceDim.TwoD, -0.5), (SpaceDim.TwoD, 0.5),
    ])
    @pytest.mark.parametrize("a", [0.1, 1.0, 10.0])
    def test_functional_is_nonnegative(self, dim, coupling, a):
        sector = make_sector(dim, coupling)
        assert hardy_check(a, SMALL_FAMILY, sector) >= HARDY_FLOOR

    def test_rejects_bad_inputs(self):
        sector = make_sector(SpaceDim.ThreeD, -1)
        with pytest.raises(ValueError, match="a must be positive"):
            hardy_check(0.0, SMALL_FAMILY, sector)
        with pytest.raises(ValueError, match="Hardy reduction needs"):
            hardy_check(1.0, SMALL_FAMILY,
                        make_sector(SpaceDim.ThreeD, -2))

    def test_quadrature_refinement_converges(self):
        """Low-order composite Gauss must gain >= 4x per panel doubling."""
        fam = TrialFamily(seed=7, size=5)
        sector = make_sector(SpaceDim.ThreeD, -1)
        ref = hardy_check(1.0, fam, sector, panels=256, order=12)
        errs = [abs(hardy_check(1.0, fam, sector, panels=p, order=3) - ref)
                for p in (4, 8, 16)]
        for coarse, fine in zip(errs, errs[1:]):
            assert fine <= coarse / 4.0 or fine <= 1e-12


class TestIdentityChecks:
    @pytest.mark.parametrize("dim", [SpaceDim.ThreeD, SpaceDim.TwoD])
    @pytest.mark.parametrize("channel", [0, 1])
    def test_sum_of_squares_is_exact(self, dim, channel):
        worst = sos_identity_check(SMALL_FAMILY, dim, channel)
        assert worst <= DISCREPANCY_TOL

    def test_sum_of_squares_channel_validation(self):
        with pytest.raises(ValueError, match="channel must be 0 or 1"):
            sos_identity_check(SMALL_FAMILY, channel=2)

    def test_lambda_shift_is_exact(self):
        assert qshift_identity_check(SMALL_FAMILY) <= DISCREPANCY_TOL

    def test_lambda_shift_grid_validation(self):
        with pytest.raises(ValueError, match=r"lie in \(-1, 1\)"):
            qshift_identity_check(SMALL_FAMILY, lambdas=(0.0, 1.0))


class TestTruncationConvergence:
    SPEC = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.9)
    MESH = build_mesh("geometric", rmax=80.0, n=800, rmin=1e-8)

    def test_finite_ladder_descends_to_the_base_level(self):
        table = truncation_convergence(self.SPEC, (1.0, 0.1, 0.01),
                                       self.MESH)
        assert table.monotone and table.bounded_below
        assert table.levels == tuple(sorted(table.levels, reverse=True))
        assert table.final_gap == table.levels[-1] - table.base_level
        assert 0.0 <= table.final_gap <= 0.05

    def test_inf_sentinel_reproduces_the_untruncated_level(self):
        table = truncation_convergence(self.SPEC, (math.inf, 1.0, 0.1),
                                       self.MESH)
        assert table.levels[0] == table.base_level
        # the untruncated potential sits below every truncated one, so a
        # ladder led by inf cannot have a non-increasing level column
        assert not table.monotone
        assert table.bounded_below
        csv = table.to_csv().splitlines()
        assert csv[0] == "eps,lambda1,gap_to_base"
        assert csv[1].startswith("inf,") and csv[1].endswith("0.000e+00")
        assert table.to_dict()["eps"][0] == "inf"
        assert json.loads(table.to_json())["eps"] == ["inf", 1.0, 0.1]

    def test_rejects_bad_ladders(self):
        with pytest.raises(ValueError, match="strictly decreasing"):
            truncation_convergence(self.SPEC, (0.1, 0.1), self.MESH)
        truncated = PotentialSpec(dim=SpaceDim.ThreeD, kind="truncated",
                                  nu=0.9, eps=1.0)
        with pytest.raises(ValueError, match="pure Coulomb"):
            truncation_convergence(truncated, (1.0, 0.1), self.MESH)


@pytest.fixture(scope="module")
def pollution():
    return pollution_demo(make_sector(SpaceDim.ThreeD, -1), nu=0.9, dof=100)


class TestPollutionDemo:
    def test_naive_basis_salts_the_gap(self, pollution):
        assert pollution.spurious
        assert set(pollution.spurious) <= set(pollution.naive_levels)
        assert pollution.spurious[0] == pytest.approx(0.67581867898,
                                                      abs=1e-6)

    def test_minmax_levels_stay_clean_at_equal_dof(self, pollution):
        assert len(pollution.minmax_levels) == 3
        for e in pollution.minmax_levels:
            closest = min(abs(e - lvl.energy) for lvl in pollution.oracle)
            assert closest <= 1e-3

    def test_to_dict_layout(self, pollution):
        d = pollution.to_dict()
        assert set(d) == {"sector", "threshold", "naive_levels",
                          "oracle_levels", "spurious", "minmax_levels",
                          "naive_mesh", "minmax_mesh"}
        assert d["sector"] == {"kappa": -1}
        assert d["naive_mesh"]["rmax"] == 200.0
        assert d["minmax_mesh"]["rmax"] == 30.0

    def test_rejects_bad_inputs(self):
        sector = make_sector(SpaceDim.ThreeD, -1)
        with pytest.raises(ValueError, match="capped at dof = 400"):
            pollution_demo(sector, nu=0.9, dof=401)
        with pytest.raises(ValueError, match="overcritical"):
            pollution_demo(sector, nu=1.5, dof=50)
        with pytest.raises(ValueError, match="expected 50"):
            pollution_demo(sector, nu=0.9, dof=50,
                           mesh=build_mesh("algebraic", rmax=30.0, n=10))


@pytest.fixture(scope="module")
def reduced_suite():
    return suite(seed=0, hardy_trials=40, identity_trials=6)


class TestSuite:
    def test_every_check_passes(self, reduced_suite):
        assert reduced_suite.passed
        assert set(reduced_suite.checks) == {
            "hardy", "sum_of_squares", "lambda_shift", "truncation",
            "pollution"}

    def test_table_layout(self, reduced_suite):
        lines = reduced_suite.table().splitlines()
        assert lines[0] == f"{'check':<24}{'status':<8}worst value"
        assert len(lines) == 6
        for line in lines[1:]:
            assert line[24:28] == "pass"

    def test_json_round_trip(self, reduced_suite):
        blob = json.loads(reduced_suite.to_json())
        assert set(blob) == set(reduced_suite.checks)
        for name, entry in blob.items():
            assert entry["pass"] is True
            assert entry["worst"] == reduced_suite.checks[name].worst
