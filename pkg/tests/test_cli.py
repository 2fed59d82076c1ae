"""Command-line front end: parsing, exit codes, output plumbing.

Heavy numerics are kept to tiny meshes; exit-code routing for failures is
exercised by monkeypatching the underlying library calls.
"""

import json

import pytest

from diracgap import __version__
from diracgap import cli
from diracgap.model import PotentialSpec, SpaceDim
from diracgap.report import ConfigError, RunConfig, parse_mesh
from diracgap.solver import SolverError
from diracgap.verify import CheckOutcome, SuiteReport

SPECTRUM_ARGS = ["spectrum", "--nu", "0.5", "--kappa-max", "1",
                 "--mesh", "algebraic:rmax=20,n=400,p=4", "--tol", "1e-8"]


class TestParseMesh:
    def test_algebraic_and_geometric(self):
        mesh = parse_mesh("algebraic:rmax=20,n=40,p=2")
        assert mesh.kind == "algebraic" and mesh.dof == 39
        mesh = parse_mesh("geometric:rmax=40,n=100,rmin=1e-6")
        assert mesh.kind == "geometric" and mesh.dof == 100

    @pytest.mark.parametrize("text,message", [
        ("algebraic", "expected kind:key=value"),
        ("algebraic:rmax,n=10", "malformed entry"),
        ("algebraic:rmax=x,n=10", "non-numeric value"),
        ("algebraic:rmax=20,n=10,zzz=1", "unknown keys"),
        ("algebraic:p=2", "rmax and n are required"),
        ("spline:rmax=20,n=10", "mesh:"),
    ])
    def test_rejects_malformed_strings(self, text, message):
        with pytest.raises(ConfigError, match=message):
            parse_mesh(text)


class TestRunConfig:
    SPEC = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.5)
    MESH = parse_mesh("algebraic:rmax=20,n=40,p=2")

    def test_validation_messages(self):
        cases = [
            (dict(command="eigs", spec=self.SPEC), "unknown command"),
            (dict(command="verify", spec=self.SPEC, tol=0.0),
             "tol: must be positive"),
            (dict(command="verify", spec=self.SPEC, k_max=0),
             "k_max: must be >= 1"),
            (dict(command="verify", spec=self.SPEC, order=3),
             "order must be >= 4"),
            (dict(command="spectrum", spec=self.SPEC),
             "mesh: required for spectrum"),
            (dict(command="converge-eps", spec=self.SPEC, mesh=self.MESH),
             "at least one eps"),
            (dict(command="converge-mesh", spec=self.SPEC,
                  mesh_ladder=(self.MESH, self.MESH)), ">= 3 meshes"),
            (dict(command="oracle", spec=self.SPEC, kappa=0.5), "kappa:"),
        ]
        for kwargs, message in cases:
            with pytest.raises(ConfigError, match=message):
                RunConfig(**kwargs)

    def test_overcritical_spec_is_rejected(self):
        bad = PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=1.5)
        with pytest.raises(ConfigError, match="spec:"):
            RunConfig(command="spectrum", spec=bad, mesh=self.MESH)

    def test_default_kappa_is_the_ground_sector(self):
        cfg = RunConfig(command="oracle", spec=self.SPEC)
        assert cfg.default_kappa() == -1.0
        spec2d = PotentialSpec(dim=SpaceDim.TwoD, kind="coulomb", nu=0.25)
        assert RunConfig(command="oracle", spec=spec2d).default_kappa() == -0.5
        explicit = RunConfig(command="oracle", spec=self.SPEC, kappa=2.0)
        assert explicit.default_kappa() == 2.0

    def test_json_round_trip(self):
        cfg = RunConfig(command="spectrum", spec=self.SPEC, mesh=self.MESH,
                        coupling_max=2.0, k_max=3, tol=1e-9, threads=2)
        again = RunConfig.from_json(cfg.to_json())
        assert again.to_dict() == cfg.to_dict()

    def test_from_dict_requires_a_spec(self):
        with pytest.raises(ConfigError, match="spec: missing"):
            RunConfig.from_dict({"command": "verify"})


class TestMainSpectrum:
    def test_json_output(self, capsys):
        assert cli.main(SPECTRUM_ARGS) == 0
        blob = json.loads(capsys.readouterr().out)
        assert set(blob) == {"spec", "gap", "levels", "mesh", "walltime_s"}
        energies = [lvl["E"] for lvl in blob["levels"]]
        assert energies[0] == pytest.approx(0.75 ** 0.5, abs=1e-3)

    def test_csv_output(self, capsys):
        assert cli.main(SPECTRUM_ARGS + ["--out", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "E,kappa,k,copy,degeneracy,bracket,residual"
        # kappa = -1 and +1 sectors, two copies each
        assert len(lines) == 5

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "levels.json"
        assert cli.main(SPECTRUM_ARGS + ["--out", str(path)]) == 0
        assert capsys.readouterr().out == ""
        assert "levels" in json.loads(path.read_text())

    def test_csv_is_byte_identical_across_threads(self, capsys):
        outs = []
        for threads in ("1", "4"):
            code = cli.main(SPECTRUM_ARGS
                            + ["--out", "csv", "--threads", threads])
            assert code == 0
            outs.append(capsys.readouterr().out)
        assert outs[0] == outs[1]

    def test_config_file_replaces_flags(self, capsys, tmp_path):
        assert cli.main(SPECTRUM_ARGS + ["--out", "csv"]) == 0
        from_flags = capsys.readouterr().out
        cfg = RunConfig(
            command="spectrum",
            spec=PotentialSpec(dim=SpaceDim.ThreeD, kind="coulomb", nu=0.5),
            mesh=parse_mesh("algebraic:rmax=20,n=400,p=4"),
            coupling_max=1.0, tol=1e-8, out="csv")
        path = tmp_path / "run.json"
        path.write_text(cfg.to_json())
        assert cli.main(["--config", str(path)]) == 0
        assert capsys.readouterr().out == from_flags


class TestMainOtherCommands:
    def test_oracle_csv(self, capsys):
        code = cli.main(["oracle", "--nu", "0.9", "--count", "1",
                         "--out", "csv"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "kappa,n_index,E,residual"
        assert lines[1].startswith("-1,1,0.4358898943541")

    def test_converge_eps_csv(self, capsys):
        code = cli.main(["converge-eps", "--nu", "0.9",
                         "--eps", "1.0,0.1",
                         "--mesh", "geometric:rmax=80,n=600,rmin=1e-8",
                         "--out", "csv"])
        assert code == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "eps,lambda1,gap_to_base"
        assert len(lines) == 3

    def test_converge_mesh_column_is_non_increasing(self, capsys):
        argv = ["converge-mesh", "--nu", "0.5"]
        for n in (100, 200, 400):
            argv += ["--mesh", f"algebraic:rmax=20,n={n},p=4"]
        assert cli.main(argv) == 0
        blob = json.loads(capsys.readouterr().out)
        column = [row[0] for row in blob["levels"]]
        assert column == sorted(column, reverse=True)
        assert blob["dofs"] == [99, 199, 399]
        assert blob["extrapolated"][0] == pytest.approx(0.75 ** 0.5,
                                                        abs=1e-5)

    def test_pollution_demo_json(self, capsys):
        code = cli.main(["pollution-demo", "--nu", "0.9", "--dof", "60"])
        assert code == 0
        blob = json.loads(capsys.readouterr().out)
        assert blob["spurious"]
        assert blob["naive_mesh"]["rmax"] == 200.0

    def test_version(self, capsys):
        assert cli.main(["--version"]) == 0
        assert __version__ in capsys.readouterr().out


class TestExitCodes:
    def test_no_command_is_a_config_error(self, capsys):
        assert cli.main([]) == 2
        assert "a command or --config is required" in capsys.readouterr().err

    @pytest.mark.parametrize("argv", [
        ["spectrum", "--nu", "0.5", "--mesh", "algebraic:rmax=20"],
        ["spectrum", "--nu", "1.5", "--mesh", "algebraic:rmax=20,n=40,p=2"],
        ["oracle", "--nu", "0.5", "--kappa", "0.5"],
        ["converge-mesh", "--nu", "0.5",
         "--mesh", "algebraic:rmax=20,n=40,p=2",
         "--mesh", "algebraic:rmax=20,n=80,p=2"],
    ])
    def test_invalid_configuration_exits_2(self, argv, capsys):
        assert cli.main(argv) == 2
        assert "config error" in capsys.readouterr().err

    def test_solver_failure_exits_1(self, capsys, monkeypatch):
        def boom(*args, **kwargs):
            raise SolverError("inverse iteration stalled")

        monkeypatch.setattr(cli, "spectrum", boom)
        assert cli.main(SPECTRUM_ARGS) == 1
        assert "inverse iteration stalled" in capsys.readouterr().err

    def test_verify_failure_exits_3(self, capsys, monkeypatch):
        failing = SuiteReport(checks={
            "hardy": CheckOutcome(passed=False, worst=-1.0, config={})})
        monkeypatch.setattr(cli, "suite", lambda **kwargs: failing)
        assert cli.main(["verify"]) == 3
        assert json.loads(capsys.readouterr().out)["hardy"]["pass"] is False

    def test_verify_success_exits_0_and_prints_table(self, capsys,
                                                     monkeypatch, tmp_path):
        passing = SuiteReport(checks={
            "hardy": CheckOutcome(passed=True, worst=0.5, config={})})
        monkeypatch.setattr(cli, "suite", lambda **kwargs: passing)
        path = tmp_path / "suite.json"
        assert cli.main(["verify", "--out", str(path)]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("check")
        assert json.loads(path.read_text())["hardy"]["pass"] is True
