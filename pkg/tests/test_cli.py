import json
import math
from pathlib import Path

import pandas as pd
import pytest

import cli.commands as commands
from cli import RunConfig, execute, parse_config
from cli.config import ConfigFileParser
from main import main
from models import ModelKind
from models.spherical_pendulum import SphericalPendulumModel
from monodromy import monodromy_verdict
from pipeline_steps.custom_exception import NoReturn, UsageError
from pipeline_steps.util import sha256_file


@pytest.fixture(autouse=True)
def no_output_env(monkeypatch):
    monkeypatch.delenv("LAXMONO_OUT", raising=False)


def read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def test_monodromy_center_defaults_to_critical_value():
    cfg = parse_config(["monodromy", "--model", "sp", "--radius", "0.1"])
    assert cfg.model == ModelKind.SPHERICAL_PENDULUM
    assert cfg.center == (1.0, 0.0)
    assert cfg.radius == 0.1
    assert cfg.samples == 512
    assert cfg.loop().n_samples == 512


def test_command_defaults():
    rotation = parse_config(["rotation", "--model", "jc"])
    assert rotation.radius == 0.5
    assert rotation.samples == 64
    assert rotation.build_model().params.model_dump() == {"omega0": 1.0, "omega": 2.0, "g": 1.0, "s0": 1.0}

    flow = parse_config(["flow", "--model", "jc"])
    assert flow.fiber == pytest.approx((2.0, 0.99))

    quasi = parse_config(["quasi"])
    assert quasi.model == ModelKind.QUASI_LAX
    assert quasi.rho == 0.1
    assert quasi.eps == [0.4, 0.2, 0.1, 0.05]
    assert quasi.build_model().ball_radius == 1.0


def test_quasi_command_defaults_to_the_quasi_model(tmp_path):
    cfg = parse_config(["quasi", "--rho", "0.1", "--eps", "0.05", "--out", str(tmp_path)])
    assert cfg.model == ModelKind.QUASI_LAX
    assert cfg.build_model().kind == ModelKind.QUASI_LAX
    assert cfg.ball_radius == 1.0
    assert parse_config(["monodromy"]).model == ModelKind.JAYNES_CUMMINGS
    assert execute(cfg) == 0


def test_comma_separated_values():
    cfg = parse_config(["bifurcation", "--model", "sp", "--h-range", "0.5,1.5", "--k-range=-0.5,0.5", "--grid", "16"])
    assert cfg.h_range == (0.5, 1.5)
    assert cfg.k_range == (-0.5, 0.5)
    cfg = parse_config(["quasi", "--eps", "0.2, 0.05"])
    assert cfg.eps == [0.2, 0.05]


def test_empty_argv_prints_help():
    with pytest.raises(UsageError) as excinfo:
        parse_config([])
    assert "usage:" in excinfo.value.message
    assert excinfo.value.exit_code == 64


@pytest.mark.parametrize(
    "argv",
    [
        ["monodromy", "--bogus"],
        ["nonsense"],
        ["monodromy", "--radius", "-1"],
        ["monodromy", "--radius", "abc"],
        ["monodromy", "--center", "1"],
        ["monodromy", "--tol", "0"],
        ["flow", "--method", "Euler"],
        ["monodromy", "--model", "sp", "--omega0", "2"],
        ["quasi", "--model", "jc"],
        ["quasi", "--eps", "2.0"],
        ["bifurcation", "--model", "sp", "--grid", "15"],
    ],
)
def test_invalid_arguments_are_usage_errors(argv):
    with pytest.raises(UsageError):
        parse_config(argv)


def test_flag_overrides_config_file(tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("# coupling\ng = 2\nomega = 3  # oscillator\ncenter = 2.0, 1.0\n", encoding="utf-8")
    cfg = parse_config(["monodromy", "--config", str(config), "--g", "1"])
    assert cfg.g == 1.0
    assert cfg.omega == 3.0
    assert cfg.center == (2.0, 1.0)

    cfg = parse_config(["monodromy", "--config", str(config)])
    assert cfg.g == 2.0


def test_yaml_config_file(tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("model: sp\nradius: 0.2\nh-range: [0.0, 2.0]\n", encoding="utf-8")
    cfg = parse_config(["bifurcation"], config_file=config)
    assert cfg.model == ModelKind.SPHERICAL_PENDULUM
    assert cfg.radius == 0.2
    assert cfg.h_range == (0.0, 2.0)


def test_config_file_errors(tmp_path):
    parser = ConfigFileParser()
    with pytest.raises(UsageError):
        parser.parse("radius 0.1")
    with pytest.raises(UsageError):
        parser.parse("- 1\n- 2\n", yaml_document=True)
    with pytest.raises(UsageError):
        parse_config(["monodromy", "--config", str(tmp_path / "missing.conf")])
    unknown = tmp_path / "unknown.conf"
    unknown.write_text("colour = blue\n", encoding="utf-8")
    with pytest.raises(UsageError):
        parse_config(["monodromy", "--config", str(unknown)])


def test_output_directory_precedence(tmp_path, monkeypatch):
    config = tmp_path / "run.conf"
    config.write_text(f"out = {tmp_path / 'from_file'}\n", encoding="utf-8")
    assert parse_config(["quasi", "--config", str(config)]).out == tmp_path / "from_file"

    monkeypatch.setenv("LAXMONO_OUT", str(tmp_path / "from_env"))
    assert parse_config(["quasi", "--config", str(config)]).out == tmp_path / "from_env"
    assert parse_config(["quasi", "--out", str(tmp_path / "from_flag")]).out == tmp_path / "from_flag"

    monkeypatch.delenv("LAXMONO_OUT")
    assert parse_config(["quasi"]).out == Path("laxmono_out")


def test_monodromy_command_writes_verdict_and_manifest(tmp_path):
    out = tmp_path / "jc"
    assert main(["monodromy", "--model", "jc", "--radius", "0.5", "--out", str(out)]) == 0

    verdict = read_json(out / "monodromy.json")
    assert verdict["matrix"] == [[1, 1], [0, 1]]
    assert verdict["permutation_class"] == "double_transposition"
    assert verdict["status"] == "ok"
    assert verdict["orientation"] == 1
    assert verdict["checks"] == {"genericity": True, "permutation": True, "residue": True}
    assert set(verdict["residue"]) == {"re", "im"}

    manifest = read_json(out / "manifest.json")
    assert manifest["status"] == "ok"
    assert manifest["command"] == "monodromy"
    assert manifest["config"]["omega"] == 2.0
    assert manifest["config"]["center"] == [2.0, 1.0]
    assert manifest["files"] == [{"path": "monodromy.json", "sha256": sha256_file(out / "monodromy.json")}]
    assert manifest["run_id"]


def test_regular_loop_gives_identity(tmp_path):
    cfg = parse_config(["monodromy", "--model", "sp", "--center", "2.0,1.0", "--radius", "0.05", "--out", str(tmp_path)])
    assert execute(cfg) == 0
    assert read_json(tmp_path / "monodromy.json")["matrix"] == [[1, 0], [0, 1]]


def test_outputs_are_byte_identical_across_runs(tmp_path):
    digests = []
    for name in ("first", "second"):
        cfg = parse_config(["roots", "--model", "sp", "--samples", "64", "--out", str(tmp_path / name)])
        assert execute(cfg) == 0
        digests.append([sha256_file(tmp_path / name / f) for f in ("roots.csv", "summary.json")])
    assert digests[0] == digests[1]


def test_roots_command(tmp_path):
    cfg = parse_config(["roots", "--model", "sp", "--samples", "64", "--out", str(tmp_path)])
    assert execute(cfg) == 0
    frame = pd.read_csv(tmp_path / "roots.csv")
    assert list(frame.columns) == commands.ROOT_COLUMNS
    assert frame["s"].iloc[0] == 0.0
    assert frame["s"].iloc[-1] == 1.0
    summary = read_json(tmp_path / "summary.json")
    assert summary["permutation_class"] == "double_transposition"
    assert summary["n_points"] == len(frame)


def test_bifurcation_command(tmp_path):
    argv = ["bifurcation", "--model", "sp", "--h-range", "0.5,1.5", "--k-range=-0.5,0.5", "--grid", "16"]
    assert execute(parse_config(argv + ["--out", str(tmp_path)])) == 0
    frame = pd.read_csv(tmp_path / "bifurcation.csv")
    assert list(frame.columns) == commands.BIFURCATION_COLUMNS
    assert len(frame) == 256
    candidates = read_json(tmp_path / "summary.json")["candidates"]
    assert any(
        c["class"] == "focus-focus-candidate" and math.hypot(c["h"] - 1.0, c["k"]) < 1e-3 for c in candidates
    )


def test_flow_command_writes_one_period(tmp_path):
    cfg = parse_config(["flow", "--model", "sp", "--fiber", "1.5,0.3", "--out", str(tmp_path)])
    assert execute(cfg) == 0
    frame = pd.read_csv(tmp_path / "flow.csv")
    assert list(frame.columns) == ["t", "x", "y", "z", "px", "py", "pz", "re_lam", "im_lam", "re_mu", "im_mu"]
    summary = read_json(tmp_path / "summary.json")
    assert frame["t"].iloc[-1] == pytest.approx(summary["T"])
    assert abs(frame["re_lam"].iloc[-1] - frame["re_lam"].iloc[0]) < 1e-6


def test_flow_command_with_fixed_horizon_and_step(tmp_path):
    cfg = parse_config(
        ["flow", "--model", "jc", "--t-max", "2.0", "--step", "0.5", "--out", str(tmp_path)]
    )
    assert execute(cfg) == 0
    frame = pd.read_csv(tmp_path / "flow.csv")
    assert frame["t"].tolist() == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])
    assert list(frame.columns[1:6]) == ["Sx", "Sy", "Sz", "q", "p"]


def test_quasi_flow_writes_relative_transit(tmp_path):
    cfg = parse_config(["flow", "--model", "quasi", "--rho", "0.1", "--phi", "0.5", "--out", str(tmp_path)])
    assert execute(cfg) == 0
    summary = read_json(tmp_path / "summary.json")
    assert summary["theta"]["re"] == pytest.approx(summary["closed_form"], abs=1e-6)
    assert summary["t_entry"] < 0 < summary["t_exit"]


def test_quasi_command(tmp_path):
    assert main(["quasi", "--rho", "0.1", "--eps", "0.05", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "quasi.csv")
    assert list(frame.columns) == commands.QUASI_COLUMNS
    assert len(frame) == 1
    summary = read_json(tmp_path / "summary.json")
    assert abs(summary["delta"] - 2 * math.pi) < 0.05 * 2 * math.pi
    manifest = read_json(tmp_path / "manifest.json")
    assert [f["path"] for f in manifest["files"]] == ["quasi.csv", "summary.json"]


def test_main_reports_usage_errors(capsys):
    assert main([]) == 64
    assert "usage:" in capsys.readouterr().err
    assert main(["monodromy", "--radius", "0"]) == 64


def test_numerical_failure_without_output_writes_no_manifest(tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise NoReturn("no return")

    monkeypatch.setattr(commands, "rotation_along_loop", fail)
    cfg = parse_config(["rotation", "--model", "sp", "--out", str(tmp_path)])
    assert execute(cfg) == 3
    assert not (tmp_path / "manifest.json").exists()


def test_failed_verdict_is_partial_output(tmp_path, monkeypatch):
    class FrozenSpectrumModel(SphericalPendulumModel):
        def spectral_coeffs(self, h, k):
            return super().spectral_coeffs(1.0, 0.0)

    monkeypatch.setattr(
        commands,
        "monodromy_verdict",
        lambda m, loop, guard: monodromy_verdict(FrozenSpectrumModel(), loop, guard),
    )
    cfg = parse_config(["monodromy", "--model", "sp", "--out", str(tmp_path)])
    assert execute(cfg) == 2
    assert read_json(tmp_path / "monodromy.json")["status"] == "NonGeneric"
    manifest = read_json(tmp_path / "manifest.json")
    assert manifest["status"] == "partial"
    assert manifest["exit_code"] == 2
    assert manifest["error"]


def test_run_config_requires_a_known_command():
    with pytest.raises(ValueError):
        RunConfig(command="plot")
