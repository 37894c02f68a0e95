import csv
import json

import pytest

from app.command import CommandCollection, CommandResult, PdfCommand
from app.config import PROJECT_ROOT, parse_run_config
from main import main

CONFIG_DIR = PROJECT_ROOT / "config"
EXAMPLE = str(CONFIG_DIR / "config.example.toml")

EXAMPLE_TOML = """\
seed = 0

[model]
name = "example"
design = [0.0]

[uncertainty]
alpha = 1.7
beta_shape = 3.2

[target]
family = "gaussian"
mean = 37.0
std = 1.0

[pdf]
kde = false

[optimizer]
max_function_calls = {budget}
"""


def read_json(path):
    return json.loads(path.read_text())


def read_csv(path):
    with path.open() as f:
        return list(csv.reader(f))


@pytest.fixture
def quick_config(tmp_path):
    def write(budget=40, text=EXAMPLE_TOML):
        path = tmp_path / "run.toml"
        path.write_text(text.format(budget=budget))
        return str(path)

    return write


class TestPdfCommand:

    def test_writes_pdf_artifacts(self, tmp_path):
        assert main(["pdf", "--config", EXAMPLE, "--out", str(tmp_path)]) == 0
        for name in ("pdf.csv", "sensitivity.csv", "target.csv", "kde.csv"):
            assert (tmp_path / name).exists(), name

        summary = read_json(tmp_path / "pdf_summary.json")
        assert summary["grid"]["f_lower"] == pytest.approx(28.0)
        assert summary["grid"]["f_upper"] == pytest.approx(52.0)
        assert summary["grid"]["n_points"] == 2000
        assert summary["integral"] == pytest.approx(1.0, abs=1e-3)
        assert summary["slope"] == pytest.approx(200.0)
        assert summary["shift"] == pytest.approx(10.0)
        assert summary["kde_relative_l2"] <= 0.05

        rows = read_csv(tmp_path / "pdf.csv")
        assert rows[0] == ["node", "value"]
        assert len(rows) == 2001
        assert read_csv(tmp_path / "sensitivity.csv")[0] == ["node", "ds_1"]

    def test_outputs_are_reproducible(self, tmp_path, quick_config):
        config = quick_config()
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(["pdf", "--config", config, "--out", str(first)]) == 0
        assert main(["pdf", "--config", config, "--out", str(second)]) == 0
        for name in ("pdf.csv", "sensitivity.csv", "target.csv", "pdf_summary.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_missing_uncertainty_is_a_config_error(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text('[model]\nname = "example"\ndesign = [0.0]\n')
        assert main(["pdf", "--config", str(path), "--out", str(tmp_path)]) == 2

    def test_missing_config_file(self, tmp_path):
        assert main(["pdf", "--config", str(tmp_path / "absent.toml")]) == 2

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["plot", "--config", EXAMPLE])
        assert excinfo.value.code == 2


class TestMatchCommand:

    def test_budget_of_one_call(self, tmp_path, quick_config):
        out = tmp_path / "out"
        assert main(["match", "--config", quick_config(budget=1), "--out", str(out)]) == 0
        trace = read_json(out / "trace.json")
        assert trace["function_calls"] == 1
        assert trace["model_evaluations"] == 2
        assert len(trace["records"]) == 1
        assert trace["records"][0]["normalized_distance"] == 1.0
        assert trace["termination"] == "function_call_budget"
        assert len(read_csv(out / "convergence.csv")) == 2

    def test_recovers_known_design(self, tmp_path):
        config = str(CONFIG_DIR / "config.example-recover.toml")
        assert main(["match", "--config", config, "--out", str(tmp_path)]) == 0
        trace = read_json(tmp_path / "trace.json")
        assert trace["final_design"][0] == pytest.approx(5.0, abs=1e-3)
        assert trace["model_evaluations"] == 2 * trace["function_calls"]
        for name in ("initial_pdf.csv", "final_pdf.csv", "target_pdf.csv"):
            assert (tmp_path / name).exists(), name
        header = read_csv(tmp_path / "exchange.csv")[0]
        assert header == ["u", "q_initial", "line_initial", "q_final", "line_final"]

    def test_requires_target(self, tmp_path, quick_config):
        text = EXAMPLE_TOML.replace(
            '[target]\nfamily = "gaussian"\nmean = 37.0\nstd = 1.0\n', ""
        )
        config = quick_config(text=text)
        assert main(["match", "--config", config, "--out", str(tmp_path)]) == 2


class TestVerifyCommand:

    def test_example_passes(self, tmp_path):
        assert main(["verify", "--config", EXAMPLE, "--out", str(tmp_path)]) == 0
        report = read_json(tmp_path / "verify_report.json")
        assert report["passed"] is True
        assert read_csv(tmp_path / "histogram.csv")[0] == ["edge_lo", "edge_hi", "density"]

    def test_fan_config_passes(self, tmp_path):
        config = str(CONFIG_DIR / "config.example-fan.toml")
        assert main(["verify", "--config", config, "--out", str(tmp_path)]) == 0
        report = read_json(tmp_path / "verify_report.json")
        assert report["passed"] is True
        gradient = next(c for c in report["checks"] if c["name"] == "gradient_fd")
        assert gradient["value"] <= 1e-5

    def test_fan_dimension_mismatch_is_a_config_error(self, tmp_path):
        path = tmp_path / "fan.toml"
        path.write_text(
            '[model]\nname = "fan"\ndesign = [0.0, 0.0]\nn_design = 4\n\n'
            "[uncertainty]\nalpha = 1.7\nbeta_shape = 2.8\n"
        )
        assert main(["verify", "--config", str(path), "--out", str(tmp_path)]) == 2

    def test_tight_tolerance_fails(self, tmp_path):
        argv = ["verify", "--config", EXAMPLE, "--out", str(tmp_path)]
        assert main(argv + ["--fd-tolerance", "1e-12"]) == 1
        report = read_json(tmp_path / "verify_report.json")
        assert report["passed"] is False

    def test_uncorrected_shift_fails(self, tmp_path):
        argv = ["verify", "--config", EXAMPLE, "--out", str(tmp_path)]
        assert main(argv + ["--debug-uncorrected-shift"]) == 1
        report = read_json(tmp_path / "verify_report.json")
        failed = {c["name"] for c in report["checks"] if not c["passed"]}
        assert "gradient_fd" in failed


class TestCommandCollection:

    @pytest.mark.asyncio
    async def test_unknown_name(self):
        config = parse_run_config(
            {
                "model": {"name": "example", "design": [0.0]},
                "uncertainty": {"alpha": 1.7, "beta_shape": 3.2},
            }
        )
        result = await CommandCollection(PdfCommand()).execute(name="plot", config=config)
        assert isinstance(result, CommandResult)
        assert not result
        assert result.exit_code == 2
