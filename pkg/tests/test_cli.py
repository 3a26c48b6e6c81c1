"""Tests for hypermix.cli module."""

import json
from pathlib import Path
from unittest.mock import MagicMock, patch

import pytest
from click.testing import CliRunner

from hypermix.cli import cli
from hypermix.exceptions import CapacityError

WITNESS_HM = [
    "witness-hm",
    "--op",
    "derivative",
    "--center",
    "0",
    "--radius",
    "0.5",
    "--target",
    "1",
    "--n-max",
    "10",
]
DECAY = [
    "decay",
    "--op",
    "translation-lp",
    "--w",
    "2",
    "--a",
    "1",
    "--p",
    "1",
    "--x",
    "chi(0,1)",
    "--y",
    "0",
    "--n-max",
    "8",
    "--format",
    "csv",
]


class TestCli:
    """Tests for main CLI group."""

    def test_cli_help(self, runner: CliRunner) -> None:
        """Test CLI help displays."""
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        assert "Witness certificates" in result.output

    def test_cli_version(self, runner: CliRunner) -> None:
        """Test CLI version displays."""
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "hypermix" in result.output

    def test_usage_error_exits_one(self, runner: CliRunner) -> None:
        """Test an invalid choice exits 1, keeping 2 for missing witnesses."""
        result = runner.invoke(cli, ["witness-hm", "--op", "shift"])
        assert result.exit_code == 1

    def test_command_help_lists_literals(self, runner: CliRunner) -> None:
        """Test witness commands document the literal grammar."""
        result = runner.invoke(cli, ["witness-stt", "--help"])
        assert result.exit_code == 0
        assert "chi(0,1)" in result.output
        assert "X(2)Y(0)" in result.output


class TestWitnessCommands:
    """Tests for the witness commands."""

    def test_witness_hm(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test the derivative example writes N = 3."""
        out = tmp_path / "hm.json"
        result = runner.invoke(cli, [*WITNESS_HM, "-o", str(out)])
        assert result.exit_code == 0
        payload = json.loads(out.read_text())
        assert payload["N"] == 3
        assert payload["bound_mode"] == "analytic"
        assert payload["certificates"][0]["u_n"]["space"] == "hardy"

    def test_witness_hm_stdout(self, runner: CliRunner) -> None:
        """Test the artifact goes to stdout without -o."""
        result = runner.invoke(cli, WITNESS_HM)
        assert result.exit_code == 0
        assert '"N": 3' in result.output

    def test_deterministic_files(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test two runs write byte-identical files."""
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        runner.invoke(cli, [*WITNESS_HM, "-o", str(first)])
        runner.invoke(cli, [*WITNESS_HM, "-o", str(second)])
        assert first.read_bytes() == second.read_bytes()

    def test_no_witness_exits_two(self, runner: CliRunner) -> None:
        """Test NO_WITNESS_IN_RANGE maps to exit 2."""
        result = runner.invoke(
            cli,
            [
                "witness-hm",
                "--op",
                "laplacian",
                "--center",
                "0",
                "--radius",
                "0.001",
                "--target",
                "1",
                "--n-max",
                "2",
            ],
        )
        assert result.exit_code == 2
        assert "No witness" in result.output

    def test_malformed_literal_exits_one(self, runner: CliRunner) -> None:
        """Test a literal syntax error exits 1."""
        result = runner.invoke(
            cli,
            ["witness-stt", "--op", "derivative", "--center", "0", "--radius", "1", "--target", "2*q"],
        )
        assert result.exit_code == 1
        assert "LITERAL_SYNTAX" in result.output
        assert "inputs.target" in result.output

    def test_missing_input_exits_one(self, runner: CliRunner) -> None:
        """Test a missing target exits 1."""
        result = runner.invoke(
            cli, ["witness-hm", "--op", "derivative", "--center", "0", "--radius", "1"]
        )
        assert result.exit_code == 1
        assert "MALFORMED_DESCRIPTOR" in result.output

    def test_witness_zero(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test the translation zero witness saturates at N = 3."""
        out = tmp_path / "zero.json"
        result = runner.invoke(
            cli,
            [
                "witness-zero",
                "--op",
                "translation-lp",
                "--w",
                "2",
                "--a",
                "1",
                "--center",
                "chi(0,3)",
                "--radius",
                "0.5",
                "-o",
                str(out),
            ],
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text())["N"] == 3

    def test_witness_transitivity(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test transitivity on C₀ with a ramp target."""
        out = tmp_path / "tt.json"
        result = runner.invoke(
            cli,
            [
                "witness-transitivity",
                "--op",
                "translation-c0",
                "--w",
                "2",
                "--a",
                "1",
                "--center",
                "0",
                "--radius",
                "0.6",
                "--v-center",
                "ramp",
                "--v-radius",
                "0.3",
                "-o",
                str(out),
            ],
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text())["n"] == 2

    @patch("hypermix.cli.run")
    def test_capacity_error_exits_one(self, mock_run: MagicMock, runner: CliRunner) -> None:
        """Test capacity errors from the engines exit 1."""
        mock_run.side_effect = CapacityError("power 400 exceeds floating-point range")
        result = runner.invoke(cli, WITNESS_HM)
        assert result.exit_code == 1
        assert "CAPACITY_EXCEEDED" in result.output


class TestTableCommands:
    """Tests for decay, density, leading-poly and periodic."""

    def test_decay_csv(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test the translation decay example writes a CSV table."""
        out = tmp_path / "decay.csv"
        result = runner.invoke(cli, [*DECAY, "-o", str(out)])
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "n,s_norm,kernel_gap,combined"
        assert len(lines) == 9

    def test_density(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test the density command saturates at deg + 1."""
        out = tmp_path / "density.json"
        result = runner.invoke(
            cli, ["density", "--op", "derivative", "--x", "z^4", "--n-max", "8", "-o", str(out)]
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text())["observed_saturation"] == 5

    def test_leading_poly(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test α = 2 around z² gives N = 4."""
        out = tmp_path / "leading.json"
        result = runner.invoke(
            cli,
            ["leading-poly", "--alpha", "2", "--center", "z^2", "--radius", "0.2", "-o", str(out)],
        )
        assert result.exit_code == 0
        assert json.loads(out.read_text())["N"] == 4

    def test_leading_poly_zero_alpha(self, runner: CliRunner) -> None:
        """Test α = 0 exits 1 with INVALID_ALPHA."""
        result = runner.invoke(
            cli, ["leading-poly", "--alpha", "0", "--center", "0", "--radius", "0.5"]
        )
        assert result.exit_code == 1
        assert "INVALID_ALPHA" in result.output

    def test_periodic(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test N = 1, M = 20 reports defect 1/20!."""
        out = tmp_path / "periodic.json"
        result = runner.invoke(cli, ["periodic", "--period", "1", "--order", "20", "-o", str(out)])
        assert result.exit_code == 0
        assert json.loads(out.read_text())["defect"] == pytest.approx(4.11031762331e-19)


class TestFromFile:
    """Tests for JSON descriptor files."""

    def test_from_file(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test a descriptor file drives the command."""
        descriptor = tmp_path / "run.json"
        out = tmp_path / "out.json"
        descriptor.write_text(
            json.dumps(
                {
                    "command": "witness-stt",
                    "op": {"variant": "derivative"},
                    "inputs": {"center": "0", "radius": 1, "target": "2"},
                    "output": {"path": str(out)},
                }
            )
        )
        result = runner.invoke(cli, ["witness-stt", "--from-file", str(descriptor)])
        assert result.exit_code == 0
        assert json.loads(out.read_text())["n"] == 3

    def test_command_mismatch(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test a descriptor for another command is rejected."""
        descriptor = tmp_path / "run.json"
        descriptor.write_text(json.dumps({"command": "verify"}))
        result = runner.invoke(cli, ["decay", "--from-file", str(descriptor)])
        assert result.exit_code == 1

    def test_malformed_file(self, runner: CliRunner, tmp_path: Path) -> None:
        """Test broken JSON exits 1."""
        descriptor = tmp_path / "run.json"
        descriptor.write_text("[")
        result = runner.invoke(cli, ["decay", "--from-file", str(descriptor)])
        assert result.exit_code == 1


class TestInfoCommands:
    """Tests for spaces and verify."""

    def test_spaces(self, runner: CliRunner) -> None:
        """Test spaces lists every family."""
        result = runner.invoke(cli, ["spaces"])
        assert result.exit_code == 0
        for name in ("derivative", "laplacian", "translation-lp", "translation-c0"):
            assert name in result.output

    @pytest.mark.slow
    def test_verify_quick(self, runner: CliRunner) -> None:
        """Test the quick invariant suite exits 0."""
        result = runner.invoke(cli, ["verify", "--quick"])
        assert result.exit_code == 0
        assert "FAIL" not in result.output
