"""
Tests for the command-line interface.
"""

import json
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from click.testing import CliRunner

from lowzero import __version__
from lowzero.bounds import PUBLISHED_TABLES, BoundReport, PercentTable
from lowzero.cli import main
from lowzero.selftest import CheckResult


def fake_table(rho, levels, r_values):
    """Small table without any quadrature: level 4 is not applicable at r = 2."""
    cells = {}
    for level in levels:
        reports = []
        for r in r_values:
            value = None if (level == 4 and r == 2) else 1.0 / (level * r)
            missing = f"N/A: level {level} cannot bound r={r}"
            reports.append(
                BoundReport(
                    kind="percent",
                    value=value,
                    inputs={"n": level, "r": r, "rho": rho},
                    applicable=value is not None,
                    diagnostics=[] if value is not None else [missing],
                )
            )
        cells[level] = reports
    return PercentTable(
        rho=rho, levels=list(levels), r_values=list(r_values), cells=cells
    )


def fake_published_table(which, quad, a=None, threads=1):
    layout = PUBLISHED_TABLES[which]
    return fake_table(layout.rho, layout.levels, layout.r_values)


class TestCLI(unittest.TestCase):
    """Test cases for the command-line interface."""

    def setUp(self):
        """Set up test fixtures."""
        self.runner = CliRunner()
        self.temp_dir = tempfile.TemporaryDirectory()
        self.test_dir = Path(self.temp_dir.name)

    def tearDown(self):
        """Tear down test fixtures."""
        self.temp_dir.cleanup()

    def test_help(self):
        """Test the help command."""
        result = self.runner.invoke(main, ["--help"])

        self.assertEqual(result.exit_code, 0)
        self.assertIn("lowzero: numerical bounds", result.output)
        commands = (
            "omega-min",
            "percent",
            "table",
            "rmt-check",
            "selftest",
            "calibrate",
            "replay",
        )
        for command in commands:
            self.assertIn(command, result.output)

    def test_version(self):
        """Test the version option."""
        result = self.runner.invoke(main, ["-v"])

        self.assertEqual(result.exit_code, 0)
        self.assertIn(f"lowzero, version {__version__}", result.output)

    # -- omega-min -----------------------------------------------------------

    def test_omega_min_rejects_even_level(self):
        result = self.runner.invoke(
            main, ["omega-min", "--n-level", "2", "--no-manifest"]
        )

        self.assertEqual(result.exit_code, 2)
        self.assertIn("positive odd level", result.output)

    def test_closed_form_needs_first_level(self):
        result = self.runner.invoke(
            main,
            ["omega-min", "--n-level", "3", "--method", "closed-form", "--no-manifest"],
        )

        self.assertEqual(result.exit_code, 2)
        self.assertIn("closed-form", result.output)

    def test_omega_min_closed_form_json(self):
        result = self.runner.invoke(
            main, ["omega-min", "--kernel", "cos", "--sigma", "2", "--no-manifest"]
        )

        self.assertEqual(result.exit_code, 0, result.output)
        report = json.loads(result.output)
        self.assertEqual(report["kind"], "omega_min")
        self.assertEqual(report["provenance"], "closed-form")
        self.assertAlmostEqual(report["value"], 0.25, delta=1e-4)

    def test_omega_min_text_to_file(self):
        output = self.test_dir / "omega.txt"
        result = self.runner.invoke(
            main,
            ["omega-min", "--format", "text", "--output", str(output), "--no-manifest"],
        )

        self.assertEqual(result.exit_code, 0, result.output)
        text = output.read_text()
        self.assertIn("omega_min", text)
        self.assertIn("Value", text)
        self.assertIn("closed-form", text)

    def test_bad_grid_is_a_usage_error(self):
        result = self.runner.invoke(main, ["omega-min", "--grid", "4", "--no-manifest"])

        self.assertEqual(result.exit_code, 2)

    # -- percent -------------------------------------------------------------

    def test_percent_single_cell(self):
        result = self.runner.invoke(
            main,
            ["percent", "--n-level", "2", "--r", "6", "--rho", "0.4", "--no-manifest"],
        )

        self.assertEqual(result.exit_code, 0, result.output)
        report = json.loads(result.output)
        self.assertTrue(report["applicable"])
        self.assertAlmostEqual(report["value"], 0.111085, delta=0.111085e-4)

    def test_percent_not_applicable(self):
        result = self.runner.invoke(
            main,
            ["percent", "--n-level", "4", "--r", "2", "--rho", "0.2", "--no-manifest"],
        )

        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("N/A", result.output)
        self.assertIn('"value": null', result.output)

    def test_percent_rejects_odd_r(self):
        result = self.runner.invoke(
            main, ["percent", "--n-level", "2", "--r", "5", "--no-manifest"]
        )

        self.assertEqual(result.exit_code, 2)
        self.assertIn("r is an even number", result.output)

    def test_percent_rejects_odd_level(self):
        result = self.runner.invoke(
            main, ["percent", "--n-level", "3", "--r", "4", "--no-manifest"]
        )

        self.assertEqual(result.exit_code, 2)
        self.assertIn("even moment", result.output)

    def test_percent_rejects_bad_level_list(self):
        result = self.runner.invoke(
            main, ["percent", "--n-level", "2,x", "--no-manifest"]
        )

        self.assertEqual(result.exit_code, 2)

    def test_percent_csv_table(self):
        output = self.test_dir / "table.csv"
        result = self.runner.invoke(
            main,
            [
                "percent", "--n-level", "2,4", "--r-min", "2", "--r-max", "6",
                "--rho", "0.2", "--output", str(output), "--no-manifest",
            ],
        )

        self.assertEqual(result.exit_code, 0, result.output)
        lines = output.read_text().splitlines()
        self.assertEqual(lines[0], "r,level2,level4")
        self.assertEqual(len(lines), 4)
        r, level2, level4 = lines[1].split(",")
        self.assertEqual(r, "2")
        self.assertAlmostEqual(float(level2), 6.651738, delta=6.651738e-4)
        self.assertEqual(level4, "N/A")
        self.assertNotIn("N/A", lines[2])

    @patch("lowzero.cli.percent_table")
    def test_percent_figure_data(self, mock_table):
        mock_table.return_value = fake_table(0.2, [2, 4], [2, 4])
        figures = self.test_dir / "figures"
        result = self.runner.invoke(
            main,
            [
                "percent",
                "--n-level",
                "2,4",
                "--r-max",
                "4",
                "--figure-data",
                str(figures),
                "--no-manifest",
            ],
        )

        self.assertEqual(result.exit_code, 0, result.output)
        level4 = (figures / "level4_rho0.2.csv").read_text().splitlines()
        self.assertEqual(level4, ["r,percent", "4,0.0625"])
        self.assertTrue((figures / "level2_rho0.2.csv").exists())

    @patch("lowzero.cli.percent_table")
    def test_threads_fall_back_to_environment(self, mock_table):
        mock_table.return_value = fake_table(0.2, [2], [4])
        result = self.runner.invoke(
            main,
            ["percent", "--n-level", "2", "--r", "4", "--no-manifest"],
            env={"LOWZERO_THREADS": "3"},
        )

        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(mock_table.call_args.kwargs["threads"], 3)

        result = self.runner.invoke(
            main,
            [
                "percent", "--n-level", "2", "--r", "4", "--threads", "2",
                "--no-manifest",
            ],
            env={"LOWZERO_THREADS": "3"},
        )
        self.assertEqual(mock_table.call_args.kwargs["threads"], 2)

    @patch("lowzero.cli.percent_table")
    def test_numerical_failure_exits_with_one(self, mock_table):
        from lowzero.errors import NumericalError

        mock_table.side_effect = NumericalError(
            "Non-finite integrand value at abscissa 0.0"
        )
        result = self.runner.invoke(
            main, ["percent", "--n-level", "2", "--r", "4", "--no-manifest"]
        )

        self.assertEqual(result.exit_code, 1)
        self.assertIn("Error:", result.output)
        self.assertIn("abscissa", result.output)

    # -- table ---------------------------------------------------------------

    @patch("lowzero.cli.published_table", side_effect=fake_published_table)
    def test_table_csv(self, mock_published):
        result = self.runner.invoke(main, ["table", "--which", "1", "--no-manifest"])

        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("r,level2,level4,level6", result.output)
        self.assertIn("2,0.250000,N/A,0.083333", result.output)
        mock_published.assert_called_once()

    @patch("lowzero.cli.published_table", side_effect=fake_published_table)
    def test_table_all_to_directory(self, mock_published):
        target = self.test_dir / "tables"
        result = self.runner.invoke(
            main,
            ["table", "--format", "json", "--output", str(target), "--no-manifest"],
        )

        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(mock_published.call_count, 3)
        for number in (1, 2, 3):
            payload = json.loads((target / f"table{number}.json").read_text())
            self.assertEqual(payload["rho"], PUBLISHED_TABLES[number].rho)
            self.assertIn("published", payload)
            self.assertEqual(payload["levels"], [2, 4, 6])

    # -- rmt-check -----------------------------------------------------------

    def test_rmt_check_is_reproducible(self):
        args = [
            "rmt-check", "--matrix-size", "4", "--samples", "200", "--blocks", "10",
            "--max-n", "2", "--seed", "7", "--z-gate", "1000", "--no-manifest",
        ]
        first = self.runner.invoke(
            main, args + ["--output", str(self.test_dir / "a.json")]
        )
        second = self.runner.invoke(
            main, args + ["--output", str(self.test_dir / "b.json"), "--threads", "2"]
        )

        self.assertEqual(first.exit_code, 0, first.output)
        self.assertEqual(second.exit_code, 0, second.output)
        a = (self.test_dir / "a.json").read_bytes()
        self.assertEqual(a, (self.test_dir / "b.json").read_bytes())
        record = json.loads(a)
        self.assertEqual(set(record["z_scores"]), {"mean", "m2"})
        self.assertEqual(record["settings"]["half_size"], 4)

    def test_rmt_check_gate(self):
        result = self.runner.invoke(
            main,
            [
                "rmt-check", "--matrix-size", "3", "--samples", "100", "--blocks", "10",
                "--max-n", "1", "--z-gate", "0", "--no-manifest",
            ],
        )

        self.assertEqual(result.exit_code, 1)
        self.assertIn("exceeds the gate", result.output)

    def test_rmt_check_rejects_high_moment(self):
        result = self.runner.invoke(
            main, ["rmt-check", "--max-n", "7", "--no-manifest"]
        )

        self.assertEqual(result.exit_code, 2)

    # -- selftest and calibrate ------------------------------------------------

    @patch("lowzero.cli.run_selftest")
    def test_selftest_reports_failures(self, mock_selftest):
        mock_selftest.return_value = [
            CheckResult("first", True, "ok"),
            CheckResult("second", False, "off by 1"),
        ]
        result = self.runner.invoke(
            main, ["selftest", "--format", "json", "--no-manifest"]
        )

        self.assertEqual(result.exit_code, 1)
        self.assertIn('"passed": false', result.output)
        self.assertIn("1 check(s) failed: second", result.output)
        self.assertFalse(mock_selftest.call_args.kwargs["full"])

    @patch("lowzero.cli.run_selftest")
    def test_selftest_passes(self, mock_selftest):
        mock_selftest.return_value = [CheckResult("first", True, "ok")]
        result = self.runner.invoke(main, ["selftest", "--full", "--no-manifest"])

        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn("first", result.output)
        self.assertTrue(mock_selftest.call_args.kwargs["full"])

    def test_calibrate_defaults(self):
        result = self.runner.invoke(main, ["calibrate", "--no-manifest"])

        self.assertEqual(result.exit_code, 0, result.output)
        record = json.loads(result.output)
        self.assertEqual(record["matches"], [1, 2])
        self.assertEqual(record["chosen"], 2)

    # -- manifests -------------------------------------------------------------

    def test_manifest_and_replay(self):
        with self.runner.isolated_filesystem(temp_dir=self.test_dir):
            result = self.runner.invoke(main, ["omega-min", "--output", "omega.json"])
            self.assertEqual(result.exit_code, 0, result.output)

            manifest = Path("omega.json.manifest.json")
            self.assertTrue(manifest.exists())
            record = json.loads(manifest.read_text())
            self.assertEqual(record["subcommand"], "omega-min")
            self.assertEqual(record["params"]["n_level"], 1)
            self.assertEqual(record["resolved"]["threads"], 1)

            original = Path("omega.json").read_bytes()
            Path("omega.json").unlink()
            result = self.runner.invoke(main, ["replay", str(manifest)])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertEqual(Path("omega.json").read_bytes(), original)

    def test_default_manifest_location(self):
        with self.runner.isolated_filesystem(temp_dir=self.test_dir):
            result = self.runner.invoke(main, ["calibrate"])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertTrue(Path(".lowzero/manifests/calibrate.json").exists())

    def test_replay_rejects_non_manifest(self):
        bogus = self.test_dir / "bogus.json"
        bogus.write_text('{"hello": 1}')
        result = self.runner.invoke(main, ["replay", str(bogus)])

        self.assertEqual(result.exit_code, 2)
        self.assertIn("not a lowzero manifest", result.output)


if __name__ == "__main__":
    unittest.main()
