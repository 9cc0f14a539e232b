"""
Unit tests for sweep configuration, sweep rows and the CSV/SVG writers.
"""

import csv
import io

import pytest
from pydantic import ValidationError

from qetlab.exceptions import InvariantViolation
from qetlab.export import SCHEMA_LINE, format_value, render_csv, write_csv, write_svg
from qetlab.hamiltonian import max_extractable_energy
from qetlab.noise import NoiseParams
from qetlab.sweeps import SweepConfig, SweepRow, compute_row, run_sweep


def parse(text: str) -> list[dict[str, str]]:
    lines = text.splitlines()
    assert lines[0] == SCHEMA_LINE
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


@pytest.mark.unit
class TestSweepConfig:
    """Test sweep configuration."""

    def test_defaults(self):
        """51 points of kappa/h on [0, 1] at h_B = 0.4 h_A."""
        cfg = SweepConfig()
        grid = cfg.kappa_over_h()
        assert len(grid) == 51
        assert grid[0] == 0.0 and grid[-1] == 1.0
        assert cfg.params_at(0.2).h_b == pytest.approx(0.4)

    def test_params_scale_with_h(self):
        """kappa and h_B follow h_A."""
        p = SweepConfig(h_a=2.0).params_at(0.5)
        assert (p.h_a, p.h_b, p.kappa) == (2.0, pytest.approx(0.8), 1.0)

    @pytest.mark.parametrize(
        "values",
        [
            {"kappa_steps": 1},
            {"kappa_start": 0.5, "kappa_stop": 0.5},
            {"h_a": 0.0},
            {"mode": "quantum"},
            {"epsilon": -1.0},
        ],
    )
    def test_invalid_config_rejected(self, values):
        """Bad grids, fields and modes are rejected."""
        with pytest.raises(ValidationError):
            SweepConfig(**values)

    def test_from_toml_sweep_table(self, tmp_path):
        """Keys under [sweep] and a [noise] table are read."""
        path = tmp_path / "sweep.toml"
        path.write_text(
            '[sweep]\nkappa_steps = 5\nkappa_stop = 0.5\nmode = "noisy"\n\n[noise]\nt1 = 5.0\nt2 = 2.0\n',
            encoding="utf-8",
        )
        cfg = SweepConfig.from_toml(path)
        assert cfg.kappa_steps == 5
        assert cfg.mode == "noisy"
        assert cfg.noise.t1 == NoiseParams.uniform(5.0, 2.0).t1

    def test_from_toml_top_level_with_overrides(self, tmp_path):
        """Top-level keys work and non-None overrides win."""
        path = tmp_path / "sweep.toml"
        path.write_text("kappa_steps = 7\nh_a = 0.5\nh_b_ratio = 2.0\n", encoding="utf-8")
        cfg = SweepConfig.from_toml(path, h_a=3.0, h_b_ratio=None)
        assert cfg.kappa_steps == 7
        assert cfg.h_a == 3.0
        assert cfg.h_b_ratio == 2.0

    def test_unknown_key_rejected(self, tmp_path):
        """Keys the sweep does not use are errors, not silently dropped."""
        path = tmp_path / "sweep.toml"
        path.write_text("kappa_steps = 7\nbudget = 100\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            SweepConfig.from_toml(path)

    def test_from_toml_invalid_values(self, tmp_path):
        """Values from the file are validated like keyword arguments."""
        path = tmp_path / "sweep.toml"
        path.write_text("kappa_steps = 1\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            SweepConfig.from_toml(path)


@pytest.mark.unit
class TestSweepRows:
    """Test sweep rows and their invariant checks."""

    def test_columns(self):
        """Columns appear in a fixed order."""
        assert SweepRow.columns() == [
            "kappa_over_h",
            "neg_exp_xaxb",
            "exp_zb",
            "energy_extracted",
            "e_a_injected",
            "lambda_min",
            "max_extractable",
        ]

    def test_ideal_sweep(self):
        """Ideal rows reach the bound and start at zero extraction."""
        rows = run_sweep(SweepConfig(kappa_steps=11))
        assert len(rows) == 11
        assert rows[0].energy_extracted == pytest.approx(0.0, abs=1e-12)
        assert rows[0].exp_zb == pytest.approx(1.0)
        reference = rows[2]
        assert reference.kappa_over_h == pytest.approx(0.2)
        assert reference.energy_extracted == pytest.approx(0.07118, abs=1e-4)
        for row in rows:
            assert row.energy_extracted == pytest.approx(row.max_extractable, abs=1e-8)
            assert row.lambda_min == pytest.approx(-row.max_extractable, abs=1e-12)
            assert row.e_a_injected >= row.energy_extracted

    def test_parallel_matches_serial(self):
        """Worker count does not change the rows."""
        serial = run_sweep(SweepConfig(kappa_steps=6, workers=1))
        parallel = run_sweep(SweepConfig(kappa_steps=6, workers=3))
        assert serial == parallel

    def test_noisy_sweep(self):
        """Noisy rows stay below the ideal bound."""
        rows = run_sweep(SweepConfig(kappa_steps=3, mode="noisy"))
        for row in rows[1:]:
            assert 0.0 < row.energy_extracted < row.max_extractable

    def test_perturbed_sweep(self):
        """Perturbed rows still extract energy."""
        rows = run_sweep(SweepConfig(kappa_start=0.2, kappa_steps=3, mode="perturbed", epsilon=0.1))
        assert all(row.energy_extracted > 0 for row in rows)

    def test_optimality_violation_reported(self, mocker):
        """A row below the bound in ideal mode raises InvariantViolation."""
        mocker.patch("qetlab.sweeps.max_extractable_energy", side_effect=lambda p: max_extractable_energy(p) + 0.01)
        with pytest.raises(InvariantViolation) as exc_info:
            compute_row(SweepConfig(), 0.2)
        assert exc_info.value.invariant == "optimality"


@pytest.mark.unit
class TestExport:
    """Test the CSV and SVG writers."""

    @pytest.mark.parametrize(
        "value,text",
        [
            (-0.0, "0"),
            (0.0, "0"),
            (1 / 3, "0.333333333333"),
            (1e-20, "1e-20"),
            (5, "5"),
            (True, "true"),
            (False, "false"),
            ("X", "X"),
        ],
    )
    def test_format_value(self, value, text):
        """Numbers carry 12 significant digits and -0 prints as 0."""
        assert format_value(value) == text

    def test_render_csv(self):
        """Schema line, header, then one line per row."""
        text = render_csv(["a", "b"], [[1.0, -0.0], [0.5, 2]])
        assert text == "# schema=1\na,b\n1,0\n0.5,2\n"

    def test_write_csv_to_stdout(self, capsys):
        """Without a path the CSV goes to stdout."""
        write_csv(None, ["a"], [[1.0]])
        assert capsys.readouterr().out == "# schema=1\na\n1\n"

    def test_write_csv_to_file(self, tmp_path):
        """Files use plain \\n line endings."""
        path = tmp_path / "out.csv"
        write_csv(path, ["a"], [[2.5]])
        assert path.read_bytes() == b"# schema=1\na\n2.5\n"

    def test_svg_is_reproducible(self, tmp_path):
        """Two renders of the same data are byte-identical."""
        first, second = tmp_path / "a.svg", tmp_path / "b.svg"
        for path in (first, second):
            write_svg(path, [0.0, 0.5, 1.0], {"-dE_B": [0.0, 0.15, 0.17]}, title="ideal")
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text(encoding="utf-8").lstrip().startswith("<?xml")

    def test_rows_render_parseably(self):
        """Sweep rows round through the CSV reader with their column names."""
        rows = run_sweep(SweepConfig(kappa_steps=3))
        parsed = parse(render_csv(SweepRow.columns(), (r.values() for r in rows)))
        assert len(parsed) == 3
        assert float(parsed[-1]["kappa_over_h"]) == pytest.approx(1.0)
