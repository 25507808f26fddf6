# Tests for File utility class
# Validates sweep table export, JSON reports, sample dumps and config reading

import json
import os
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

from config.defaults import CSV_COLUMNS
from scripts.sweep import RatioRow, rows_to_frame
from utils.core import ModelSpec, validate_params
from utils.errors import ConfigInvalid, PersistenceError
from utils.file import version_string


@pytest.fixture
def sample_rows():
    """
    Two ratio rows, one Gaussian and one cone-measure.

    Returns
    -------
    pd.DataFrame
        Sweep table in CSV column order.
    """
    rows = [
        RatioRow(validate_params(4, 16, 1, 2), ModelSpec.gaussian(), 1.25, 0.01, 1.6651, 0.7507,
                 "small-q", 10, 8, 99),
        RatioRow(validate_params(4, 16, 16, 2), ModelSpec.cone_lp(1.5), 0.5, 0.002, 0.5, 1.0,
                 "mid-q", 10, 8, 99, predictor_family="lp"),
    ]
    return rows_to_frame(rows)


class TestFileInitialization:
    """Test File class initialization."""

    def test_file_initialization(self, file_instance):
        """Test File initializes correctly."""
        assert file_instance is not None
        assert hasattr(file_instance, 'logger')

    def test_version_string(self):
        """Test that the version tag starts with v."""
        assert version_string().startswith("v")


class TestWriteRows:
    """Test sweep table export."""

    def test_csv_columns_and_values(self, file_instance, temp_directory, sample_rows):
        """Test that the CSV has the fixed header and round-trip floats."""
        output_path = str(temp_directory / "sweep.csv")

        result_path = file_instance.write_rows(sample_rows, output_path, fmt="csv")

        assert result_path == output_path
        with open(output_path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 3

        frame = pd.read_csv(output_path)
        assert frame["estimate"].tolist() == [1.25, 0.5]
        assert np.isnan(frame["p"][0])
        assert frame["p"][1] == 1.5
        assert frame["model"][1] == "ConeLp(p=1.5)"

    def test_csv_text_is_deterministic(self, file_instance, sample_rows):
        """Test that rendering twice gives the same text."""
        assert file_instance.rows_to_csv_text(sample_rows) == file_instance.rows_to_csv_text(sample_rows.copy())

    def test_csv_missing_columns(self, file_instance):
        """Test that a table without the fixed columns is rejected."""
        with pytest.raises(ConfigInvalid, match="lacks columns"):
            file_instance.rows_to_csv_text(pd.DataFrame({"estimate": [1.0]}))

    def test_json_document(self, file_instance, temp_directory, sample_rows):
        """Test the JSON header block and row records."""
        output_path = str(temp_directory / "sweep.json")

        file_instance.write_rows(sample_rows, output_path, fmt="json", header={"master_seed": 99})

        with open(output_path, encoding="utf-8") as f:
            document = json.load(f)
        assert document["header"]["config"] == {"master_seed": 99}
        assert document["header"]["columns"] == list(CSV_COLUMNS)
        assert document["header"]["version"].startswith("v")
        assert document["rows"][0]["p"] is None
        assert document["rows"][1]["ratio"] == 1.0

    def test_xlsx_creates_file(self, file_instance, temp_directory, sample_rows):
        """Test that an Excel workbook with a summary sheet is written."""
        output_path = str(temp_directory / "new_dir" / "sweep.xlsx")
        summary = pd.DataFrame([{"regime": "all", "min_ratio": 0.75, "max_ratio": 1.0, "spread": 1.33, "count": 2}])

        file_instance.write_rows(sample_rows, output_path, fmt="xlsx", summary=summary)

        assert os.path.exists(output_path)
        with open(output_path, "rb") as f:
            assert f.read(2) == b"PK"

    def test_unknown_format(self, file_instance, temp_directory, sample_rows):
        """Test that an unknown format raises ConfigInvalid."""
        with pytest.raises(ConfigInvalid, match="Unknown output format"):
            file_instance.write_rows(sample_rows, str(temp_directory / "sweep.txt"), fmt="txt")

    def test_write_failure_raises_persistence_error(self, file_instance, temp_directory, sample_rows):
        """Test that an OSError surfaces as PersistenceError after retries."""
        with patch("builtins.open", side_effect=PermissionError("read-only")):
            with pytest.raises(PersistenceError, match="Could not write"):
                file_instance.write_rows(sample_rows, str(temp_directory / "sweep.csv"), fmt="csv")


class TestReportsAndSamples:
    """Test JSON reports and sample dumps."""

    def test_write_json_sorted(self, file_instance, temp_directory):
        """Test that JSON keys are sorted and numpy values serialized."""
        output_path = str(temp_directory / "report.json")

        file_instance.write_json({"b": np.float64(1.5), "a": np.arange(3)}, output_path)

        with open(output_path, encoding="utf-8") as f:
            text = f.read()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [0, 1, 2], "b": 1.5}

    def test_write_matrix_csv(self, file_instance, temp_directory):
        """Test the sample dump header and shape."""
        output_path = str(temp_directory / "samples.csv")

        file_instance.write_matrix_csv(np.arange(6.0).reshape(3, 2), output_path)

        frame = pd.read_csv(output_path)
        assert list(frame.columns) == ["x1", "x2"]
        assert frame.shape == (3, 2)
        assert frame["x2"].tolist() == [1.0, 3.0, 5.0]


class TestReadSweepConfig:
    """Test sweep config reading."""

    def test_read_config(self, file_instance, temp_directory, tiny_sweep_config):
        """Test that a JSON object is read back."""
        config_path = temp_directory / "sweep.json"
        config_path.write_text(json.dumps(tiny_sweep_config))

        assert file_instance.read_sweep_config(str(config_path)) == tiny_sweep_config

    def test_missing_file(self, file_instance, temp_directory):
        """Test that a missing file raises PersistenceError."""
        with pytest.raises(PersistenceError):
            file_instance.read_sweep_config(str(temp_directory / "missing.json"))

    def test_invalid_content(self, file_instance, temp_directory):
        """Test that malformed JSON and non-objects raise ConfigInvalid."""
        broken = temp_directory / "broken.json"
        broken.write_text("{not json")
        listing = temp_directory / "list.json"
        listing.write_text("[1, 2]")

        with pytest.raises(ConfigInvalid, match="not valid JSON"):
            file_instance.read_sweep_config(str(broken))
        with pytest.raises(ConfigInvalid, match="JSON object"):
            file_instance.read_sweep_config(str(listing))


class TestGetDefaultOutputPath:
    """Test default output path generation."""

    def test_get_default_output_path(self, file_instance, temp_directory, monkeypatch):
        """Test default output path generation."""
        monkeypatch.setenv("OUTPUT_PATH", str(temp_directory / "output"))

        path = file_instance.get_default_output_path("sweep", "json")

        assert "sweep_" in path
        assert path.endswith(".json")
        assert os.path.exists(os.path.dirname(path))

    def test_get_default_output_path_creates_directory(self, file_instance, temp_directory, monkeypatch):
        """Test that output directory is created."""
        output_dir = str(temp_directory / "new_output_dir")
        monkeypatch.setenv("OUTPUT_PATH", output_dir)

        _ = file_instance.get_default_output_path()

        assert os.path.exists(output_dir)
