# File utility class for sweep tables, reports and sample dumps
# Writes CSV, JSON and formatted Excel output with retries on transient I/O errors
# Note: xlsxwriter lacks type stubs, so we use type: ignore for its methods

import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from config.defaults import CSV_COLUMNS, CSV_FLOAT_FORMAT, DEFAULT_OUTPUT_DIR, ENV_OUTPUT_PATH, OUTPUT_FORMATS, VERSION
from utils.errors import ConfigInvalid, PersistenceError


def version_string() -> str:
    """Version tag written into JSON headers, e.g. ``v1.0.0``."""
    try:
        from importlib.metadata import version

        return f"v{version('random-convex-widths')}"
    except Exception:
        return f"v{VERSION}"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _ensure_parent(path: str) -> None:
    output_dir = os.path.dirname(path)
    if output_dir and not os.path.exists(output_dir):
        os.makedirs(output_dir)


class File:
    """
    File utility for experiment output.

    Sweep tables go to CSV (fixed column order, round-trip float format),
    JSON (rows plus a header block) or Excel; reports and sample dumps go to
    JSON and CSV.
    """

    def __init__(self, instance_id: Optional[int] = None):
        """
        Initialize the File utility.

        Parameters
        ----------
        instance_id : int, optional
            Instance ID for logging purposes
        """
        if instance_id:
            logger_name = f"utils.file.instance_{instance_id}"
        else:
            logger_name = "utils.file"
        self.logger = logging.getLogger(logger_name)
        self.logger.info("Initialized File utility")

    # MARK: Low-level Writers
    @retry(
        stop=stop_after_attempt(3),
        wait=wait_exponential(multiplier=0.1, min=0.1, max=1),
        retry=retry_if_exception_type(OSError),
        reraise=True,
    )
    def _write_text(self, text: str, output_path: str) -> None:
        _ensure_parent(output_path)
        with open(output_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)

    @retry(
        stop=stop_after_attempt(3),
        wait=wait_exponential(multiplier=0.1, min=0.1, max=1),
        retry=retry_if_exception_type(OSError),
        reraise=True,
    )
    def _write_excel(self, rows: pd.DataFrame, summary: Optional[pd.DataFrame], output_path: str) -> None:
        _ensure_parent(output_path)
        with pd.ExcelWriter(output_path, engine="xlsxwriter") as writer:
            rows.to_excel(writer, sheet_name="Sweep", index=False)

            # Get workbook and worksheet (xlsxwriter types)
            workbook: Any = writer.book
            worksheet: Any = writer.sheets["Sweep"]

            header_format = workbook.add_format({
                "bold": True,
                "bg_color": "#1F4E79",
                "font_color": "white",
                "border": 1,
                "align": "center",
                "valign": "vcenter",
            })
            number_format = workbook.add_format({"num_format": "0.000000"})

            for col_num, col_name in enumerate(rows.columns):
                worksheet.write(0, col_num, col_name, header_format)
                width = 24 if col_name in ("model", "regime") else 12
                fmt = number_format if col_name in ("estimate", "std_error", "predictor", "ratio") else None
                worksheet.set_column(col_num, col_num, width, fmt)

            worksheet.freeze_panes(1, 0)
            worksheet.autofilter(0, 0, len(rows), len(rows.columns) - 1)

            if summary is not None:
                summary.to_excel(writer, sheet_name="Summary", index=False)
                summary_sheet: Any = writer.sheets["Summary"]
                for col_num, col_name in enumerate(summary.columns):
                    summary_sheet.write(0, col_num, col_name, header_format)
                    summary_sheet.set_column(col_num, col_num, 16)

    # MARK: Sweep Tables
    def rows_to_csv_text(self, rows: pd.DataFrame) -> str:
        """Render a sweep table as CSV text in the fixed column order."""
        missing = [c for c in CSV_COLUMNS if c not in rows.columns]
        if missing:
            raise ConfigInvalid(f"Sweep table lacks columns: {missing}")
        return rows[CSV_COLUMNS].to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")

    def write_rows(
        self,
        rows: pd.DataFrame,
        output_path: str,
        fmt: str = "csv",
        header: Optional[Dict[str, Any]] = None,
        summary: Optional[pd.DataFrame] = None,
    ) -> str:
        """
        Write a sweep table in the requested format.

        Parameters
        ----------
        rows : pd.DataFrame
            One row per grid point with the CSV_COLUMNS columns
        output_path : str
            Destination file
        fmt : str
            csv, json or xlsx
        header : Dict[str, Any], optional
            Configuration echo for the JSON header block
        summary : pd.DataFrame, optional
            Ratio summary written to a second Excel sheet

        Returns
        -------
        str
            Path to the created file

        Raises
        ------
        ConfigInvalid
            If fmt is unknown
        PersistenceError
            If writing fails after retries
        """
        if fmt not in OUTPUT_FORMATS:
            raise ConfigInvalid(f"Unknown output format {fmt!r}; expected one of {OUTPUT_FORMATS}")
        try:
            if fmt == "csv":
                self._write_text(self.rows_to_csv_text(rows), output_path)
            elif fmt == "json":
                self.write_json(self.rows_to_json_document(rows, header), output_path)
            else:
                self._write_excel(rows[CSV_COLUMNS], summary, output_path)

            self.logger.info(f"Sweep table saved ({fmt}, {len(rows)} rows): {output_path}")
            return output_path

        except OSError as e:
            self.logger.error(f"Failed to write sweep table: {e}")
            raise PersistenceError(f"Could not write {output_path}: {e}") from e

    def rows_to_json_document(self, rows: pd.DataFrame, header: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        records: List[Dict[str, Any]] = []
        for record in rows[CSV_COLUMNS].to_dict(orient="records"):
            records.append({k: (None if isinstance(v, float) and np.isnan(v) else v) for k, v in record.items()})
        return {
            "header": {
                "version": version_string(),
                "columns": list(CSV_COLUMNS),
                "config": header or {},
            },
            "rows": records,
        }

    # MARK: Reports and Samples
    def write_json(self, document: Dict[str, Any], output_path: str) -> str:
        """Write a JSON document with sorted keys."""
        try:
            text = json.dumps(document, indent=2, sort_keys=True, default=_json_default)
            self._write_text(text + "\n", output_path)
            self.logger.info(f"JSON saved: {output_path}")
            return output_path

        except OSError as e:
            self.logger.error(f"Failed to write JSON file: {e}")
            raise PersistenceError(f"Could not write {output_path}: {e}") from e

    def write_matrix_csv(self, matrix: np.ndarray, output_path: str, prefix: str = "x") -> str:
        """Dump a sample matrix, one row per vector, columns x1..xn."""
        try:
            frame = pd.DataFrame(matrix, columns=[f"{prefix}{j + 1}" for j in range(matrix.shape[1])])
            self._write_text(frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"), output_path)
            self.logger.info(f"Samples saved ({matrix.shape[0]} x {matrix.shape[1]}): {output_path}")
            return output_path

        except OSError as e:
            self.logger.error(f"Failed to write samples: {e}")
            raise PersistenceError(f"Could not write {output_path}: {e}") from e

    # MARK: Configuration Files
    def read_sweep_config(self, config_path: str) -> Dict[str, Any]:
        """
        Read a sweep configuration JSON document.

        Raises
        ------
        PersistenceError
            If the file cannot be read
        ConfigInvalid
            If the content is not a JSON object
        """
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            self.logger.error(f"Failed to read config file: {e}")
            raise PersistenceError(f"Could not read {config_path}: {e}") from e

        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigInvalid(f"Config {config_path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigInvalid(f"Config {config_path} must hold a JSON object")

        self.logger.info(f"Loaded sweep config: {config_path}")
        return data

    def get_default_output_path(self, stem: str = "sweep", extension: str = "csv") -> str:
        """
        Get default output path for experiment results.

        Returns
        -------
        str
            Path under OUTPUT_PATH with a timestamp
        """
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        output_dir = os.getenv(ENV_OUTPUT_PATH, DEFAULT_OUTPUT_DIR)

        if not os.path.exists(output_dir):
            os.makedirs(output_dir)

        return os.path.join(output_dir, f"{stem}_{timestamp}.{extension}")
