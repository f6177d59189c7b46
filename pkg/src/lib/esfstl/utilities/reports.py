# SPDX-FileCopyrightText: 2024 esfstl developers
# SPDX-License-Identifier: MIT
"""Run reports: one bundle of metadata, estimates and tables, emitted as text, JSON or CSV."""
from dataclasses import dataclass, field
import csv
import io
import json
import logging
import math
import os

import numpy as np

from esfstl.core.errors import ParameterError

logger = logging.getLogger(__name__)

valid_formats = ["text", "json", "csv"]


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def format_number(value):
    if value is None:
        return "-"
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return f"{float(value):.6g}"
    return str(value)


@dataclass(frozen=True)
class Estimate:
    """A reported number; stochastic estimates carry a standard error"""

    name: str
    value: object
    std_error: object = None
    note: str = ""


@dataclass
class Table:
    """Rows of equal length under named columns

    Parameters
    ----------
    name : str
        Identifier, also the CSV file suffix.
    title : str
    columns : list of str
    rows : list of list
    in_text : bool
        False leaves the table out of the text report (it stays in JSON and CSV).
    """

    name: str
    title: str
    columns: list
    rows: list = field(default_factory=list)
    in_text: bool = True


@dataclass
class ReportBundle:
    """Everything one run reports

    ``metadata`` holds the mode, model, parameters, seed and argument vector
    needed to replay the run.
    """

    metadata: dict = field(default_factory=dict)
    estimates: list = field(default_factory=list)
    tables: list = field(default_factory=list)

    def add_estimate(self, name, value, std_error=None, note=""):
        self.estimates.append(Estimate(name, _plain(value), _plain(std_error), note))

    def add_table(self, table):
        self.tables.append(table)
        return table

    def table(self, name):
        for table in self.tables:
            if table.name == name:
                return table
        raise KeyError(name)

    def to_dict(self):
        return {
            "metadata": {key: _plain(value) for key, value in self.metadata.items()},
            "estimates": [
                {"name": e.name, "value": e.value, "std_error": e.std_error, "note": e.note}
                for e in self.estimates
            ],
            "tables": {
                t.name: {"title": t.title, "columns": list(t.columns),
                         "rows": [[_plain(v) for v in row] for row in t.rows]}
                for t in self.tables
            },
        }


def render_text(bundle):
    out = io.StringIO()
    for key, value in bundle.metadata.items():
        if isinstance(value, (list, tuple)):
            value = " ".join(str(v) for v in value)
        out.write(f"{key}: {format_number(value)}\n")

    if bundle.estimates:
        out.write("\n")
        width = max(len(e.name) for e in bundle.estimates)
        for e in bundle.estimates:
            line = f"{e.name:<{width}}  {format_number(e.value)}"
            if e.std_error is not None:
                line += f"  (SE {format_number(e.std_error)})"
            if e.note:
                line += f"  [{e.note}]"
            out.write(line + "\n")

    for table in bundle.tables:
        if not table.in_text:
            continue
        cells = [list(table.columns)] + [[format_number(v) for v in row] for row in table.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(table.columns))]
        out.write(f"\n{table.title}\n")
        for row in cells:
            out.write("  ".join(cell.rjust(w) for cell, w in zip(row, widths)).rstrip() + "\n")
    return out.getvalue()


def render_json(bundle):
    return json.dumps(bundle.to_dict(), indent=2)


def write_csv(bundle, prefix):
    """Write one CSV file per table plus ``<prefix>_estimates.csv``

    Returns
    -------
    list of str
        Paths written.
    """
    directory = os.path.dirname(prefix)
    if directory:
        os.makedirs(directory, exist_ok=True)
    written = []

    path = f"{prefix}_estimates.csv"
    with open(path, "w", newline="") as csv_file:
        writer = csv.writer(csv_file)
        writer.writerow(["name", "value", "std_error", "note"])
        for e in bundle.estimates:
            writer.writerow([e.name, e.value, "" if e.std_error is None else e.std_error, e.note])
    written.append(path)

    for table in bundle.tables:
        path = f"{prefix}_{table.name}.csv"
        with open(path, "w", newline="") as csv_file:
            writer = csv.writer(csv_file)
            writer.writerow(table.columns)
            writer.writerows([[_plain(v) for v in row] for row in table.rows])
        written.append(path)
    logger.info("wrote %d CSV files with prefix %s", len(written), prefix)
    return written


def emit_report(bundle, format="text", output=None):
    """Render ``bundle`` and write it

    Parameters
    ----------
    bundle : ReportBundle
    format : str
        One of "text", "json", "csv".
    output : str, optional
        File for text and JSON (standard output when omitted); file prefix for
        CSV, which requires it.

    Returns
    -------
    str or list of str
        The rendered text or JSON, or the CSV paths written.
    """
    if format not in valid_formats:
        raise ParameterError("Invalid or missing 'format' arg. "
                             f"Acceptable values: {', '.join(valid_formats)}")

    if format == "csv":
        if not output:
            raise ParameterError("CSV reports need an output prefix")
        return write_csv(bundle, output)

    rendered = render_text(bundle) if format == "text" else render_json(bundle)
    if output:
        with open(output, "w") as report_file:
            report_file.write(rendered)
    return rendered
