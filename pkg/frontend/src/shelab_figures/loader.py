"""Thin loader for the CSV/JSON files written by the ``shelab`` command.

CSV layout: optional ``# key = value`` metadata lines, then a header row,
then data rows.  Columns parse to float arrays when every entry is numeric
and stay as string arrays otherwise (e.g. check names).
"""

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np


class FigureInputError(Exception):
    """Base class; carries the offending path."""

    def __init__(self, path, message):
        self.path = os.fspath(path)
        super().__init__(f"{self.path}: {message}")


class MissingInputError(FigureInputError):
    def __init__(self, path):
        super().__init__(path, "expected input file is missing")


class SchemaError(FigureInputError):
    def __init__(self, path, missing):
        super().__init__(path, f"missing expected columns {sorted(missing)}")


@dataclass
class Table:
    meta: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def __getitem__(self, column):
        return self.data[column]

    def __len__(self):
        return 0 if not self.columns else len(self.data[self.columns[0]])


def load_table(path, required=()):
    if not os.path.isfile(path):
        raise MissingInputError(path)
    meta = {}
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body_start = 0
    for line in lines:
        if not line.startswith("#"):
            break
        body_start += 1
        key, _, value = line.lstrip("# ").partition(" = ")
        meta[key] = value
    rows = list(csv.reader(lines[body_start:]))
    if not rows:
        raise SchemaError(path, set(required) or {"<header>"})
    columns = rows[0]
    missing = set(required) - set(columns)
    if missing:
        raise SchemaError(path, missing)
    cells = rows[1:]
    data = {}
    for i, name in enumerate(columns):
        raw = [r[i] for r in cells]
        try:
            data[name] = np.array([float(v) for v in raw])
        except ValueError:
            data[name] = np.array(raw, dtype=object)
    return Table(meta=meta, columns=columns, data=data)


def load_summary(input_dir):
    path = os.path.join(input_dir, "summary.json")
    if not os.path.isfile(path):
        raise MissingInputError(path)
    with open(path) as fh:
        return json.load(fh)


def meta_float(table, key, default=None):
    try:
        return float(table.meta[key])
    except (KeyError, ValueError):
        if default is None:
            raise SchemaError("<metadata>", {key}) from None
        return default
