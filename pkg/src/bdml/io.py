"""Borough CSV ingestion, CSV round-tripping and deterministic report writing."""

import csv
from dataclasses import dataclass
import json
import math
from pathlib import Path

import numpy as np

from .errors import DataError
from .score import ObservationSet

OUTCOME_COLUMN = "di"
TREATMENT_COLUMN = "treatment"
NAME_COLUMN = "name"
FLOAT_FORMAT = "%.12g"


@dataclass(frozen=True)
class BoroughRecord:
    name: str
    di: float
    treatment: float
    confounders: tuple


@dataclass(frozen=True, eq=False)
class BoroughTable:
    records: list
    confounder_names: tuple

    def observations(self):
        y = np.array([r.di for r in self.records])
        d = np.array([r.treatment for r in self.records])
        x = np.array([r.confounders for r in self.records], dtype=float)
        return ObservationSet(y, d, x)

    def __len__(self):
        return len(self.records)


def _cell(raw, row, col):
    text = raw.strip()
    if not text:
        raise DataError(f"row {row}, column {col!r}: empty cell")
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"row {row}, column {col!r}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise DataError(f"row {row}, column {col!r}: non-finite value {text!r}")
    return value


def load_borough_csv(path):
    """Read a borough table.

    Required columns are ``di`` (outcome) and ``treatment``. An optional
    ``name`` column labels rows; every other column is a numeric confounder,
    kept in file order. Row numbers in errors count the header as row 1.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file {path} does not exist")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file, a header row is required") from None
        rows = list(reader)
    lowered = [h.lower() for h in header]
    if len(set(lowered)) != len(lowered):
        raise DataError(f"{path}: duplicate column names in header")
    for required in (OUTCOME_COLUMN, TREATMENT_COLUMN):
        if required not in lowered:
            raise DataError(f"{path}: header has no {required!r} column (is the header missing?)")
    i_di = lowered.index(OUTCOME_COLUMN)
    i_tr = lowered.index(TREATMENT_COLUMN)
    i_name = lowered.index(NAME_COLUMN) if NAME_COLUMN in lowered else None
    conf_idx = [j for j in range(len(header)) if j not in (i_di, i_tr, i_name)]
    if not conf_idx:
        raise DataError(f"{path}: no confounder columns")

    records = []
    seen = {}
    for offset, row in enumerate(rows):
        line = offset + 2
        if not any(c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"row {line}: expected {len(header)} fields, found {len(row)}")
        name = row[i_name].strip() if i_name is not None else f"row{line}"
        if name in seen:
            raise DataError(f"row {line}, column 'name': duplicate name {name!r} (first at row {seen[name]})")
        seen[name] = line
        di = _cell(row[i_di], line, header[i_di])
        if di <= 0:
            raise DataError(f"row {line}, column {header[i_di]!r}: di must be positive, got {di}")
        tr = _cell(row[i_tr], line, header[i_tr])
        if not 0.0 <= tr <= 100.0:
            raise DataError(
                f"row {line}, column {header[i_tr]!r}: treatment is a percentage, got {tr}"
            )
        conf = tuple(_cell(row[j], line, header[j]) for j in conf_idx)
        records.append(BoroughRecord(name, di, tr, conf))
    if len(records) < 4:
        raise DataError(f"{path}: need at least 4 rows, found {len(records)}")
    return BoroughTable(records, tuple(header[j] for j in conf_idx))


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return ""
        return FLOAT_FORMAT % v
    return str(v)


def write_csv(path, header, rows):
    """Write rows with floats at 12 significant digits and ``\\n`` line ends."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(v) for v in row])


def read_csv(path):
    """Header and rows, numeric cells converted to float (blank -> nan)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for row in reader:
            out = []
            for cell in row:
                if cell == "":
                    out.append(math.nan)
                    continue
                try:
                    out.append(float(cell))
                except ValueError:
                    out.append(cell)
            rows.append(out)
    return header, rows


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not math.isfinite(v):
            return str(v)
        return float(FLOAT_FORMAT % v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")
