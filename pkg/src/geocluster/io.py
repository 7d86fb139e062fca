"""Dataset files, result persistence, and plot-ready exports.

Dataset schema: `individuals.csv` with header ``id,x,y,gang`` (gang may be
empty) and `contacts.csv` with header ``id_a,id_b``. Coordinates are stored
in meters with full float precision (repr round-trip). Reports are JSON with
a fixed key order per command; plot-ready exports are long-format CSV with
header ``param,value,metric,mean,std``. All files are UTF-8 with LF
newlines, so a repeated run with the same seed is byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .graph import Individual, SocialMatrix


class ParseError(DataError):
    def __init__(self, path, line: int, message: str) -> None:
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


class UnknownId(DataError):
    def __init__(self, identifier: str) -> None:
        super().__init__(f"contact references unknown id {identifier!r}")
        self.identifier = identifier


class SelfContact(DataError):
    def __init__(self, identifier: str) -> None:
        super().__init__(f"self-contact for id {identifier!r}")
        self.identifier = identifier


@dataclass(frozen=True)
class DatasetFiles:
    individuals_csv: Path
    contacts_csv: Path

    @classmethod
    def in_dir(cls, directory) -> "DatasetFiles":
        d = Path(directory)
        return cls(d / "individuals.csv", d / "contacts.csv")


def load_dataset(files: DatasetFiles) -> tuple[list[Individual], SocialMatrix]:
    """Parse a dataset, deduplicating repeated contacts and rejecting
    self-contacts and contacts whose ids do not resolve."""
    individuals: list[Individual] = []
    index: dict[str, int] = {}
    with open(files.individuals_csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require_columns(files.individuals_csv, reader.fieldnames, ("id", "x", "y", "gang"))
        for line_no, row in enumerate(reader, start=2):
            ident = (row["id"] or "").strip()
            if not ident:
                raise ParseError(files.individuals_csv, line_no, "empty id")
            if ident in index:
                raise ParseError(files.individuals_csv, line_no, f"duplicate id {ident!r}")
            try:
                x, y = float(row["x"]), float(row["y"])
            except (TypeError, ValueError):
                raise ParseError(files.individuals_csv, line_no, "bad coordinate") from None
            gang = (row["gang"] or "").strip() or None
            index[ident] = len(individuals)
            individuals.append(Individual(id=ident, x=x, y=y, gang=gang))

    pairs: list[tuple[int, int]] = []
    with open(files.contacts_csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        _require_columns(files.contacts_csv, reader.fieldnames, ("id_a", "id_b"))
        for line_no, row in enumerate(reader, start=2):
            a, b = (row["id_a"] or "").strip(), (row["id_b"] or "").strip()
            if a not in index:
                raise UnknownId(a)
            if b not in index:
                raise UnknownId(b)
            if a == b:
                raise SelfContact(a)
            pairs.append((index[a], index[b]))
    return individuals, SocialMatrix.from_pairs(len(individuals), pairs)


def _require_columns(path, fieldnames, required) -> None:
    missing = [c for c in required if fieldnames is None or c not in fieldnames]
    if missing:
        raise ParseError(path, 1, f"missing required columns {missing}")


def save_dataset(individuals: Sequence[Individual], social: SocialMatrix,
                 files: DatasetFiles) -> None:
    with open(files.individuals_csv, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "x", "y", "gang"])
        for p in individuals:
            writer.writerow([p.id, repr(p.x), repr(p.y), p.gang or ""])
    with open(files.contacts_csv, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id_a", "id_b"])
        for i, j in sorted(social.pairs):
            writer.writerow([individuals[i].id, individuals[j].id])


def jsonable(value):
    """Coerce numpy containers and scalars to plain JSON types, preserving
    dict insertion order."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def save_results(report: dict, path) -> None:
    """Write a run report as stable, diffable JSON."""
    path = Path(path)
    text = json.dumps(jsonable(report), indent=2, ensure_ascii=False)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text + "\n")


def load_results(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def save_plot_csv(rows: Sequence[dict], path) -> None:
    """Long-format plot export: one (param, value, metric) measurement per row."""
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["param", "value", "metric", "mean", "std"])
        for row in rows:
            writer.writerow([
                row["param"], repr(float(row["value"])), row["metric"],
                repr(float(row["mean"])), repr(float(row["std"])),
            ])
