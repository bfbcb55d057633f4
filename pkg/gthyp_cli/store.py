"""Result persistence: matrix files, append-only CSV tables and run manifests."""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Iterable, Sequence
from datetime import datetime, timezone
from pathlib import Path

from gthyp import __version__
from gthyp.core import TestMatrix
from gthyp.errors import ParseError
from gthyp.harness import TABLE1_FIELDS, TABLE2_FIELDS, Table1Row, Table2Row

logger = logging.getLogger(__name__)


def read_matrix(path: str | Path) -> TestMatrix:
    path = Path(path)
    return TestMatrix.from_text(path.read_text(encoding="utf-8"), path=str(path))


def write_matrix(path: str | Path, matrix: TestMatrix) -> Path:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(matrix.to_text(), encoding="utf-8", newline="\n")
    return path


def write_csv(stream, fields: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(fields)
    writer.writerows(rows)


class ResultStore:
    """Output directory holding CSV tables and JSON manifests.

    Relative names resolve against the directory; absolute paths are used as is.
    """

    def __init__(self, output_dir: str | Path = "results"):
        self.output_dir = Path(output_dir)

    def path(self, name: str | Path) -> Path:
        name = Path(name)
        return name if name.is_absolute() else self.output_dir / name

    def append_rows(self, name: str | Path, fields: Sequence[str], rows: Iterable[Sequence]) -> Path:
        """Append rows to a CSV table, writing the header only for a new file."""
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        is_new = not path.exists() or path.stat().st_size == 0
        with path.open("a", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            if is_new:
                writer.writerow(fields)
            count = 0
            for row in rows:
                writer.writerow(row)
                count += 1
        logger.info(f"Appended {count} rows to {path}")
        return path

    def write_manifest(self, name: str | Path, config: dict, runs: list[dict]) -> Path:
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        manifest = {
            "tool": "gthyp",
            "version": __version__,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "config": config,
            "runs": runs,
        }
        path.write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")
        logger.info(f"Wrote manifest {path}")
        return path


# ── Readers ────────────────────────────────────────────────────────


def _rows(path: Path, fields: Sequence[str]) -> list[dict[str, str]]:
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != tuple(fields):
            raise ParseError(f"expected columns {','.join(fields)}", line=1, path=str(path))
        return list(reader)


def _optional_int(value: str) -> int | None:
    return None if value == "" else int(value)


def read_table1(path: str | Path) -> list[Table1Row]:
    path = Path(path)
    rows = []
    for lineno, row in enumerate(_rows(path, TABLE1_FIELDS), start=2):
        try:
            rows.append(Table1Row(
                s=int(row["s"]),
                **{name: float(row[name]) for name in TABLE1_FIELDS[1:]},
            ))
        except ValueError as e:
            raise ParseError(str(e), line=lineno, path=str(path)) from None
    return rows


def read_table2(path: str | Path) -> list[Table2Row]:
    path = Path(path)
    rows = []
    for lineno, row in enumerate(_rows(path, TABLE2_FIELDS), start=2):
        try:
            rows.append(Table2Row(
                N=int(row["N"]),
                t=int(row["t"]),
                s=int(row["s"]),
                rule=row["rule"],
                w=int(row["w"]),
                T=_optional_int(row["T"]),
                err_h0=float(row["err_h0"]),
                err_h1=float(row["err_h1"]),
                eps=float(row["eps"]),
                method=row["method"],
                trials=_optional_int(row["trials"]),
                master_seed=int(row["master_seed"]),
            ))
        except ValueError as e:
            raise ParseError(str(e), line=lineno, path=str(path)) from None
    return rows
