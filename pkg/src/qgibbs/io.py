"""Serialization (CSV and JSON) and the on-disk coefficient-table cache.

Every file carries ``format_version``: JSON documents as a field, CSV files
as a leading ``# format_version=N`` comment line.  Exact rationals are
written as ``"num/den"`` strings (integers as decimal strings, so consumers
with 64-bit integers never overflow), and decimal output is the exact value
correctly rounded to 15 significant digits.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import re
import tempfile
import warnings
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

from filelock import FileLock

from .laws import law_from_params, law_params
from .models import Surd
from .phase import RegimeReport, ScalingSpec
from .series import BivariateTable, exact

FORMAT_VERSION = 1
CACHE_ENV = "QGIBBS_CACHE_DIR"


def format_exact(x) -> str:
    x = exact(Fraction(x))
    return str(x)


def format_decimal(x, digits: int = 15) -> str:
    """Exact rational (or Decimal) rounded to ``digits`` significant digits, half-even."""
    if isinstance(x, float):
        x = Fraction(x)
    if isinstance(x, Decimal):
        num, den = x, Decimal(1)
    else:
        x = Fraction(x)
        num, den = Decimal(x.numerator), Decimal(x.denominator)
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.Emax = 10**9
        ctx.Emin = -(10**9)
        value = num / den if den != 1 else +num
    return str(value)


def format_float(x: float) -> str:
    return repr(float(x))


def format_q_c(q_c) -> str:
    return str(q_c) if isinstance(q_c, Surd) else format_exact(q_c)


# ---------------------------------------------------------------------------
# tables


def table_to_dict(table: BivariateTable) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "model": table.model,
        "max_n": table.max_n,
        "rows": {str(n): {str(k): format_exact(v) for k, v in row.items()} for n, row in table.rows.items()},
    }


def table_from_dict(data: dict, version: int = FORMAT_VERSION) -> BivariateTable:
    if data.get("format_version") != version:
        raise ValueError(f"unsupported table format version {data.get('format_version')!r}")
    rows = {int(n): {int(k): exact(Fraction(v)) for k, v in row.items()} for n, row in data["rows"].items()}
    return BivariateTable(data["model"], int(data["max_n"]), rows)


def table_to_json(table: BivariateTable) -> str:
    return json.dumps(table_to_dict(table), separators=(",", ":"), sort_keys=True)


def table_from_json(text: str) -> BivariateTable:
    return table_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# regime reports


def report_to_dict(report: RegimeReport) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "model": report.model,
        "q": format_exact(report.q),
        "q_c": format_q_c(report.q_c),
        "regime": report.regime,
        "law": {"name": report.law.name, **law_params(report.law)},
        "scaling": {
            "shift": report.scaling.shift,
            "shift_per_n": report.scaling.shift_per_n,
            "exponent": report.scaling.exponent,
            "constant": report.scaling.constant,
        },
    }
    if report.rho is not None:
        out["supercritical"] = {
            "rho": report.rho,
            "mean_constant": report.mean_constant,
            "variance_constant": report.variance_constant,
        }
    if report.notes:
        out["notes"] = list(report.notes)
    return out


def _parse_q_c(text: str):
    m = re.fullmatch(r"(.+)\+(.+)\*sqrt\((.+)\)", text)
    if m:
        return Surd(Fraction(m.group(1)), Fraction(m.group(2)), Fraction(m.group(3)))
    return exact(Fraction(text))


def report_from_dict(data: dict) -> RegimeReport:
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported report format version {data.get('format_version')!r}")
    law_data = dict(data["law"])
    name = law_data.pop("name")
    sc = data["scaling"]
    sup = data.get("supercritical") or {}
    return RegimeReport(
        model=data["model"],
        q=Fraction(data["q"]),
        q_c=_parse_q_c(data["q_c"]),
        regime=data["regime"],
        law=law_from_params(name, law_data),
        scaling=ScalingSpec(sc["shift"], sc["shift_per_n"], sc["exponent"], sc["constant"]),
        rho=sup.get("rho"),
        mean_constant=sup.get("mean_constant"),
        variance_constant=sup.get("variance_constant"),
        notes=tuple(data.get("notes", ())),
    )


def report_to_json(report: RegimeReport) -> str:
    return json.dumps(report_to_dict(report), indent=2)


def report_from_json(text: str) -> RegimeReport:
    return report_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# CSV


def write_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# format_version={FORMAT_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def read_csv(text: str) -> tuple:
    """(format_version, header, rows) from text written by :func:`write_csv`."""
    lines = text.splitlines()
    version = None
    if lines and lines[0].startswith("# format_version="):
        version = int(lines[0].split("=", 1)[1])
        lines = lines[1:]
    reader = csv.reader(lines)
    header = next(reader)
    return version, header, list(reader)


def write_output(text: str, out: str | None, stdout) -> None:
    if out in (None, "-"):
        stdout.write(text)
        if not text.endswith("\n"):
            stdout.write("\n")
        return
    atomic_write(Path(out), text)


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# cache


class TableCache:
    """Coefficient tables on disk, one JSON file per (model, N, format version).

    A per-key file lock makes concurrent requests for the same key build the
    table once; the others wait and then read the published file.
    """

    def __init__(self, directory, version: int = FORMAT_VERSION):
        self.directory = Path(directory)
        self.version = version

    @staticmethod
    def default_directory() -> str | None:
        return os.environ.get(CACHE_ENV) or None

    def path(self, model_spec: str, max_n: int) -> Path:
        slug = re.sub(r"[^A-Za-z0-9.-]+", "_", model_spec)
        digest = hashlib.sha256(model_spec.encode()).hexdigest()[:10]
        return self.directory / f"{slug}-{digest}-N{max_n}-v{self.version}.json"

    def load(self, model_spec: str, max_n: int) -> BivariateTable | None:
        path = self.path(model_spec, max_n)
        if not path.exists():
            return None
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            table = table_from_dict(data, self.version)
            if table.model != model_spec or table.max_n != max_n:
                raise ValueError("key mismatch")
            return table
        except (ValueError, KeyError, TypeError, AttributeError) as exc:
            warnings.warn(f"ignoring corrupt cache entry {path}: {exc}; rebuilding", stacklevel=2)
            return None

    def get_or_build(self, model_spec: str, max_n: int, builder) -> BivariateTable:
        table = self.load(model_spec, max_n)
        if table is not None:
            return table
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(model_spec, max_n)
        with FileLock(str(path) + ".lock"):
            table = self.load(model_spec, max_n)
            if table is None:
                table = builder()
                data = table_to_dict(table)
                data["format_version"] = self.version
                atomic_write(path, json.dumps(data, separators=(",", ":"), sort_keys=True))
        return table
