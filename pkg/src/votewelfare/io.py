"""Reading and writing populations, observed datasets and summaries.

Population CSV: header ``u_a,u_b[,weight]``. Observed CSV: header
``u_a,vote[,weight]`` with vote ``A`` or ``B``. Summary JSON: an object with
``mean_u_a``, ``vote_share_b``, ``cond_mean_a_given_b``, ``cond_mean_a_given_a``.
Parse errors raise :class:`InputFormatError` with the 1-based line number.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path
from typing import TextIO

from .errors import InputFormatError, ValidationError
from .model import ObservedDataset, Population, SummaryStatistics

INPUT_KINDS = ("population-csv", "observed-csv", "summary-json")
SUMMARY_KEYS = ("mean_u_a", "vote_share_b", "cond_mean_a_given_b", "cond_mean_a_given_a")


def digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _number(source: str, line: int, column: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputFormatError(source, line, f"column {column!r}: {text!r} is not a number") from None
    if not math.isfinite(value):
        raise InputFormatError(source, line, f"column {column!r}: {text!r} is not finite")
    return value


def _rows(text: str, source: str, required: tuple[str, ...], optional: tuple[str, ...]):
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputFormatError(source, 1, "empty file; expected a header row") from None
    header = [h.strip() for h in header]
    if header and header[0].startswith("\ufeff"):
        header[0] = header[0][1:]
    missing = [c for c in required if c not in header]
    unknown = [c for c in header if c not in required + optional]
    if missing or unknown:
        raise InputFormatError(
            source, 1,
            f"header must be {','.join(required + optional)} (weight optional); "
            f"missing {missing}, unexpected {unknown}",
        )
    index = {name: header.index(name) for name in header}
    rows = []
    for fields in reader:
        line = reader.line_num
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != len(header):
            raise InputFormatError(source, line, f"expected {len(header)} fields, got {len(fields)}")
        rows.append((line, {name: fields[i].strip() for name, i in index.items()}))
    if not rows:
        raise InputFormatError(source, None, "no data rows")
    return rows


def _wrap(source: str, line: int, exc: ValidationError) -> InputFormatError:
    return InputFormatError(source, line, str(exc))


def parse_population_csv(text: str, source: str = "<population>", tie_policy: str = "strict") -> Population:
    rows = _rows(text, source, ("u_a", "u_b"), ("weight",))
    u_a, u_b, weight = [], [], []
    for line, row in rows:
        u_a.append(_number(source, line, "u_a", row["u_a"]))
        u_b.append(_number(source, line, "u_b", row["u_b"]))
        weight.append(_number(source, line, "weight", row["weight"]) if row.get("weight") else 1.0)
    try:
        return Population(u_a, u_b, weight, tie_policy=tie_policy)
    except ValidationError as exc:
        line = _line_of(exc, rows)
        if line is None:
            raise
        raise _wrap(source, line, exc) from None


def parse_observed_csv(text: str, source: str = "<observed>") -> ObservedDataset:
    rows = _rows(text, source, ("u_a", "vote"), ("weight",))
    u_a, votes, weight = [], [], []
    for line, row in rows:
        u_a.append(_number(source, line, "u_a", row["u_a"]))
        vote = row["vote"].upper()
        if vote not in ("A", "B"):
            raise InputFormatError(source, line, f"column 'vote': {row['vote']!r} must be A or B")
        votes.append(vote == "B")
        weight.append(_number(source, line, "weight", row["weight"]) if row.get("weight") else 1.0)
    try:
        return ObservedDataset(u_a, votes, weight)
    except ValidationError as exc:
        line = _line_of(exc, rows)
        if line is None:
            raise
        raise _wrap(source, line, exc) from None


def _line_of(exc: Exception, rows) -> int | None:
    index = getattr(exc, "index", None)
    if index is None or not 0 <= index < len(rows):
        return None
    return rows[index][0]


def parse_summary_json(text: str, source: str = "<summary>", assume_constant_a: bool = False) -> SummaryStatistics:
    """Parse a summary object.

    With ``assume_constant_a`` the conditional means may be omitted and are
    set to ``mean_u_a`` (everyone shares one status-quo utility).
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(source, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputFormatError(source, 1, "expected a JSON object")
    values = {}
    for key in SUMMARY_KEYS:
        if key not in data:
            continue
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InputFormatError(source, None, f"{key!r} must be a number, got {value!r}")
        values[key] = float(value)
    for key in ("mean_u_a", "vote_share_b"):
        if key not in values:
            raise InputFormatError(source, None, f"missing required key {key!r}")
    conds = ("cond_mean_a_given_b", "cond_mean_a_given_a")
    if not all(k in values for k in conds):
        if not assume_constant_a:
            raise InputFormatError(
                source, None,
                "conditional means missing; supply cond_mean_a_given_b and cond_mean_a_given_a "
                "or assume a constant status-quo utility",
            )
        return SummaryStatistics.constant_status_quo(values["mean_u_a"], values["vote_share_b"])
    return SummaryStatistics(**values)


def read_text(path: str | Path | TextIO) -> tuple[str, str, bytes]:
    """Return (text, source name, raw bytes); ``-`` reads standard input."""
    if hasattr(path, "read"):
        text = path.read()
        return text, getattr(path, "name", "<stream>"), text.encode("utf-8")
    path = str(path)
    if path == "-":
        import sys

        raw = sys.stdin.buffer.read()
        return raw.decode("utf-8"), "<stdin>", raw
    raw = Path(path).read_bytes()
    try:
        return raw.decode("utf-8"), path, raw
    except UnicodeDecodeError as exc:
        raise InputFormatError(path, None, f"not valid UTF-8: {exc}") from None


def infer_kind(text: str, source: str) -> str:
    if source.endswith(".json") or text.lstrip().startswith("{"):
        return "summary-json"
    first = text.lstrip("\ufeff").splitlines()[0] if text.strip() else ""
    columns = {c.strip() for c in first.split(",")}
    if "vote" in columns:
        return "observed-csv"
    return "population-csv"


def population_to_csv(pop: Population) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["u_a", "u_b", "weight"])
    for a, b, w in zip(pop.u_a.tolist(), pop.u_b.tolist(), pop.weight.tolist()):
        writer.writerow([repr(a), repr(b), repr(w)])
    return buf.getvalue()


def observed_to_csv(obs: ObservedDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["u_a", "vote", "weight"])
    for a, v, w in zip(obs.u_a.tolist(), obs.votes_b.tolist(), obs.weight.tolist()):
        writer.writerow([repr(a), "B" if v else "A", repr(w)])
    return buf.getvalue()


def summary_to_json(stats: SummaryStatistics) -> str:
    return json.dumps(stats.to_dict(), indent=2)
