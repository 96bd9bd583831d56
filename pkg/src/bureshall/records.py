"""RunRecord: the machine-readable result of every CLI command."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, fields

SIG_DIGITS = 12


@dataclass
class ResultEntry:
    """One named number.  ``reference``/``abs_diff`` are explicitly null when absent."""

    name: str
    value: float | None
    std_err: float | None = None
    reference: float | None = None
    abs_diff: float | None = None
    error_estimate: float | None = None
    tol: float | None = None
    passed: bool | None = None
    witness: str | None = None

    def __post_init__(self):
        if self.reference is not None and self.abs_diff is None and self.value is not None:
            self.abs_diff = abs(self.value - self.reference)

    @property
    def sigma(self) -> float | None:
        if self.std_err and self.reference is not None and self.value is not None:
            return (self.value - self.reference) / self.std_err
        return None


@dataclass
class RunRecord:
    command: str
    params: dict
    results: list[ResultEntry] = field(default_factory=list)
    seed: int | None = None
    tool_version: str = ""
    elapsed_ms: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["results"] = [asdict(r) for r in self.results]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        d = json.loads(text)
        known = {f.name for f in fields(cls)}
        if set(d) != known:
            raise ValueError(f"RunRecord fields {sorted(d)} != {sorted(known)}")
        d["results"] = [ResultEntry(**r) for r in d["results"]]
        return cls(**d)

    def deterministic_json(self) -> str:
        """JSON with elapsed_ms zeroed, for reproducibility comparisons."""
        d = self.to_dict()
        d["elapsed_ms"] = 0
        return json.dumps(d, indent=2) + "\n"

    @property
    def all_passed(self) -> bool:
        return all(r.passed is not False for r in self.results)


def fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "pass" if v else "FAIL"
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


def _param(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return fmt(v)


_COLUMNS = ("name", "value", "std_err", "reference", "abs_diff", "error_estimate", "tol", "passed", "witness")


def _active_columns(record: RunRecord) -> list[str]:
    cols = [c for c in _COLUMNS if c == "name" or any(getattr(r, c) is not None for r in record.results)]
    return cols


def render_table(record: RunRecord) -> str:
    cols = _active_columns(record)
    rows = [[fmt(getattr(r, c)) for c in cols] for r in record.results]
    widths = [max(len(c), *(len(row[i]) for row in rows)) if rows else len(c) for i, c in enumerate(cols)]
    out = io.StringIO()
    head = " ".join(f"{k}={_param(v)}" for k, v in record.params.items())
    out.write(f"# {record.command}  {head}")
    if record.seed is not None:
        out.write(f"  seed={record.seed}")
    out.write("\n")
    out.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip() + "\n")
    for row in rows:
        out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")
    return out.getvalue()


def render_csv(record: RunRecord) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(_COLUMNS)
    for r in record.results:
        w.writerow(["" if getattr(r, c) is None else fmt(getattr(r, c)) for c in _COLUMNS])
    return out.getvalue()


def render(record: RunRecord, form: str) -> str:
    if form == "json":
        return record.to_json()
    if form == "csv":
        return render_csv(record)
    return render_table(record)
