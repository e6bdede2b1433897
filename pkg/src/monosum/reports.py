"""Evidence objects for limits and diagnostics, plus report serialization.

JSON payloads are canonical: sorted keys, compact separators, every float
rendered with 17 significant digits so reports round-trip exactly and two
runs with the same seed produce byte-identical payloads. Timestamps live in
a sidecar section explicitly marked non-deterministic.
"""

import csv
import json
import json.encoder
import math
import time
from dataclasses import dataclass, field

import numpy as np

from monosum.errors import ConfigurationError


def _floatstr(o):
    if o != o:
        return "NaN"
    if o == math.inf:
        return "Infinity"
    if o == -math.inf:
        return "-Infinity"
    return format(o, ".17g")


def _reject_unknown(o):
    raise TypeError(f"not JSON serializable: {type(o)!r}")


def canonical_json(obj) -> str:
    """Deterministic JSON text with 17-significant-digit floats."""
    make = json.encoder._make_iterencode(
        {},
        _reject_unknown,
        json.encoder.encode_basestring_ascii,
        None,
        _floatstr,
        ":",
        ",",
        True,  # sort_keys
        False,
        False,
    )
    return "".join(make(to_plain(obj), 0))


def to_plain(obj):
    """Recursively convert numpy containers/scalars to JSON-ready python."""
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    return obj


def format_float(x: float) -> str:
    return _floatstr(float(x))


@dataclass
class PathRecord:
    """One evaluation along a parameter path."""

    lam: float
    mu: float
    iterate_norm: float
    successive_diff: float  # nan on the first record

    def row(self):
        return [self.lam, self.mu, self.iterate_norm, self.successive_diff]


@dataclass
class ConvergenceReport:
    """Uniform output of every limit-taking operation."""

    records: list[PathRecord]
    converged: bool
    limit: np.ndarray
    rate: float
    tolerance: float
    verdict: str
    richardson: np.ndarray | None = None

    def final_diff(self) -> float:
        return self.records[-1].successive_diff if self.records else math.nan

    def to_payload(self) -> dict:
        return to_plain(
            {
                "kind": "convergence",
                "converged": self.converged,
                "tolerance": self.tolerance,
                "rate": self.rate,
                "verdict": self.verdict,
                "limit": self.limit,
                "richardson": self.richardson,
                "records": [
                    {
                        "lambda": r.lam,
                        "mu": r.mu,
                        "norm": r.iterate_norm,
                        "diff": r.successive_diff,
                    }
                    for r in self.records
                ],
            }
        )

    def csv_rows(self):
        header = ["lambda", "mu", "norm", "diff"]
        return header, [r.row() for r in self.records]


@dataclass
class DiagnosticReport:
    """Outcome of a sampled operator diagnostic.

    ``comparison`` fixes the direction of the pass test so the invariant
    "pass flag consistent with worst value vs tolerance" is checkable.
    """

    kind: str
    samples: int
    witness: np.ndarray
    worst_value: float
    passed: bool
    tolerance: float
    comparison: str = "<="
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.comparison not in ("<=", ">="):
            raise ConfigurationError("comparison must be '<=' or '>='")
        ok = (
            self.worst_value <= self.tolerance
            if self.comparison == "<="
            else self.worst_value >= self.tolerance
        )
        if bool(self.passed) != bool(ok):
            raise ConfigurationError(
                f"inconsistent diagnostic: passed={self.passed} but "
                f"worst {self.worst_value!r} {self.comparison} {self.tolerance!r} is {ok}"
            )

    def to_payload(self) -> dict:
        return to_plain(
            {
                "kind": self.kind,
                "samples": self.samples,
                "worst_value": self.worst_value,
                "passed": self.passed,
                "tolerance": self.tolerance,
                "comparison": self.comparison,
                "witness": self.witness,
                "details": self.details,
            }
        )

    def csv_rows(self):
        series = self.details.get("series")
        if series:
            header = ["lambda", "mu", "norm", "diff"]
            return header, [list(row) for row in series]
        header = ["kind", "samples", "worst_value", "passed", "tolerance"]
        return header, [[self.kind, self.samples, self.worst_value, self.passed, self.tolerance]]


def write_json_report(path, payload: dict, deterministic_only: bool = False) -> None:
    """Write {"payload": ..., "sidecar": ...}; only the sidecar may vary."""
    doc = '{"payload":' + canonical_json(payload)
    if not deterministic_only:
        sidecar = {
            "deterministic": False,
            "written_at_unix": time.time(),
        }
        doc += ',"sidecar":' + canonical_json(sidecar)
    doc += "}"
    with open(path, "w") as fh:
        fh.write(doc + "\n")


def write_csv_report(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [format_float(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )


def read_json_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
