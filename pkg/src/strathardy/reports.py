"""Report rows and deterministic CSV/JSON serialization.

Rows serialize with repr-based float formatting and sorted JSON keys, and
carry a sha256 digest of their resolved configuration, so identical
configurations produce byte-identical output files.  No timestamps, no
environment-dependent fields.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .quadrature import IntegralEstimate

__all__ = ["Report", "CSV_COLUMNS", "config_digest", "render_csv", "render_json"]

CSV_COLUMNS = (
    "inequality_id",
    "p",
    "quotient_or_margin",
    "bound",
    "numerator",
    "denominator",
    "stderr",
    "evaluations",
    "seed",
    "config_digest",
)

# which number a row's contract constrains, hence what the CSV column shows
_HEADLINE = {
    "hardy": "quotient",
    "sharpness": "quotient",
    "sobolev": "quotient",
    "luan-young": "quotient",
    "general-hardy": "margin",
    "remainder": "margin",
    "bft": "quotient",
}


def _canonical(obj):
    """Convert nested config/extras into a json-stable structure."""
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_canonical(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if obj is None or isinstance(obj, (str, bool)):
        return obj
    raise TypeError(f"cannot canonicalize {type(obj).__name__} for hashing")


def config_digest(config: dict) -> str:
    """sha256 over the canonical JSON form of a resolved configuration."""
    payload = json.dumps(_canonical(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class Report:
    """One verified quantity: a quotient or margin against its bound."""

    inequality_id: str
    p: float
    group: str
    nu: tuple
    d: float
    quotient: float | None
    bound: float
    margin: float | None
    stderr: float
    evaluations: int
    seed: int
    config_digest: str
    numerator: IntegralEstimate | None = None
    denominator: IntegralEstimate | None = None
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.evaluations <= 0:
            raise ValueError("a report must be backed by at least one evaluation")

    @property
    def headline(self) -> float:
        """The value of the quotient_or_margin CSV column for this row."""
        kind = _HEADLINE.get(self.inequality_id.split(":")[0], "quotient")
        value = getattr(self, kind)
        if value is None:
            value = self.margin if kind == "quotient" else self.quotient
        return float(value)

    def contract_tolerance(self) -> float:
        """Allowed negative slack: 3 sigma plus the deterministic budget."""
        scale = max(abs(self.bound), abs(self.headline), 1e-12)
        return 3.0 * self.stderr + 1e-3 * scale


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(reports) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in reports:
        row = (
            r.inequality_id,
            _fmt(float(r.p)),
            _fmt(r.headline),
            _fmt(float(r.bound)),
            _fmt(None if r.numerator is None else float(r.numerator.value)),
            _fmt(None if r.denominator is None else float(r.denominator.value)),
            _fmt(float(r.stderr)),
            str(int(r.evaluations)),
            str(int(r.seed)),
            r.config_digest,
        )
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _estimate_obj(est: IntegralEstimate | None):
    if est is None:
        return None
    return {
        "value": float(est.value),
        "stderr": float(est.stderr),
        "evaluations": int(est.evaluations),
    }


def render_json(reports, config: dict) -> str:
    """JSON mirror of the CSV rows plus a nested echo of the configuration."""
    rows = []
    for r in reports:
        rows.append(
            {
                "inequality_id": r.inequality_id,
                "p": float(r.p),
                "quotient_or_margin": r.headline,
                "quotient": None if r.quotient is None else float(r.quotient),
                "margin": None if r.margin is None else float(r.margin),
                "bound": float(r.bound),
                "numerator": _estimate_obj(r.numerator),
                "denominator": _estimate_obj(r.denominator),
                "stderr": float(r.stderr),
                "evaluations": int(r.evaluations),
                "seed": int(r.seed),
                "config_digest": r.config_digest,
                "group": r.group,
                "nu": [float(v) for v in r.nu],
                "d": float(r.d),
                "extras": _canonical(r.extras),
            }
        )
    doc = {"config": _canonical(config), "rows": rows}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
