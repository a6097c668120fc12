"""Reading and writing profile files.

A profile file is a JSON object::

    {"n": 3, "alpha": "7/2", "edges": [[1, 0], [1, 2]]}

``alpha`` is optional and, when present, must be an integer or ``"p/q"``
string; floats are refused so that equilibrium verdicts never depend on
rounding.  ``edges`` lists ``[owner, target]`` purchases.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .graph import InvalidProfileError, StrategyProfile, build_profile

__all__ = [
    "ProfileFormatError",
    "ProfileDocument",
    "parse_rational",
    "format_rational",
    "parse_profile",
    "serialize_profile",
    "load_profile",
    "dump_profile",
]

_RATIONAL = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class ProfileFormatError(ValueError):
    """Malformed profile document; ``position`` locates the problem."""

    def __init__(self, message: str, position: str):
        super().__init__(f"{position}: {message}")
        self.position = position


def parse_rational(text: str | int) -> Fraction:
    """Parse ``"p/q"`` or an integer string into an exact fraction."""
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    m = _RATIONAL.match(str(text))
    if not m:
        raise ValueError(f"not a rational (use an integer or p/q): {text!r}")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


@dataclass(frozen=True)
class ProfileDocument:
    profile: StrategyProfile
    alpha: Fraction | None = None


def serialize_profile(profile: StrategyProfile, alpha: Fraction | None = None) -> str:
    doc: dict = {"n": profile.n}
    if alpha is not None:
        doc["alpha"] = format_rational(alpha)
    doc["edges"] = [list(e) for e in profile.purchases]
    return json.dumps(doc, separators=(", ", ": ")) + "\n"


def parse_profile(text: str) -> ProfileDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileFormatError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ProfileFormatError("top level must be an object", "document")
    unknown = set(doc) - {"n", "alpha", "edges"}
    if unknown:
        raise ProfileFormatError(f"unknown fields {sorted(unknown)}", "document")
    n = doc.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise ProfileFormatError("n must be a nonnegative integer", "n")
    alpha = None
    if "alpha" in doc:
        raw = doc["alpha"]
        if not isinstance(raw, (str, int)) or isinstance(raw, bool):
            raise ProfileFormatError("alpha must be an integer or a 'p/q' string", "alpha")
        try:
            alpha = parse_rational(raw)
        except ValueError as exc:
            raise ProfileFormatError(str(exc), "alpha") from None
        if alpha <= 0:
            raise ProfileFormatError("alpha must be positive", "alpha")
    edges = doc.get("edges", [])
    if not isinstance(edges, list):
        raise ProfileFormatError("edges must be a list", "edges")
    pairs = []
    for i, e in enumerate(edges):
        if (
            not isinstance(e, list)
            or len(e) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in e)
        ):
            raise ProfileFormatError("expected [owner, target] integers", f"edges[{i}]")
        if (e[0], e[1]) in pairs:
            raise ProfileFormatError(f"duplicate purchase {e[0]}->{e[1]}", f"edges[{i}]")
        pairs.append((e[0], e[1]))
    try:
        profile = build_profile(n, pairs)
    except InvalidProfileError as exc:
        where = f"edges[{pairs.index(exc.edge)}]" if exc.edge in pairs else "edges"
        raise ProfileFormatError(str(exc), where) from None
    return ProfileDocument(profile, alpha)


def load_profile(path: str | Path) -> ProfileDocument:
    return parse_profile(Path(path).read_text())


def dump_profile(path: str | Path, profile: StrategyProfile, alpha: Fraction | None = None) -> None:
    Path(path).write_text(serialize_profile(profile, alpha))
