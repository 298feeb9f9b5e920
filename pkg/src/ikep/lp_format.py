"""LP-format text export and the matching grammar checker.

The exporter writes the standard textual linear-program layout (objective
section, named constraints, Binary declarations) so models can be handed
to external solvers; the parser re-reads that grammar and is used to
verify exports round-trip.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ModelError
from .model import IpModel


def _coeff(c: float, first: bool) -> str:
    sign = "-" if c < 0 else ("" if first else "+")
    mag = abs(c)
    num = f"{mag:g} " if mag != 1 else ""
    return f"{sign} {num}".strip() + (" " if not num else "")


def _terms_text(terms, names) -> str:
    if not terms:
        return ""
    parts = []
    for pos, (idx, c) in enumerate(terms):
        parts.append(f"{_coeff(c, pos == 0)}{names[idx]}")
    return " ".join(parts)


def export_lp_text(model: IpModel) -> str:
    """Deterministic LP-format text for a binary model."""
    names = [v.name for v in model.variables]
    if len(set(names)) != len(names):
        raise ModelError("variable names are not unique")
    lines = ["Maximize"]
    lines.append(f" obj: {_terms_text(model.objective, names)}")
    lines.append("Subject To")
    for c in model.constraints:
        rel = {"<=": "<=", ">=": ">=", "=": "="}[c.relation]
        lines.append(f" {c.name}: {_terms_text(c.terms, names)} {rel} {c.rhs:g}")
    lines.append("Binary")
    for n in names:
        lines.append(f" {n}")
    lines.append("End")
    return "\n".join(lines) + "\n"


@dataclass
class ParsedLp:
    objective: dict[str, float] = field(default_factory=dict)
    constraints: list[tuple[str, dict[str, float], str, float]] = field(default_factory=list)
    binaries: list[str] = field(default_factory=list)


_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_TERM_RE = re.compile(rf"([+-])?\s*(\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)?\s*({_NAME})")


def _parse_terms(text: str, where: str) -> dict[str, float]:
    terms: dict[str, float] = {}
    pos = 0
    text = text.strip()
    while pos < len(text):
        mm = _TERM_RE.match(text, pos)
        if not mm:
            raise ModelError(f"{where}: cannot parse terms at {text[pos:pos + 30]!r}")
        sign = -1.0 if mm.group(1) == "-" else 1.0
        coeff = float(mm.group(2)) if mm.group(2) else 1.0
        name = mm.group(3)
        if name in terms:
            raise ModelError(f"{where}: duplicate variable {name}")
        terms[name] = sign * coeff
        pos = mm.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return terms


def parse_lp_text(text: str) -> ParsedLp:
    """Parse the exporter's grammar back into names and coefficients."""
    out = ParsedLp()
    section = None
    pending: list[str] = []
    for raw in text.splitlines():
        line = raw.split("\\")[0].strip()
        if not line:
            continue
        low = line.lower()
        if low in ("maximize", "minimize", "subject to", "st", "binary", "binaries", "end"):
            section = low
            continue
        if section in ("maximize", "minimize"):
            body = line.split(":", 1)[1] if ":" in line else line
            out.objective.update(_parse_terms(body, "objective"))
        elif section in ("subject to", "st"):
            if ":" not in line:
                raise ModelError(f"constraint line missing name: {line!r}")
            name, body = (p.strip() for p in line.split(":", 1))
            mm = re.search(r"(<=|>=|=)\s*([+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)\s*$", body)
            if not mm:
                raise ModelError(f"constraint {name}: missing relation/rhs")
            terms = _parse_terms(body[: mm.start()], f"constraint {name}")
            out.constraints.append((name, terms, mm.group(1), float(mm.group(2))))
        elif section in ("binary", "binaries"):
            for tok in line.split():
                if not re.fullmatch(_NAME, tok):
                    raise ModelError(f"bad variable name {tok!r} in Binary section")
                pending.append(tok)
        elif section == "end":
            raise ModelError(f"content after End: {line!r}")
        else:
            raise ModelError(f"content before any section: {line!r}")
    out.binaries = pending
    if section != "end":
        raise ModelError("missing End marker")
    declared = set(out.binaries)
    used = set(out.objective)
    for _, terms, _, _ in out.constraints:
        used |= set(terms)
    if used - declared:
        raise ModelError(f"undeclared variables: {sorted(used - declared)[:5]}")
    return out
