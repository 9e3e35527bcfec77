"""Case specifications: one section of a flat key=value file per case.

The native format is INI-style (hand-editable tables of cases); a JSON
document {"cases": [{...}, ...]} with the same keys is accepted as an
alternative.  Parsing and serialization round-trip exactly.
"""

from __future__ import annotations

import configparser
import io
import json
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import List, Optional, Tuple

from .errors import ParseError
from .geometry import Ball
from .systems import make_system

COMMANDS = (
    "classify",
    "dimension",
    "verify-ubiquity",
    "quasi-independence",
    "build-cantor",
    "measure",
    "enumerate",
)

#: commands whose outputs depend on sampled randomness, hence require a seed
STATISTICAL_COMMANDS = {"build-cantor"}


@dataclass
class CaseSpec:
    case_id: str
    command: str
    system: str = "rationals"
    k: Optional[str] = None
    rho_coeff: Optional[str] = None
    degree: Optional[int] = None
    reduced: bool = False
    ubiquity: Optional[str] = None
    psi: Optional[str] = None
    f: Optional[str] = None
    n: Optional[int] = None
    n_range: Optional[str] = None      # "2:5" inclusive, or "2,3,4"
    Q: Optional[int] = None
    depth: Optional[int] = None
    eta: Optional[str] = None
    mode: Optional[str] = None         # paper | relaxed
    varpi: Optional[str] = None
    kappa: Optional[str] = None
    seed: Optional[int] = None
    balls: Optional[str] = None        # "0.3:0.5;0.71:0.93" interval list
    radius: Optional[str] = None       # literal or number, for `measure`
    samples: Optional[int] = None
    kappa_claim: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParseError(f"unknown command {self.command!r}")
        if self.command in STATISTICAL_COMMANDS and self.seed is None:
            raise ParseError(f"command {self.command} requires a seed")
        if self.system.startswith("lines21") and self.seed is None and self.command in ("measure", "verify-ubiquity"):
            raise ParseError("statistical strip measures require a seed")

    # -- derived values ----------------------------------------------------

    def make_system(self):
        kw = {}
        if self.k is not None:
            kw["k"] = Fraction(self.k)
        if self.rho_coeff is not None:
            kw["rho_coeff"] = Fraction(self.rho_coeff)
        if self.degree is not None:
            kw["degree"] = self.degree
        if self.reduced:
            kw["reduced"] = True
        sys = make_system(self.system, **kw)
        if self.ubiquity:
            sys = sys.with_ubiquity(self.ubiquity)
        return sys

    def n_values(self) -> List[int]:
        if self.n_range:
            txt = self.n_range
            if ":" in txt:
                a, b = txt.split(":")
                return list(range(int(a), int(b) + 1))
            return [int(x) for x in txt.split(",") if x.strip()]
        if self.n is not None:
            return [self.n]
        raise ParseError("case needs n or n_range")

    def ball_list(self) -> List[Ball]:
        if not self.balls:
            return [Ball(Fraction(1, 2), Fraction(1, 2), "unit_interval")]
        out = []
        for part in self.balls.split(";"):
            part = part.strip()
            if not part:
                continue
            lo, hi = (Fraction(x) for x in part.split(":"))
            out.append(Ball((lo + hi) / 2, (hi - lo) / 2, "unit_interval"))
        return out

    # -- serialization -----------------------------------------------------

    def to_pairs(self) -> List[Tuple[str, str]]:
        out = []
        for fld in fields(self):
            if fld.name == "case_id":
                continue
            val = getattr(self, fld.name)
            if val is None or val is False:
                continue
            out.append((fld.name, str(val) if not isinstance(val, bool) else "true"))
        return out


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if name in ("n", "Q", "depth", "seed", "samples", "degree"):
        return int(raw)
    if name == "reduced":
        return raw.lower() in ("1", "true", "yes", "on")
    return raw


def parse_cases_ini(text: str) -> List[CaseSpec]:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ParseError(f"bad case file: {e}") from e
    names = {f.name for f in fields(CaseSpec)}
    cases = []
    for section in cp.sections():
        kw = {"case_id": section}
        for key, raw in cp.items(section):
            if key not in names:
                raise ParseError(f"unknown key {key!r} in case {section!r}")
            kw[key] = _coerce(key, raw)
        if "command" not in kw:
            raise ParseError(f"case {section!r} has no command")
        cases.append(CaseSpec(**kw))
    return cases


def parse_cases_json(text: str) -> List[CaseSpec]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"bad JSON case file: {e}") from e
    names = {f.name for f in fields(CaseSpec)}
    cases = []
    for i, entry in enumerate(doc.get("cases", [])):
        kw = {"case_id": entry.get("case_id", f"case{i + 1}")}
        for key, raw in entry.items():
            if key == "case_id":
                continue
            if key not in names:
                raise ParseError(f"unknown key {key!r} in case {kw['case_id']!r}")
            kw[key] = raw if not isinstance(raw, str) else _coerce(key, raw)
        cases.append(CaseSpec(**kw))
    return cases


def parse_cases(text: str) -> List[CaseSpec]:
    if text.lstrip().startswith("{"):
        return parse_cases_json(text)
    return parse_cases_ini(text)


def serialize_cases(cases: List[CaseSpec]) -> str:
    cp = configparser.ConfigParser()
    for case in cases:
        cp[case.case_id] = dict(case.to_pairs())
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
