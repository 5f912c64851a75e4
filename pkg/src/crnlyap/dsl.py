"""Plain-text network format (``.crn``) and its JSON twin.

One reaction per line::

    2 S1 + S2 -> 2 S1 ; k = 2/9
    # comment
    0 -> S1 ; k = 1

Species are ordered by first appearance. A leading ``# species: A, B``
comment pins the order explicitly (and may list species that never appear
with a nonzero coefficient); other readers see it as an ordinary comment.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import (
    CrnError,
    CrnSyntaxError,
    NegativeCoefficient,
    NonpositiveEntry,
    NonpositiveRate,
)
from .network import Network, Reaction, build_network, format_complex, format_number

_SPECIES = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_INT = re.compile(r"\d+")
_NUMBER = re.compile(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d{1,4})?(\s*/\s*\d+)?")
_PRAGMA = re.compile(r"#\s*species\s*:(.*)$")


@dataclass(frozen=True)
class NetworkDocument:
    network: Network
    source_spans: dict[int, tuple[int, int]]


class _Line:
    """Cursor over one source line; columns are 1-based in errors."""

    def __init__(self, text: str, lineno: int):
        self.text = text
        self.lineno = lineno
        self.pos = 0

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.peek() == ""

    def error(self, msg: str, cls=CrnSyntaxError) -> CrnError:
        return cls(msg, self.lineno, self.pos + 1)

    def expect(self, token: str) -> None:
        self.skip_ws()
        if not self.text.startswith(token, self.pos):
            found = self.text[self.pos : self.pos + len(token)] or "end of line"
            raise self.error(f"expected {token!r}, found {found!r}")
        self.pos += len(token)

    def match(self, pattern: re.Pattern) -> str | None:
        self.skip_ws()
        m = pattern.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(0)


def _parse_rational_token(tok: str) -> Fraction:
    num, _, den = tok.partition("/")
    value = Fraction(num.strip())
    if den:
        d = int(den.strip())
        if d == 0:
            raise ZeroDivisionError
        value /= d
    return value


def _parse_side(cur: _Line, species: dict[str, int], order: list[str]) -> dict[str, Fraction]:
    side: dict[str, Fraction] = {}
    if cur.peek() == "0":
        save = cur.pos
        cur.pos += 1
        nxt = cur.peek()
        if nxt in ("", "-", ";") or cur.text.startswith("->", cur.pos):
            return side
        cur.pos = save
    while True:
        if cur.peek() == "-":
            raise cur.error("negative stoichiometric coefficient", NegativeCoefficient)
        coeff = Fraction(1)
        col = cur.pos
        tok = cur.match(_INT)
        if tok is not None:
            coeff = Fraction(int(tok))
            if cur.peek() == "/":
                cur.pos += 1
                den = cur.match(_INT)
                if den is None:
                    raise cur.error("expected integer denominator")
                if int(den) == 0:
                    cur.pos = col
                    raise cur.error("zero denominator")
                coeff /= int(den)
            if coeff == 0:
                cur.pos = col
                raise cur.error("zero coefficient")
        name = cur.match(_SPECIES)
        if name is None:
            raise cur.error("expected species name")
        if name not in species:
            species[name] = len(order)
            order.append(name)
        side[name] = side.get(name, Fraction(0)) + coeff
        if cur.peek() != "+":
            return side
        cur.pos += 1


def _parse_rate(cur: _Line) -> Fraction:
    cur.expect(";")
    cur.expect("k")
    cur.expect("=")
    if cur.peek() == "-":
        raise cur.error("rate constant must be positive", NonpositiveRate)
    col = cur.pos
    tok = cur.match(_NUMBER)
    if tok is None:
        raise cur.error("expected rate constant")
    try:
        k = _parse_rational_token(tok)
        kf = float(k)
    except (ValueError, ZeroDivisionError, OverflowError):
        cur.pos = col
        raise cur.error(f"invalid number {tok!r}") from None
    if k <= 0 or kf == 0.0:
        cur.pos = col
        raise cur.error("rate constant must be positive", NonpositiveRate)
    if not cur.at_end() and cur.peek() != "#":
        raise cur.error("unexpected trailing text")
    return k


def parse_network(text: str | bytes) -> NetworkDocument:
    """Parse ``.crn`` text. Every failure is a located :class:`CrnError`."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            before = bytes(text)[: exc.start]
            line = before.count(b"\n") + 1
            col = exc.start - (before.rfind(b"\n") + 1) + 1
            raise CrnSyntaxError("invalid UTF-8", line, col) from None

    species: dict[str, int] = {}
    order: list[str] = []
    raw: list[tuple[dict[str, Fraction], dict[str, Fraction], Fraction, int, int]] = []
    pinned = False
    for lineno, line in enumerate(text.split("\n"), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _PRAGMA.match(stripped)
            if m and not raw and not pinned:
                for name in (s.strip() for s in m.group(1).split(",")):
                    if not _SPECIES.fullmatch(name):
                        raise CrnSyntaxError(f"bad species name {name!r} in pragma", lineno, 1)
                    if name in species:
                        raise CrnSyntaxError(f"species {name!r} listed twice", lineno, 1)
                    species[name] = len(order)
                    order.append(name)
                pinned = True
            continue
        cur = _Line(line, lineno)
        cur.skip_ws()
        start_col = cur.pos + 1
        try:
            lhs = _parse_side(cur, species, order)
            cur.expect("->")
            rhs = _parse_side(cur, species, order)
            k = _parse_rate(cur)
        except (ValueError, OverflowError) as exc:
            # oversized literals and similar; CrnError is not a ValueError
            raise cur.error(f"invalid literal: {exc}") from None
        raw.append((lhs, rhs, k, lineno, start_col))

    if not raw:
        raise CrnSyntaxError("no reactions found", 1, 1)

    n = len(order)
    reactions = []
    spans = {}
    for i, (lhs, rhs, k, lineno, col) in enumerate(raw):
        reactant = [Fraction(0)] * n
        product = [Fraction(0)] * n
        for name, c in lhs.items():
            reactant[species[name]] = c
        for name, c in rhs.items():
            product[species[name]] = c
        reactions.append(Reaction.make(reactant, product, k))
        spans[i] = (lineno, col)
    try:
        net = build_network(order, reactions)
    except CrnError as exc:
        # attach the source location of the offending reaction
        m = re.match(r"reaction (\d+):", exc.message)
        if m:
            lineno, col = spans[int(m.group(1)) - 1]
            raise type(exc)(exc.message, lineno, col) from None
        raise
    return NetworkDocument(net, spans)


def _format_rate(rx: Reaction) -> str:
    if rx.exact_rate is not None:
        return format_number(rx.exact_rate)
    return repr(rx.rate)


def _first_appearance(net: Network) -> list[str]:
    order: list[str] = []
    for rx in net.reactions:
        for z in (rx.reactant, rx.product):
            for name, c in zip(net.species, z):
                if c != 0 and name not in order:
                    order.append(name)
    return order


def print_network(net: Network) -> str:
    """Canonical text form; ``parse_network`` inverts it exactly."""
    lines = []
    if _first_appearance(net) != list(net.species):
        lines.append("# species: " + ", ".join(net.species))
    for rx in net.reactions:
        lhs = format_complex(net.species, rx.reactant)
        rhs = format_complex(net.species, rx.product)
        lines.append(f"{lhs} -> {rhs} ; k = {_format_rate(rx)}")
    return "\n".join(lines) + "\n"


def parse_dmatrix(text: str, n: int | None = None) -> tuple[Fraction, ...]:
    """Parse ``"1/3, 1"`` into exact positive diagonal entries."""
    entries = []
    for i, tok in enumerate(text.split(","), start=1):
        tok = tok.strip()
        try:
            value = _parse_rational_token(tok)
        except (ValueError, ZeroDivisionError, OverflowError):
            raise CrnSyntaxError(f"entry {i}: invalid number {tok!r}", 1, i) from None
        if value <= 0:
            raise NonpositiveEntry(f"entry {i}: diagonal entries must be positive, got {tok}")
        entries.append(value)
    if n is not None and len(entries) != n:
        raise NonpositiveEntry(f"expected {n} diagonal entries, got {len(entries)}")
    return tuple(entries)


# JSON form ---------------------------------------------------------------


def _rate_json(rx: Reaction) -> Any:
    if rx.exact_rate is not None:
        if rx.exact_rate.denominator == 1:
            return rx.exact_rate.numerator
        return format_number(rx.exact_rate)
    return rx.rate


def network_to_dict(net: Network) -> dict:
    def side(z):
        return {name: format_number(c) for name, c in zip(net.species, z) if c != 0}

    return {
        "species": list(net.species),
        "reactions": [
            {"reactant": side(rx.reactant), "product": side(rx.product), "k": _rate_json(rx)}
            for rx in net.reactions
        ],
    }


def network_from_dict(data: dict) -> Network:
    try:
        species = list(data["species"])
        idx = {s: j for j, s in enumerate(species)}
        reactions = []
        for entry in data["reactions"]:
            zs = []
            for key in ("reactant", "product"):
                z = [Fraction(0)] * len(species)
                for name, c in entry[key].items():
                    z[idx[name]] = Fraction(str(c))
                zs.append(z)
            k = entry["k"]
            if isinstance(k, str):
                k = Fraction(k)
            reactions.append(Reaction.make(zs[0], zs[1], k))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise CrnSyntaxError(f"malformed network JSON: {exc}") from None
    if any(not math.isfinite(r.rate) for r in reactions):
        raise NonpositiveRate("rate constants must be finite")
    return build_network(species, reactions)


def parse_complex(text: str, species: list[str] | tuple[str, ...]) -> tuple[Fraction, ...]:
    """Parse one complex such as ``"2 S1 + S2"`` against a fixed species list."""
    idx = {s: j for j, s in enumerate(species)}
    order = list(species)
    cur = _Line(text, 1)
    try:
        side = _parse_side(cur, dict(idx), order)
    except (ValueError, OverflowError) as exc:
        raise cur.error(f"invalid literal: {exc}") from None
    if not cur.at_end():
        raise cur.error("unexpected trailing text")
    unknown = [s for s in side if s not in idx]
    if unknown:
        raise CrnSyntaxError(f"unknown species {', '.join(unknown)}", 1, 1)
    z = [Fraction(0)] * len(species)
    for name, c in side.items():
        z[idx[name]] = c
    return tuple(z)
