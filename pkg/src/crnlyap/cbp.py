"""Networks produced from a complex-balanced source by a diagonal matrix D.

Reactants are kept, each product becomes ``v + D^-1 (v' - v)`` and each rate
constant becomes ``k * prod_j d_j ** v_j``. All stoichiometry stays exact.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .dsl import parse_dmatrix, print_network
from .errors import (
    DimensionMismatch,
    NegativeProductCoefficient,
    NonIntegerProduct,
    NonpositiveEntry,
    SelfLoopProduced,
)
from .network import Network, Reaction, build_network, format_number


class Integrality(enum.Enum):
    REQUIRE_INTEGER = "require_integer"
    ALLOW_FRACTIONAL = "allow_fractional"


class Direction(enum.Enum):
    TO_CBP = "to_cbp"
    TO_SOURCE = "to_source"


@dataclass(frozen=True)
class ProducingMatrix:
    diag: tuple[Fraction, ...]

    def __post_init__(self):
        if any(d <= 0 for d in self.diag):
            raise NonpositiveEntry(f"producing matrix entries must be positive, got {self.diag}")

    @classmethod
    def of(cls, entries) -> "ProducingMatrix":
        if isinstance(entries, str):
            return cls(parse_dmatrix(entries))
        return cls(tuple(linalg.as_fraction(e) for e in entries))

    @classmethod
    def identity(cls, n: int) -> "ProducingMatrix":
        return cls((Fraction(1),) * n)

    def __len__(self) -> int:
        return len(self.diag)

    @property
    def inverse(self) -> tuple[Fraction, ...]:
        return tuple(1 / d for d in self.diag)

    def as_floats(self) -> np.ndarray:
        return np.array([float(d) for d in self.diag])

    def __str__(self) -> str:
        return ", ".join(format_number(d) for d in self.diag)


@dataclass(frozen=True)
class CbpResult:
    network: Network
    producing_matrix: ProducingMatrix
    integrality: Integrality
    source_fingerprint: str


def fingerprint(net: Network) -> str:
    return hashlib.sha256(print_network(net).encode()).hexdigest()


def _transformed_rate(rx: Reaction, d: ProducingMatrix) -> float | Fraction:
    exact_ok = rx.exact_rate is not None and all(v.denominator == 1 for v in rx.reactant)
    if exact_ok:
        k = rx.exact_rate
        for dj, vj in zip(d.diag, rx.reactant):
            k *= dj ** int(vj)
        return k
    log_k = math.log(rx.rate) + sum(float(vj) * math.log(dj) for dj, vj in zip(d.diag, rx.reactant))
    return math.exp(log_k)


def cbp_generate(
    src: Network,
    d: ProducingMatrix,
    mode: Integrality = Integrality.REQUIRE_INTEGER,
) -> CbpResult:
    """Apply the producing matrix ``d`` to every reaction of ``src``."""
    if len(d) != src.n_species:
        raise DimensionMismatch(f"producing matrix has {len(d)} entries, network has {src.n_species} species")
    inv = d.inverse
    reactions = []
    for i, rx in enumerate(src.reactions, start=1):
        product = tuple(v + di * (vp - v) for v, vp, di in zip(rx.reactant, rx.product, inv))
        bad = [src.species[j] for j, c in enumerate(product) if c < 0]
        if bad:
            raise NegativeProductCoefficient(
                f"reaction {i}: product coefficient of {', '.join(bad)} would be negative"
            )
        if mode is Integrality.REQUIRE_INTEGER:
            frac = [f"{format_number(c)} {src.species[j]}" for j, c in enumerate(product) if c.denominator != 1]
            if frac:
                raise NonIntegerProduct(f"reaction {i}: non-integer product coefficient(s) {', '.join(frac)}")
        if product == rx.reactant:
            raise SelfLoopProduced(f"reaction {i}: transformed product equals reactant")
        k = _transformed_rate(rx, d)
        reactions.append(Reaction.make(rx.reactant, product, k))
    net = build_network(src.species, reactions)
    return CbpResult(net, d, mode, fingerprint(src))


@dataclass(frozen=True)
class StructureCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class StructureRelation:
    checks: tuple[StructureCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def cbp_structure_relation(src: Network, result: CbpResult) -> StructureRelation:
    """Exact checks that ``result`` is the image of ``src`` under D."""
    net, d = result.network, result.producing_matrix
    inv = d.inverse
    checks = []

    checks.append(StructureCheck("reaction_count", net.n_reactions == src.n_reactions,
                                 f"{net.n_reactions} vs {src.n_reactions}"))
    same_species = net.species == src.species
    checks.append(StructureCheck("species", same_species))
    if net.n_reactions != src.n_reactions or not same_species:
        return StructureRelation(tuple(checks))

    reactants_kept = all(a.reactant == b.reactant for a, b in zip(src.reactions, net.reactions))
    checks.append(StructureCheck("reactants_preserved", reactants_kept))

    bad_cols = []
    for i, (a, b) in enumerate(zip(src.reactions, net.reactions), start=1):
        expected = tuple(di * g for di, g in zip(inv, a.reaction_vector))
        if b.reaction_vector != expected:
            bad_cols.append(i)
    checks.append(StructureCheck("gamma_is_Dinv_gamma", not bad_cols,
                                 f"mismatched columns {bad_cols}" if bad_cols else ""))

    src_cols = [a.reaction_vector for a in src.reactions]
    scaled = [tuple(di * g for di, g in zip(inv, col)) for col in src_cols]
    cbp_cols = [b.reaction_vector for b in net.reactions]
    checks.append(StructureCheck("subspace_is_Dinv_subspace", linalg.same_span(cbp_cols, scaled),
                                 f"rank {linalg.rank(cbp_cols)}"))

    rate_bad = []
    for i, (a, b) in enumerate(zip(src.reactions, net.reactions), start=1):
        expected = _transformed_rate(a, d)
        if isinstance(expected, Fraction) and b.exact_rate is not None:
            ok = b.exact_rate == expected
        else:
            ok = math.isclose(b.rate, float(expected), rel_tol=1e-12)
        if not ok:
            rate_bad.append(i)
    checks.append(StructureCheck("rate_rule", not rate_bad,
                                 f"mismatched rates {rate_bad}" if rate_bad else ""))
    return StructureRelation(tuple(checks))


def map_equilibrium(x: Sequence, d: ProducingMatrix, direction: Direction) -> tuple | np.ndarray:
    """Transport a state between source and generated coordinates.

    ``TO_CBP`` divides by ``d``, ``TO_SOURCE`` multiplies. Exact (Fraction)
    input gives exact output.
    """
    if len(x) != len(d):
        raise DimensionMismatch(f"state has {len(x)} entries, producing matrix {len(d)}")
    exact = all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in x)
    if exact:
        if direction is Direction.TO_CBP:
            return tuple(Fraction(v) / dj for v, dj in zip(x, d.diag))
        return tuple(Fraction(v) * dj for v, dj in zip(x, d.diag))
    xf = np.asarray(x, dtype=float)
    df = d.as_floats()
    return xf / df if direction is Direction.TO_CBP else xf * df


def networks_match(a: Network, b: Network, rel_tol: float = 1e-12) -> bool:
    """Structural equality with rates compared exactly when both are exact."""
    if a.species != b.species or a.n_reactions != b.n_reactions:
        return False
    for ra, rb in zip(a.reactions, b.reactions):
        if ra.reactant != rb.reactant or ra.product != rb.product:
            return False
        if ra.exact_rate is not None and rb.exact_rate is not None:
            if ra.exact_rate != rb.exact_rate:
                return False
        elif not math.isclose(ra.rate, rb.rate, rel_tol=rel_tol):
            return False
    return True
