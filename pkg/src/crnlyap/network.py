"""Reaction network representation and structural analysis.

A network is the quadruple of species, complexes, reactions and rate
constants. Stoichiometry is exact (:class:`fractions.Fraction`); only rate
constants and concentrations are floating point.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    DuplicateSpecies,
    NegativeCoefficient,
    NonpositiveRate,
    SelfLoopReaction,
)

Complexus = tuple[Fraction, ...]


def complexus(coefficients: Iterable) -> Complexus:
    """Build a complex from any iterable of exact-convertible numbers."""
    return tuple(linalg.as_fraction(c) for c in coefficients)


def format_number(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_complex(species: Sequence[str], z: Complexus) -> str:
    terms = []
    for name, c in zip(species, z):
        if c == 0:
            continue
        terms.append(name if c == 1 else f"{format_number(c)} {name}")
    return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class Reaction:
    """One reaction ``reactant -> product`` with mass-action rate constant.

    ``exact_rate`` keeps the rational value when the constant was given
    exactly; ``rate`` is always its float value.
    """

    reactant: Complexus
    product: Complexus
    rate: float
    exact_rate: Fraction | None = None

    @classmethod
    def make(cls, reactant: Iterable, product: Iterable, k) -> "Reaction":
        if isinstance(k, (int, Fraction)) and not isinstance(k, bool):
            exact = Fraction(k)
            return cls(complexus(reactant), complexus(product), float(exact), exact)
        if isinstance(k, str):
            exact = Fraction(k.strip())
            return cls(complexus(reactant), complexus(product), float(exact), exact)
        return cls(complexus(reactant), complexus(product), float(k), None)

    @property
    def reaction_vector(self) -> Complexus:
        return tuple(b - a for a, b in zip(self.reactant, self.product))


@dataclass(frozen=True)
class StructureSummary:
    stoich_matrix: tuple[tuple[Fraction, ...], ...]  # n rows, r columns
    stoich_rank: int
    subspace_basis: tuple[Complexus, ...]
    orthogonal_basis: tuple[Complexus, ...]
    num_complexes: int
    num_linkage_classes: int
    deficiency: int
    weakly_reversible: bool

    def to_dict(self) -> dict:
        fmt = lambda vs: [[format_number(q) for q in v] for v in vs]  # noqa: E731
        return {
            "stoich_matrix": fmt(self.stoich_matrix),
            "stoich_rank": self.stoich_rank,
            "subspace_basis": fmt(self.subspace_basis),
            "orthogonal_basis": fmt(self.orthogonal_basis),
            "num_complexes": self.num_complexes,
            "num_linkage_classes": self.num_linkage_classes,
            "deficiency": self.deficiency,
            "weakly_reversible": self.weakly_reversible,
        }


@dataclass(frozen=True)
class Network:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    @cached_property
    def complexes(self) -> tuple[Complexus, ...]:
        """Distinct complexes in order of first appearance."""
        seen: dict[Complexus, None] = {}
        for rx in self.reactions:
            seen.setdefault(rx.reactant, None)
            seen.setdefault(rx.product, None)
        return tuple(seen)

    @cached_property
    def complex_index(self) -> dict[Complexus, int]:
        return {z: i for i, z in enumerate(self.complexes)}

    @cached_property
    def stoich_matrix(self) -> tuple[tuple[Fraction, ...], ...]:
        cols = [rx.reaction_vector for rx in self.reactions]
        return tuple(tuple(col[j] for col in cols) for j in range(self.n_species))

    # float views used by the numerical modules
    @cached_property
    def reactant_matrix(self) -> np.ndarray:
        """n x r float matrix of reactant coefficients."""
        return np.array([[float(c) for c in rx.reactant] for rx in self.reactions]).T.reshape(
            self.n_species, self.n_reactions
        )

    @cached_property
    def gamma(self) -> np.ndarray:
        return np.array([[float(q) for q in row] for row in self.stoich_matrix]).reshape(
            self.n_species, self.n_reactions
        )

    @cached_property
    def rates(self) -> np.ndarray:
        return np.array([rx.rate for rx in self.reactions])

    @cached_property
    def log_rates(self) -> np.ndarray:
        return np.log(self.rates)

    def label(self, z: Complexus) -> str:
        return format_complex(self.species, z)


def build_network(species: Sequence[str], reactions: Sequence[Reaction]) -> Network:
    """Validate and assemble a network."""
    species = tuple(species)
    if not species:
        raise DimensionMismatch("network needs at least one species")
    if not reactions:
        raise DimensionMismatch("network needs at least one reaction")
    seen = set()
    for s in species:
        if s in seen:
            raise DuplicateSpecies(f"species {s!r} declared twice")
        seen.add(s)
    n = len(species)
    for i, rx in enumerate(reactions, start=1):
        if len(rx.reactant) != n or len(rx.product) != n:
            raise DimensionMismatch(f"reaction {i}: complex length does not match {n} species")
        if any(c < 0 for c in rx.reactant + rx.product):
            raise NegativeCoefficient(f"reaction {i}: negative stoichiometric coefficient")
        if rx.reactant == rx.product:
            raise SelfLoopReaction(f"reaction {i}: reactant equals product")
        if not rx.rate > 0 or not np.isfinite(rx.rate):
            raise NonpositiveRate(f"reaction {i}: rate constant must be positive, got {rx.rate}")
    return Network(species, tuple(reactions))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def linkage_classes(net: Network) -> list[list[int]]:
    """Connected components of the undirected complex graph (complex indices)."""
    idx = net.complex_index
    uf = _UnionFind(len(net.complexes))
    for rx in net.reactions:
        uf.union(idx[rx.reactant], idx[rx.product])
    groups: dict[int, list[int]] = {}
    for i in range(len(net.complexes)):
        groups.setdefault(uf.find(i), []).append(i)
    return list(groups.values())


def is_weakly_reversible(net: Network) -> bool:
    # weakly reversible iff each reaction's reactant is reachable from its product
    idx = net.complex_index
    adj: dict[int, set[int]] = {i: set() for i in range(len(net.complexes))}
    for rx in net.reactions:
        adj[idx[rx.reactant]].add(idx[rx.product])
    reach_cache: dict[int, set[int]] = {}

    def reachable(start: int) -> set[int]:
        if start not in reach_cache:
            seen = {start}
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
            reach_cache[start] = seen
        return reach_cache[start]

    return all(idx[rx.reactant] in reachable(idx[rx.product]) for rx in net.reactions)


def structure(net: Network) -> StructureSummary:
    """Stoichiometric matrix, subspace bases, deficiency and linkage facts."""
    gamma = net.stoich_matrix
    subspace = linalg.column_basis(gamma)
    s_rank = len(subspace)
    perp = linalg.orthogonal_complement(subspace, net.n_species)
    n_lc = len(linkage_classes(net))
    n_c = len(net.complexes)
    return StructureSummary(
        stoich_matrix=gamma,
        stoich_rank=s_rank,
        subspace_basis=tuple(subspace),
        orthogonal_basis=tuple(perp),
        num_complexes=n_c,
        num_linkage_classes=n_lc,
        deficiency=n_c - n_lc - s_rank,
        weakly_reversible=is_weakly_reversible(net),
    )


def orthogonal_complement(basis: Sequence[Sequence], n: int | None = None) -> list[Complexus]:
    """Exact basis of the orthogonal complement of ``span(basis)``."""
    return linalg.orthogonal_complement(basis, n)
