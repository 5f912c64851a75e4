"""Random complex-balanced sources built from reversible cycles, with valid D."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from crnlyap import Network, ProducingMatrix, Reaction, build_network

D_CHOICES = (Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(2), Fraction(3))
X_CHOICES = (Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3))


@dataclass(frozen=True)
class Instance:
    source: Network
    x_star: tuple[Fraction, ...]
    d: ProducingMatrix


def _monomial(x, z):
    out = Fraction(1)
    for xj, zj in zip(x, z):
        out *= xj ** int(zj)
    return out


def _d_ok(dj, column_pairs):
    for v, vp in column_pairs:
        c = v + (vp - v) / dj
        if c < 0 or c.denominator != 1:
            return False
    return True


def random_instance(rng: random.Random, max_species: int = 4) -> Instance:
    n = rng.randint(1, max_species)
    length = rng.randint(2, 3)
    seen = set()
    while len(seen) < length:
        seen.add(tuple(rng.randint(0, 2) for _ in range(n)))
    cycle = list(seen)
    rng.shuffle(cycle)
    x_star = tuple(rng.choice(X_CHOICES) for _ in range(n))

    reactions = []
    fwd = Fraction(rng.randint(1, 4))
    back = Fraction(rng.randint(0, 3))
    for a, b in zip(cycle, cycle[1:] + cycle[:1]):
        reactions.append(Reaction.make(a, b, fwd / _monomial(x_star, a)))
        if back and length > 2:
            reactions.append(Reaction.make(b, a, back / _monomial(x_star, b)))
    species = [f"X{j + 1}" for j in range(n)]
    src = build_network(species, reactions)

    diag = []
    for j in range(n):
        pairs = [(rx.reactant[j], rx.product[j]) for rx in src.reactions]
        diag.append(rng.choice([dj for dj in D_CHOICES if _d_ok(dj, pairs)]))
    return Instance(src, x_star, ProducingMatrix(tuple(diag)))


def instances(count: int, seed: int = 2024) -> list[Instance]:
    rng = random.Random(seed)
    return [random_instance(rng) for _ in range(count)]
