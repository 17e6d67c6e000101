"""Spectrum and cosine sequence of a strongly regular graph, in exact arithmetic."""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from gmpy2 import mpq

Rational = type(mpq(0))


class InfeasibleParameters(ValueError):
    pass


@dataclass(frozen=True)
class SrgParams:
    v: int
    k: int
    lam: int
    mu: int

    def __post_init__(self) -> None:
        if min(self.v, self.k, self.lam, self.mu) < 0:
            raise ValueError("parameters must be non-negative")
        if not (self.k < self.v and self.lam < self.k and self.mu <= self.k):
            raise ValueError(f"invalid srg parameters {self}")


@dataclass(frozen=True)
class SrgSpectrum:
    k: Rational
    r: Rational
    s: Rational
    f: int
    g: int


@dataclass(frozen=True)
class CosineSequence:
    w0: Rational
    w1: Rational
    w2: Rational


TARGET = SrgParams(85, 14, 3, 2)


def srg_spectrum(p: SrgParams) -> SrgSpectrum:
    disc = (p.lam - p.mu) ** 2 + 4 * (p.k - p.mu)
    root = isqrt(disc)
    if root * root != disc:
        raise InfeasibleParameters(f"infeasible or conference parameters: discriminant {disc} is not a square")
    r = mpq(p.lam - p.mu + root, 2)
    s = mpq(p.lam - p.mu - root, 2)
    skew = mpq(2 * p.k + (p.v - 1) * (p.lam - p.mu), root)
    f = (p.v - 1 - skew) / 2
    g = (p.v - 1 + skew) / 2
    if f.denominator != 1 or g.denominator != 1 or f <= 0 or g <= 0:
        raise InfeasibleParameters(f"infeasible or conference parameters: multiplicities {f}, {g}")
    return SrgSpectrum(mpq(p.k), r, s, int(f), int(g))


def cosine_sequence(p: SrgParams, theta) -> CosineSequence:
    theta = mpq(theta)
    spec = srg_spectrum(p)
    if theta not in (spec.k, spec.r, spec.s):
        raise ValueError(f"{theta} is not an eigenvalue of srg{(p.v, p.k, p.lam, p.mu)}")
    if p.k <= p.lam + 1:
        raise ValueError("cosine sequence needs k > lambda + 1")
    w1 = theta / p.k
    w2 = (theta * theta - p.lam * theta - p.k) / (p.k * (p.k - p.lam - 1))
    return CosineSequence(mpq(1), w1, w2)


def gram_value(relation: str, cs: CosineSequence) -> Rational:
    """Dot product of two representing unit vectors: 'same', 'adjacent' or 'nonadjacent'."""
    if relation == "same":
        return cs.w0
    if relation == "adjacent":
        return cs.w1
    if relation == "nonadjacent":
        return cs.w2
    raise ValueError(f"unknown relation {relation!r}")


# The working representation: theta = 4 on srg(85,14,3,2).
COSINES = cosine_sequence(TARGET, 4)
ONE = COSINES.w0
ADJ = COSINES.w1
NONADJ = COSINES.w2
EMBED_DIM = srg_spectrum(TARGET).f
