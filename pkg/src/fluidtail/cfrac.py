"""Continued-fraction fold of the low-phase balance equations.

Phases 0..c-2 of the transformed balance system are eliminated through a
chain of rational functions A_0..A_{c-2},

    A_i(alpha) = (i+1)*mu / ((c-i)*alpha + lam + i*mu - lam*A_{i-1}(alpha)),

with A_{-1} = 0.  Note the net-rate weight (c-i) on alpha: each low phase
drains the level at its own speed, and the weight is what the transform of
its balance equation actually produces.  The fold turns the kernel identity
into one with a single free density transform (phase c-1) and a known
forcing term built from the boundary masses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import PoleError
from .kernel import density_coeff, mass_coeff, mass_coeff_dz
from .model import ModelParams


@dataclass(frozen=True)
class RationalFn:
    """Ratio of two real-coefficient polynomials (ascending coefficients)."""

    num: tuple
    den: tuple

    def __call__(self, x):
        n = npoly.polyval(x, np.asarray(self.num))
        d = npoly.polyval(x, np.asarray(self.den))
        scale = np.max(np.abs(self.den)) * max(1.0, abs(x)) ** self.den_degree
        if np.min(np.abs(d)) < 1e-14 * scale:
            raise PoleError(f"rational function evaluated at a pole: x={x}")
        return n / d

    @property
    def num_degree(self) -> int:
        return len(self.num) - 1

    @property
    def den_degree(self) -> int:
        return len(self.den) - 1

    def den_roots(self) -> np.ndarray:
        return npoly.polyroots(np.asarray(self.den))


@lru_cache(maxsize=128)
def ratio_chain(params: ModelParams) -> tuple:
    """The chain A_0..A_{c-2} as reduced rational functions (empty for c=1).

    Built by clearing denominators step by step; numerator degree i and
    denominator degree i+1 hold by construction and are asserted.
    """
    c, lam, mu = params.c, params.lam, params.mu
    num, den = np.array([0.0]), np.array([1.0])
    chain = []
    for i in range(c - 1):
        lead = np.array([lam + i * mu, float(c - i)])
        num, den = (i + 1) * mu * den, npoly.polysub(npoly.polymul(lead, den), lam * num)
        assert len(num) - 1 == i and len(den) - 1 == i + 1
        chain.append(RationalFn(num=tuple(num), den=tuple(den)))
    return tuple(chain)


def ratio_chain_value(params: ModelParams, alpha):
    """Evaluate the full chain at one point by direct recursion.

    Numerically self-correcting (no polynomial coefficients involved), so it
    is the preferred form for polishing zeros; returns A_{c-2}(alpha), or 0
    for c = 1.
    """
    c, lam, mu = params.c, params.lam, params.mu
    a = 0.0
    for i in range(c - 1):
        den = (c - i) * alpha + lam + i * mu - lam * a
        if abs(den) < 1e-300:
            raise PoleError(f"chain recursion hit a pole at alpha={alpha}")
        a = (i + 1) * mu / den
    return a


@dataclass(frozen=True)
class BoundaryVector:
    """Stationary masses at level zero for the draining phases 0..c-1.

    Phases with positive net rate carry no mass at zero, so this vector plus
    the phase distribution determines every boundary quantity.
    """

    masses: tuple
    source: str = "user-supplied"

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.ndim != 1 or m.size < 1:
            raise ValueError("masses must be a nonempty 1-d sequence")
        if np.any(m < -1e-10):
            raise ValueError(f"negative boundary mass: {m.min()}")
        object.__setattr__(self, "masses", tuple(np.maximum(m, 0.0)))

    def __getitem__(self, i: int) -> float:
        return self.masses[i]

    def __len__(self) -> int:
        return len(self.masses)


def source_constants(params: ModelParams, boundary: BoundaryVector) -> np.ndarray:
    """Inhomogeneous constants k_0..k_{c-2} of the folded system (c >= 2)."""
    c, lam, mu = params.c, params.lam, params.mu
    p = boundary.masses
    k = np.empty(c - 1)
    k[0] = mu * p[1] - lam * p[0]
    for i in range(1, c - 1):
        k[i] = lam * p[i - 1] - (lam + i * mu) * p[i] + (i + 1) * mu * p[i + 1]
    return k


def _chain_values(params: ModelParams, alpha, chain=None):
    if chain is None:
        chain = ratio_chain(params)
    return [a(alpha) for a in chain]


def density_coeff_reduced(params: ModelParams, alpha, z, chain=None):
    """Folded coefficient of the phase-(c-1) density transform.

    Equals lam*z^c*A_{c-2}(alpha) + density_coeff(alpha, z); for c = 1 the
    fold is empty and this is density_coeff itself.
    """
    c, lam = params.c, params.lam
    base = density_coeff(params, alpha, z)
    if c == 1:
        return base
    return lam * z ** c * _chain_values(params, alpha, chain)[-1] + base


def density_coeff_reduced_dz(params: ModelParams, alpha, z, chain=None):
    """Exact z-derivative of density_coeff_reduced."""
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    head = (mu - alpha * r - alpha) * c * z ** (c - 1) - c * (c - 1) * mu * z ** (c - 2)
    if c == 1:
        return head
    return lam * c * z ** (c - 1) * _chain_values(params, alpha, chain)[-1] + head


def forcing_reduced(params: ModelParams, boundary: BoundaryVector, alpha, z, chain=None):
    """Known forcing term of the folded identity (linear in the boundary masses)."""
    c, lam, mu = params.c, params.lam, params.mu
    p = boundary.masses
    if c == 1:
        return mass_coeff(params, z) * p[0]
    k = source_constants(params, boundary)
    a_vals = _chain_values(params, alpha, chain)
    acc = 0.0
    for n in range(c - 1):
        prod = 1.0
        for m in range(n, c - 1):
            prod *= a_vals[m] / ((m + 1) * mu)
        acc += k[n] * lam ** (c - 2 - n) * prod
    return mass_coeff(params, z) * p[c - 1] + lam * z ** c * (p[c - 2] + acc)


def forcing_reduced_dz(params: ModelParams, boundary: BoundaryVector, alpha, z, chain=None):
    """Exact z-derivative of forcing_reduced."""
    c, lam, mu = params.c, params.lam, params.mu
    p = boundary.masses
    if c == 1:
        return mass_coeff_dz(params, z) * p[0]
    k = source_constants(params, boundary)
    a_vals = _chain_values(params, alpha, chain)
    acc = 0.0
    for n in range(c - 1):
        prod = 1.0
        for m in range(n, c - 1):
            prod *= a_vals[m] / ((m + 1) * mu)
        acc += k[n] * lam ** (c - 2 - n) * prod
    return mass_coeff_dz(params, z) * p[c - 1] + lam * c * z ** (c - 1) * (p[c - 2] + acc)


def boundary_gf(params: ModelParams, boundary: BoundaryVector, z):
    """Generating function of the boundary masses over phases >= c-1.

    Only phase c-1 contributes (higher phases have no mass at level zero),
    so this is the monomial masses[c-1] * z^(c-1).
    """
    c = params.c
    return boundary.masses[c - 1] * z ** (c - 1)


def boundary_gf_dz(params: ModelParams, boundary: BoundaryVector, z):
    c = params.c
    if c == 1:
        return 0.0 * z
    return (c - 1) * boundary.masses[c - 1] * z ** (c - 2)


@dataclass(frozen=True)
class PhaseChainLink:
    """One step of the downward chain phi_i = offset_i + A_i * phi_{i+1}."""

    phase: int
    ratio: RationalFn
    offset: Callable = field(compare=False)


def lower_phase_chain(params: ModelParams, boundary: BoundaryVector) -> list:
    """Links expressing each low-phase transform through the next one up.

    For 0 <= i <= c-2 the transform of phase i equals
    offset_i(alpha) + A_i(alpha) * (transform of phase i+1), where offset_i
    collects the boundary source constants.  Empty for c = 1.
    """
    c, lam, mu = params.c, params.lam, params.mu
    chain = ratio_chain(params)
    if c == 1:
        return []
    k = source_constants(params, boundary)

    def make_offset(i):
        def offset(alpha):
            a_vals = _chain_values(params, alpha, chain)
            acc = 0.0
            for n in range(i + 1):
                prod = 1.0
                for m in range(n, i + 1):
                    prod *= a_vals[m] / ((m + 1) * mu)
                acc += k[n] * lam ** (i - n) * prod
            return acc

        return offset

    return [PhaseChainLink(phase=i, ratio=chain[i], offset=make_offset(i)) for i in range(c - 1)]
