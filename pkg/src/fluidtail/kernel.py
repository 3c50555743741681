"""Kernel of the transform identity: quadratic in z, its branches and companions.

The stationary transforms are coupled through the bivariate quadratic

    K(alpha, z) = -lam*z**2 + (-alpha*r + lam + c*mu)*z - c*mu,

together with three fixed coefficient polynomials.  For each alpha off the
discriminant cut, K(alpha, .) has a small root (modulus) and a large root;
only the small root enters the analytic continuation of the transforms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import BranchCutError, PoleError
from .model import ModelParams

# relative thresholds for branch handling
_CUT_IM_TOL = 1e-12       # how close to the real axis counts as "on the axis"
_DOUBLE_ROOT_TOL = 1e-14  # |disc| below this (relative) collapses to the double root


@dataclass(frozen=True)
class BranchPoints:
    """The two positive zeros of the kernel discriminant."""

    alpha1: float
    alpha2: float


def kernel(params: ModelParams, alpha: complex, z: complex) -> complex:
    """Evaluate K(alpha, z) = -lam z^2 + (-alpha r + lam + c mu) z - c mu."""
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    return -lam * z * z + (-alpha * r + lam + c * mu) * z - c * mu


def kernel_discriminant(params: ModelParams, alpha: complex) -> complex:
    """Discriminant of K(alpha, .) as a quadratic in z."""
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    b = -alpha * r + lam + c * mu
    return b * b - 4.0 * c * lam * mu


def branch_points(params: ModelParams) -> BranchPoints:
    """Zeros alpha1 < alpha2 of the discriminant; both are positive."""
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    return BranchPoints(
        alpha1=(math.sqrt(c * mu) - math.sqrt(lam)) ** 2 / r,
        alpha2=(math.sqrt(c * mu) + math.sqrt(lam)) ** 2 / r,
    )


def _branch_pair(params: ModelParams, alpha: complex):
    """(small, large) kernel roots at alpha, rejecting the open cut."""
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    b = -alpha * r + lam + c * mu
    disc = b * b - 4.0 * c * lam * mu
    scale = abs(b) ** 2 + 4.0 * c * lam * mu
    if abs(disc) < _DOUBLE_ROOT_TOL * scale:
        # double root: -b/(2a) with a = -lam
        zz = b / (2.0 * lam)
        return zz, zz
    bp = branch_points(params)
    a_scale = max(1.0, abs(alpha))
    if abs(complex(alpha).imag) <= _CUT_IM_TOL * a_scale:
        x = complex(alpha).real
        if bp.alpha1 < x < bp.alpha2:
            raise BranchCutError(
                f"alpha={alpha} lies on the discriminant cut [{bp.alpha1}, {bp.alpha2}]"
            )
    root = cmath.sqrt(disc)
    # continuity across Re(alpha) = (lam + c*mu)/r requires swapping the sign
    # of the principal square root on the far side
    if complex(alpha).real > (lam + c * mu) / r:
        z_small = (b + root) / (2.0 * lam)
        z_large = (b - root) / (2.0 * lam)
    else:
        z_small = (b - root) / (2.0 * lam)
        z_large = (b + root) / (2.0 * lam)
    return z_small, z_large


def branch_small(params: ModelParams, alpha: complex) -> complex:
    """Small-modulus root of K(alpha, .) = 0, analytic off the cut.

    Real alpha in (0, alpha1) give real values increasing from 1 at alpha=0
    to sqrt(c*mu/lam) at the branch point.
    """
    return _branch_pair(params, alpha)[0]


def branch_large(params: ModelParams, alpha: complex) -> complex:
    """Large-modulus root of K(alpha, .) = 0."""
    return _branch_pair(params, alpha)[1]


def alpha_of_z(params: ModelParams, z: complex) -> complex:
    """The unique alpha with K(alpha, z) = 0; pole at z = 0."""
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    if abs(z) < 1e-300:
        raise PoleError("alpha_of_z has a pole at z = 0")
    return (-lam * z * z + (lam + c * mu) * z - c * mu) / (z * r)


def mass_coeff(params: ModelParams, z: complex) -> complex:
    """Coefficient of the lowest boundary mass: mu*z^c - c*mu*z^(c-1)."""
    c, mu = params.c, params.mu
    return mu * z ** c - c * mu * z ** (c - 1)


def mass_coeff_dz(params: ModelParams, z: complex) -> complex:
    c, mu = params.c, params.mu
    return c * mu * z ** (c - 1) - c * (c - 1) * mu * z ** (c - 2)


def density_coeff(params: ModelParams, alpha: complex, z: complex) -> complex:
    """Coefficient of the lowest free density transform:
    (mu - alpha*r - alpha)*z^c - c*mu*z^(c-1)."""
    c, mu, r = params.c, params.mu, params.r
    return (mu - alpha * r - alpha) * z ** c - c * mu * z ** (c - 1)


def boundary_coeff(params: ModelParams, z: complex) -> complex:
    """Coefficient of the boundary generating function:
    lam*z^2 - (lam + c*mu)*z + c*mu."""
    c, lam, mu = params.c, params.lam, params.mu
    return lam * z * z - (lam + c * mu) * z + c * mu


def boundary_coeff_dz(params: ModelParams, z: complex) -> complex:
    c, lam, mu = params.c, params.lam, params.mu
    return 2.0 * lam * z - (lam + c * mu)
