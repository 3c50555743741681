"""Tail asymptotics of a fluid queue driven by an M/M/c background chain.

Analytic pipeline (kernel branches, continued-fraction fold, zero hunting,
tail constants) plus two independent desk-scale oracles: a truncated-phase
spectral solver and an event-driven Monte Carlo simulator.
"""

from .asymptotics import (
    TailCase,
    TailReport,
    analyze,
    boundary_mass_tail,
    classify,
    joint_tail,
    lower_phase_tail,
    marginal_tail,
)
from .cfrac import BoundaryVector, RationalFn, ratio_chain
from .errors import (
    AssumptionViolatedError,
    BranchCutError,
    CertificateNotFoundError,
    FluidTailError,
    InsufficientSamplesError,
    PoleError,
    UnstableModelError,
)
from .kernel import BranchPoints, branch_large, branch_points, branch_small, kernel
from .model import (
    DriftCertificate,
    ModelParams,
    PhaseDistribution,
    StabilityReport,
    drift_certificate,
    is_stable,
    phase_stationary,
)
from .roots import CoeffZero, find_coeff_zero, rationalized_zero_poly
from .simulate import SimConfig, SurvivalEstimate, fit_tail, simulate
from .spectral import SpectralSolution, fit_decay, solve_truncated

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolatedError",
    "BoundaryVector",
    "BranchCutError",
    "BranchPoints",
    "CertificateNotFoundError",
    "CoeffZero",
    "DriftCertificate",
    "FluidTailError",
    "InsufficientSamplesError",
    "ModelParams",
    "PhaseDistribution",
    "PoleError",
    "RationalFn",
    "SimConfig",
    "SpectralSolution",
    "StabilityReport",
    "SurvivalEstimate",
    "TailCase",
    "TailReport",
    "UnstableModelError",
    "analyze",
    "boundary_mass_tail",
    "branch_large",
    "branch_points",
    "branch_small",
    "classify",
    "drift_certificate",
    "find_coeff_zero",
    "fit_decay",
    "fit_tail",
    "is_stable",
    "joint_tail",
    "kernel",
    "lower_phase_tail",
    "marginal_tail",
    "phase_stationary",
    "ratio_chain",
    "rationalized_zero_poly",
    "simulate",
    "solve_truncated",
]
