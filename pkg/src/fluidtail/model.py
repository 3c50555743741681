"""Model parameters, background-chain stationary law, stability, drift certificate.

The background process is the queue-length chain of an M/M/c queue (arrivals
at rate ``lam``, per-server rate ``mu``).  The fluid level drains at rate
``i - c`` while ``i < c`` servers are busy and fills at rate ``r`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import CertificateNotFoundError, UnstableModelError


@dataclass(frozen=True)
class ModelParams:
    """Immutable parameter tuple (c, lam, mu, r)."""

    c: int
    lam: float
    mu: float
    r: float

    def __post_init__(self):
        if int(self.c) != self.c or self.c < 1:
            raise ValueError(f"c must be a positive integer, got {self.c!r}")
        object.__setattr__(self, "c", int(self.c))
        for name in ("lam", "mu", "r"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
            object.__setattr__(self, name, v)

    @property
    def ergodic(self) -> bool:
        """Whether the background chain has a stationary distribution."""
        return self.lam < self.c * self.mu

    def net_rate(self, i: int) -> float:
        """Net input rate of the fluid level while the chain sits in phase i."""
        return float(i - self.c) if i < self.c else self.r

    def net_rates(self, n: int) -> np.ndarray:
        """Net input rates for phases 0..n-1."""
        i = np.arange(n)
        return np.where(i < self.c, (i - self.c).astype(float), self.r)


class PhaseDistribution:
    """Stationary distribution of the M/M/c queue-length chain.

    Probabilities are evaluated from the closed form, in log space so that
    large ``c`` does not overflow the factorials.  Beyond phase ``c`` the
    distribution is exactly geometric with ratio ``lam / (c*mu)``.
    """

    def __init__(self, params: ModelParams):
        if not params.ergodic:
            raise UnstableModelError(
                f"background chain not ergodic: lam={params.lam} >= c*mu={params.c * params.mu}"
            )
        self.params = params
        self.rho = params.lam / params.mu
        self.tail_ratio = params.lam / (params.c * params.mu)
        c, log_rho = params.c, math.log(self.rho)
        i = np.arange(c)
        log_terms = i * log_rho - gammaln(i + 1)
        log_last = c * log_rho - gammaln(c) - math.log(c - self.rho)
        self._log_xi0 = -_logsumexp(np.append(log_terms, log_last))

    def prob(self, i: int) -> float:
        """Stationary probability of phase i."""
        c, log_rho = self.params.c, math.log(self.rho)
        if i < 0:
            return 0.0
        if i <= c:
            return math.exp(self._log_xi0 + i * log_rho - float(gammaln(i + 1)))
        return self.prob(c) * self.tail_ratio ** (i - c)

    def probs(self, n: int) -> np.ndarray:
        """Vector of stationary probabilities for phases 0..n-1."""
        c, log_rho = self.params.c, math.log(self.rho)
        i = np.arange(n)
        head = self._log_xi0 + i * log_rho - gammaln(i + 1)
        out = np.exp(head)
        if n > c + 1:
            j = np.arange(c + 1, n)
            out[c + 1:] = self.prob(c) * self.tail_ratio ** (j - c)
        return out

    def tail_mass(self, i0: int) -> float:
        """Closed-form mass of phases >= i0 (requires i0 >= c)."""
        if i0 < self.params.c:
            raise ValueError("tail_mass needs i0 >= c; sum the head explicitly")
        return self.prob(i0) / (1.0 - self.tail_ratio)

    def mean_drift(self) -> float:
        """Stationary mean net input rate; negative iff the level is stable."""
        c, r = self.params.c, self.params.r
        head = self.probs(c)
        drift = float(np.dot(head, np.arange(c) - c))
        return drift + r * self.tail_mass(c)


def phase_stationary(params: ModelParams) -> PhaseDistribution:
    """Stationary law of the background chain; raises if lam >= c*mu."""
    return PhaseDistribution(params)


@dataclass(frozen=True)
class StabilityReport:
    """Verdict on stationarity of the fluid level, with both certificates."""

    stable: bool
    lhs: float          # (r+1)*lam
    rhs: float          # closed-form bound (may be inf for large c)
    mean_drift: float   # sum_i xi_i * r_i

    def __bool__(self) -> bool:
        return self.stable


def is_stable(params: ModelParams) -> StabilityReport:
    """Check the stationarity condition for the fluid level.

    Returns both sides of the closed-form inequality
    (r+1)lam < c*mu + (c*mu - lam) * sum_{i<c-1} (c-i) lam^{i+1-c} (c-1)! / (mu^{i+1-c} i!)
    together with the equivalent mean-drift value.  Equality is classified
    as unstable (the mean drift must be strictly negative).
    """
    if not params.ergodic:
        raise UnstableModelError(
            f"background chain not ergodic: lam={params.lam} >= c*mu={params.c * params.mu}"
        )
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    lhs = (r + 1.0) * lam
    if c == 1:
        rhs = c * mu
    else:
        i = np.arange(c - 1)
        log_terms = (
            np.log(c - i.astype(float))
            + (i + 1.0 - c) * (math.log(lam) - math.log(mu))
            + gammaln(c)
            - gammaln(i + 1)
        )
        s = math.exp(_logsumexp(log_terms))
        rhs = c * mu + (c * mu - lam) * s
    drift = phase_stationary(params).mean_drift()
    return StabilityReport(stable=bool(lhs < rhs), lhs=lhs, rhs=rhs, mean_drift=drift)


def require_stable(params: ModelParams) -> StabilityReport:
    """is_stable, raising UnstableModelError on a negative verdict."""
    rep = is_stable(params)
    if not rep.stable:
        raise UnstableModelError(
            f"unstable fluid level: (r+1)*lam = {rep.lhs} >= {rep.rhs} (mean drift {rep.mean_drift:+g})"
        )
    return rep


@dataclass(frozen=True)
class DriftCertificate:
    """Witness (alpha, z, s, b) of the exponential drift inequality.

    With V(x, i) = exp(alpha*x) * z**i the extended generator satisfies
    A V <= -s V + b * 1{x = 0, i < c}, which certifies a positive exponential
    moment of the stationary level (decay rate at least alpha).
    """

    alpha: float
    z: float
    s: float
    b: float


def _certificate_margins(params: ModelParams, alpha: float, z: float) -> np.ndarray:
    """All drift margins at (alpha, z); the certificate needs min > 0."""
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    margins = [lam + c * mu - alpha * r - lam * z - c * mu / z]
    for i in range(c):
        margins.append((c - i) * alpha + lam + i * mu - lam * z - i * mu / z)
    return np.asarray(margins)


def _feasible_z_interval(params: ModelParams, alpha: float):
    """Open z-interval where every margin is positive, or None."""
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    b = -alpha * r + lam + c * mu
    disc = b * b - 4.0 * c * lam * mu
    if disc <= 0.0:
        return None
    z_low = (b - math.sqrt(disc)) / (2.0 * lam)
    z_high = (b + math.sqrt(disc)) / (2.0 * lam)
    for i in range(c):
        bi = lam + i * mu + (c - i) * alpha
        disc_i = bi * bi - 4.0 * i * lam * mu
        if disc_i <= 0.0:
            return None
        w_low = (bi - math.sqrt(disc_i)) / (2.0 * lam)
        w_high = (bi + math.sqrt(disc_i)) / (2.0 * lam)
        z_low, z_high = max(z_low, w_low), min(z_high, w_high)
    z_low = max(z_low, 1.0)
    return (z_low, z_high) if z_low < z_high else None


def drift_certificate(params: ModelParams, n_grid: int = 400) -> DriftCertificate:
    """Search for an exponential drift certificate.

    Scans alpha over (0, alpha1), where alpha1 is the branch point of the
    kernel discriminant (feasibility requires the kernel to be positive
    between its roots), takes z at the midpoint of the feasible interval and
    returns the grid point with the largest margin s.  Raises
    CertificateNotFoundError when no (alpha, z) qualifies; this can happen
    for stable parameter tuples with large r and c >= 2, where no certificate
    of this two-parameter form exists.  (r+1)*lam < c*mu guarantees success.
    """
    require_stable(params)
    c, lam, mu, r = params.c, params.lam, params.mu, params.r
    alpha1 = (math.sqrt(c * mu) - math.sqrt(lam)) ** 2 / r
    best = None
    for t in np.linspace(1e-4, 1.0 - 1e-9, n_grid):
        alpha = t * alpha1
        box = _feasible_z_interval(params, alpha)
        if box is None:
            continue
        z = 0.5 * (box[0] + box[1])
        s = float(_certificate_margins(params, alpha, z).min())
        if s > 0.0 and (best is None or s > best.s):
            i = np.arange(c)
            boundary_growth = s - (lam + i * mu - lam * z - i * mu / z)
            b = float(max(0.0, (z ** i * boundary_growth).max()))
            best = DriftCertificate(alpha=alpha, z=z, s=s, b=b)
    if best is None:
        raise CertificateNotFoundError(
            "no (alpha, z) drift certificate of the form exp(alpha*x)*z**i exists "
            f"for c={c}, lam={lam}, mu={mu}, r={r}"
        )
    return best


def _logsumexp(a: np.ndarray) -> float:
    m = float(np.max(a))
    return m + math.log(float(np.sum(np.exp(a - m))))
