"""Physical parameters and constant equilibrium states.

Pressure law is ``p(rho) = rho**gamma``. Everything derived from an
equilibrium (sound speed squared, the subsonicity margin ``alpha_star``
and its negative ``beta_star``) is computed once, at construction, so all
modules see bit-identical constants.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

SONIC_RTOL = 1e-12


class Regime(str, enum.Enum):
    SUBSONIC = "Subsonic"
    SONIC = "Sonic"
    SUPERSONIC = "Supersonic"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ModelParams:
    """Adiabatic exponent, viscosity and dispersion coefficient."""

    gamma: float
    mu: float
    k: float

    def __post_init__(self):
        for name in ("gamma", "mu", "k"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
        if not self.gamma > 1.0:
            raise DomainError(f"gamma must exceed 1, got {self.gamma!r}")
        if not self.mu > 0.0:
            raise DomainError(f"mu must be positive, got {self.mu!r}")
        if not self.k > 0.0:
            raise DomainError(f"k must be positive, got {self.k!r}")


def _require_positive(rho):
    if not np.all(np.asarray(rho) > 0):
        raise DomainError(f"density must be positive, got {rho!r}")


def pressure(params: ModelParams, rho):
    """Return ``rho**gamma``; raises DomainError for ``rho <= 0``."""
    _require_positive(rho)
    return rho ** params.gamma


def pressure_derivative(params: ModelParams, rho):
    """Return ``p'(rho) = gamma * rho**(gamma - 1)``."""
    _require_positive(rho)
    return params.gamma * rho ** (params.gamma - 1.0)


@dataclass(frozen=True)
class EquilibriumState:
    """A constant state ``(rho_star, m_star)`` with its derived constants.

    Build instances with :func:`classify_equilibrium`.
    """

    params: ModelParams
    rho_star: float
    m_star: float
    p_prime_star: float
    alpha_star: float
    beta_star: float
    regime: Regime
    # mean velocity m*/rho*, cached because nearly every symbol uses it
    u_star: float = field(repr=False, default=0.0)

    @property
    def gamma(self):
        return self.params.gamma

    @property
    def mu(self):
        return self.params.mu

    @property
    def k(self):
        return self.params.k

    @property
    def is_subsonic(self):
        return self.regime is Regime.SUBSONIC


def classify_equilibrium(params: ModelParams, rho_star, m_star) -> EquilibriumState:
    """Compute derived constants and the flow regime of an equilibrium.

    The state is Sonic when ``|alpha_star| <= 1e-12 * max(1, p'(rho_star))``;
    otherwise the sign of ``alpha_star = p'(rho*) - m*^2/rho*^2`` decides.
    """
    rho_star = float(rho_star)
    m_star = float(m_star)
    if not (math.isfinite(rho_star) and rho_star > 0):
        raise DomainError(f"rho_star must be positive, got {rho_star!r}")
    if not math.isfinite(m_star):
        raise DomainError(f"m_star must be finite, got {m_star!r}")
    pp = pressure_derivative(params, rho_star)
    u = m_star / rho_star
    alpha = pp - u * u
    if abs(alpha) <= SONIC_RTOL * max(1.0, pp):
        regime = Regime.SONIC
    elif alpha > 0:
        regime = Regime.SUBSONIC
    else:
        regime = Regime.SUPERSONIC
    return EquilibriumState(
        params=params,
        rho_star=rho_star,
        m_star=m_star,
        p_prime_star=pp,
        alpha_star=alpha,
        beta_star=-alpha,
        regime=regime,
        u_star=u,
    )


def equilibrium(gamma=2.0, rho_star=1.0, m_star=1.0, mu=1.0, k=1.0) -> EquilibriumState:
    """Shorthand for ``classify_equilibrium(ModelParams(gamma, mu, k), ...)``."""
    return classify_equilibrium(ModelParams(gamma, mu, k), rho_star, m_star)
