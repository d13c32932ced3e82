"""Decay-structure lab for the 1D viscous quantum hydrodynamics system.

Modules: ``model`` (parameters and equilibria), ``symbol`` (dispersion and
dissipative structure), ``linear`` (exact mode evolution and decay rates),
``solver`` (nonlinear periodic runs), ``oracle`` (independent references),
``acceptance`` and ``cli``.
"""
from .errors import AccuracyError, DomainError, QHDError, SolverAbort, UnsupportedRegimeError
from .kernels import BACKEND
from .model import EquilibriumState, ModelParams, Regime, classify_equilibrium, equilibrium

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "BACKEND", "DomainError", "EquilibriumState", "ModelParams", "QHDError",
    "Regime", "SolverAbort", "UnsupportedRegimeError", "classify_equilibrium", "equilibrium",
]
