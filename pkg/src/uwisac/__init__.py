"""Underwater optical sensing and power-transfer link simulator.

A surface access point illuminates a seabed target and an energy-harvesting
sensor. Cameras on the ship localize the target from reflected light; the
sensor spends harvested energy on an uplink. Ship attitude and log-normal
turbulence make both channels random. The package evaluates closed-form
approximations of sensing MSE and average uplink rate and checks them against
Monte Carlo simulation.
"""
from .config import SystemConfig, load_config
from .energy_rate import EhParams, analytic_rate, monte_carlo_rate
from .errors import (BlockedLinkError, ConfigError, DegenerateGeometryError, DomainError,
                     EstimationError, InvalidRegimeError, QuadratureError)
from .harness import SweepResult, emit_results, load_results, sweep_alpha, sweep_power, sweep_spacing
from .sensing import analytic_mse, monte_carlo_mse

__version__ = "0.1.0"

__all__ = [
    "SystemConfig", "load_config", "EhParams", "analytic_rate", "monte_carlo_rate",
    "analytic_mse", "monte_carlo_mse", "SweepResult", "emit_results", "load_results",
    "sweep_power", "sweep_spacing", "sweep_alpha", "BlockedLinkError", "ConfigError",
    "DegenerateGeometryError", "DomainError", "EstimationError", "InvalidRegimeError",
    "QuadratureError", "__version__",
]
