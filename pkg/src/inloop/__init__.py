"""Simulation and analysis of a two-level atom driven by in-loop squeezed light.

The package covers the full chain from the classical electro-optic feedback
loop to the atomic response:

- `inloop.bloch`: exact single-qubit algebra (states, operators, and the
  damping / conditioning / rotation superoperators in Bloch form);
- `inloop.loop`: loop filters, transfer functions, stability, in-loop and
  photocurrent spectra, optimal gain, and a Monte Carlo loop simulator;
- `inloop.feedback`: the Markovian feedback master equation, its decay
  rates, steady state and exact propagation;
- `inloop.squeezed_bath`: the free broad-band squeezed bath used for
  comparison, with the (N, M) parameter conversion;
- `inloop.spectra`: dipole correlation functions and fluorescence power
  spectra by quantum regression, analytic and numerical routes;
- `inloop.trajectories`: conditioned stochastic trajectories with explicit
  feedback delay, deterministic ensembles, and decay-rate fitting;
- `inloop.cli`: the `inloop` command-line front end.

Times and frequencies are in units of the atomic lifetime throughout.
"""

from .bloch import AtomOperator, AtomState
from .errors import ConfigError, InstabilityError, ParameterError, StepSizeError
from .feedback import (
    FeedbackGenerator,
    RateSet,
    build_generator,
    evolve,
    rates,
    rates_from_squeezing,
    steady_state,
)
from .loop import (
    LoopConfig,
    LoopFilter,
    gain_from_lambda,
    homodyne_spectrum,
    in_loop_spectrum,
    lambda_from_gain,
    optimal_gain,
    simulate_classical_loop,
    squeezing_from_lambda,
    transfer_function,
    welch_spectrum,
)
from .spectra import (
    Spectrum,
    analytic_power_spectrum,
    comparison_report,
    correlation,
    fit_lorentzian_pair,
    numerical_power_spectrum,
    total_flux,
)
from .squeezed_bath import (
    SqueezedBathGenerator,
    build_squeezed_generator,
    free_rates,
    free_steady_state,
    photon_parameters,
)
from .trajectories import (
    EnsembleResult,
    TrajectoryConfig,
    feedback_drive,
    fit_decay_rate,
    mean_current,
    run_ensemble,
    step_conditioned,
)

__version__ = "0.1.0"

__all__ = [
    "AtomOperator",
    "AtomState",
    "ConfigError",
    "EnsembleResult",
    "FeedbackGenerator",
    "InstabilityError",
    "LoopConfig",
    "LoopFilter",
    "ParameterError",
    "RateSet",
    "Spectrum",
    "SqueezedBathGenerator",
    "StepSizeError",
    "TrajectoryConfig",
    "analytic_power_spectrum",
    "build_generator",
    "build_squeezed_generator",
    "comparison_report",
    "correlation",
    "evolve",
    "feedback_drive",
    "fit_decay_rate",
    "fit_lorentzian_pair",
    "free_rates",
    "free_steady_state",
    "gain_from_lambda",
    "homodyne_spectrum",
    "in_loop_spectrum",
    "lambda_from_gain",
    "mean_current",
    "numerical_power_spectrum",
    "optimal_gain",
    "photon_parameters",
    "rates",
    "rates_from_squeezing",
    "run_ensemble",
    "simulate_classical_loop",
    "squeezing_from_lambda",
    "steady_state",
    "step_conditioned",
    "total_flux",
    "transfer_function",
    "welch_spectrum",
]
