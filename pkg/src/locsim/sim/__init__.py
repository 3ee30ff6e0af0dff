"""Ground-truth simulation, Monte Carlo runner and command-line interface."""

from locsim.sim.config import TrialConfig, load_config, paper_fig2_config
from locsim.sim.runner import ErrorTrace, MonteCarloResult, run_monte_carlo, run_trial, write_outputs
from locsim.sim.truth import NoiseStreams, Pose2, sense, truth_step

__all__ = [
    "ErrorTrace",
    "MonteCarloResult",
    "NoiseStreams",
    "Pose2",
    "TrialConfig",
    "load_config",
    "paper_fig2_config",
    "run_monte_carlo",
    "run_trial",
    "sense",
    "truth_step",
    "write_outputs",
]
