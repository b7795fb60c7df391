"""Exploration strategies for Q-ensembles on a deterministic pixel gridworld."""

from ._core import (
    ConfigParseError,
    ConfigurationError,
    FormatError,
    GridWorld,
    NumericError,
    TrajectoryMemory,
    double_q_target,
    epsilon_schedule,
    frame_kernel,
    load_checkpoint,
    parse_config,
    score_actions,
    select_majority_vote,
    select_ucb,
    train,
    uncertainty_per_action,
    uncertainty_value,
)

__all__ = [
    "ConfigParseError",
    "ConfigurationError",
    "FormatError",
    "GridWorld",
    "NumericError",
    "TrajectoryMemory",
    "double_q_target",
    "epsilon_schedule",
    "frame_kernel",
    "load_checkpoint",
    "parse_config",
    "score_actions",
    "select_majority_vote",
    "select_ucb",
    "train",
    "uncertainty_per_action",
    "uncertainty_value",
]
