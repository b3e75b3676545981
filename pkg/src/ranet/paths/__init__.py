"""Longest paths: exact profile DP, brute-force oracle, constructive bound."""

from ranet.paths.bruteforce import OracleGuardError, longest_path_bruteforce
from ranet.paths.constructive import XI, constructive_boundary_path, meets_power_bound
from ranet.paths.dp import longest_path_exact
from ranet.paths.experiment import lm_trend_experiment
from ranet.paths.obstruction import check_grandchild_obstruction
from ranet.paths.result import PathResult, check_path

__all__ = [
    "OracleGuardError",
    "PathResult",
    "XI",
    "check_grandchild_obstruction",
    "check_path",
    "constructive_boundary_path",
    "lm_trend_experiment",
    "longest_path_bruteforce",
    "longest_path_exact",
    "meets_power_bound",
]
