"""
Exact reference solvers.
"""
from .brute_force import (
        ExactResult, TooLarge, brute_force, enumerate_selections, selection_count)
from .branch_and_bound import branch_and_bound, branching_index
