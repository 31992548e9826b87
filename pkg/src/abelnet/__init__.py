"""Abelian networks: processors, order-independent execution, and monotone integer programs."""
from .core import (
    Configuration,
    Edge,
    LetterId,
    Network,
    Processor,
    apply_word,
    collapse_subnetwork,
    is_complete,
    is_legal,
    message_count,
    step,
)
from .engine import run, run_all_schedulers, run_parallel, check_least_action
from .optimize import MonotoneProgram, TopplingSystem, kleene_oracle, solve_monotone, solve_toppling_ip
from .verify import check_abelian, check_local_to_global, check_monotone

__version__ = "0.1.0"
