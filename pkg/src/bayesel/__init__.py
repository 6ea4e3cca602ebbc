"""Bayesian empirical likelihood: EL solver, MCELE, two-step MH and
reversible-jump model selection."""
from .elcore import ELSolution, SolverOptions, check_feasibility, solve_el
from .errors import (BayesELError, DimensionError, EmptyTrace, InitInfeasible,
                     NonFiniteError, RootNotFound, SamplerAborted, TooShort)
from .estimating import ELModel, ThetaSplit, build_constraints, log_el, log_posterior_unnorm
from .mcele import MceleResult, mcele
from .sampler import Proposal1, Proposal2, Trace, chain_rng, two_step_mh
from .modelselect import ModelTrace, RegressionData, rjmcmc
from .diagnostics import ess, heidelberger_welch, summarize

__version__ = "0.1.0"
