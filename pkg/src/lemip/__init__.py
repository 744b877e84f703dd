"""Simulation laboratory for locality-explicit multi-prover interactive
proofs: a runtime that enforces communication topology, commitment
schemes over finite fields, the sumcheck protocol for oracle-3-SAT, a
local zero-knowledge variant, PR-local simulators, and the classic
verifier-contamination attacks."""

from .fields import Cnf3, FieldElement, FieldSpec, UnivariatePoly, arithmetize
from .bfl import Oracle3SatInstance
from .runtime import LocalityViolation, Topology, TopologyViolation, build_topology
from .zk_protocol import ZkParams, run_zk_lemip
from .simulators import compare_real_vs_sim, simulate_zk

__all__ = [
    "Cnf3",
    "FieldElement",
    "FieldSpec",
    "LocalityViolation",
    "Oracle3SatInstance",
    "Topology",
    "TopologyViolation",
    "UnivariatePoly",
    "ZkParams",
    "arithmetize",
    "build_topology",
    "compare_real_vs_sim",
    "run_zk_lemip",
    "simulate_zk",
]

__version__ = "0.1.0"
