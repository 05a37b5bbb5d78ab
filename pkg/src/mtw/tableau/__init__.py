"""Consistency-property engine: a saturation prover whose open saturated
branches are downward-saturated witness-complete sentence sets, a condition
checker for those sets, and the canonical quotient term model."""

from .hintikka import HintikkaSet, check_hintikka, term_model  # noqa: F401
from .prover import (  # noqa: F401
    Closed, ProofStep, ProofTree, ProverBounds, Satisfiable, TableauVerdict,
    Unknown, format_proof, prove, replay_proof,
)
