"""Iterated substitution in intuitionistic propositional logic."""

from .formula import (BOT, TOP, And, Bottom, Formula, Iff, Implies, Not, Or, ParseError, Var,
                      degree, iterate_formula, parse, substitute, to_text)
from .prover import countermodel, equiv_ipc, prove_cpc, prove_ipc

__all__ = [
    "BOT", "TOP", "And", "Bottom", "Formula", "Iff", "Implies", "Not", "Or", "ParseError",
    "Var", "degree", "iterate_formula", "parse", "substitute", "to_text",
    "countermodel", "equiv_ipc", "prove_cpc", "prove_ipc",
]

__version__ = "0.1.0"
