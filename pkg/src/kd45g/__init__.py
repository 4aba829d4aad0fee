"""Workbench for KD45(G): modal Gödel logic with possibilistic and KD45 Kripke semantics."""

from .algebra import ONE, ZERO, Valuation, godel_consequence, implies, prop_eval, truth
from .formula import BOT, TOP, Formula, parse, to_text
from .models import GKModel, PossModel, is_kd45, load_model
from .search import ModelClass, SearchBounds, find_countermodel, random_countermodel

__all__ = [
    "ONE", "ZERO", "Valuation", "godel_consequence", "implies", "prop_eval", "truth",
    "BOT", "TOP", "Formula", "parse", "to_text",
    "GKModel", "PossModel", "is_kd45", "load_model",
    "ModelClass", "SearchBounds", "find_countermodel", "random_countermodel",
]

__version__ = "0.1.0"
