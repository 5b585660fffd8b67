"""Finite structures, model checking and model search."""
from .evaluate import compile_formula, evaluate
from .search import (SearchLimitExceeded, brute_force_search, evaluate_partial, ground_atoms,
                     iterate_models, search_normal_form, verify_normal_form_model)
from .structure import Relation, Structure, StructureError, load_structure, save_structure

__all__ = [
    "compile_formula", "evaluate", "SearchLimitExceeded", "brute_force_search", "evaluate_partial",
    "ground_atoms", "iterate_models", "search_normal_form", "verify_normal_form_model", "Relation",
    "Structure", "StructureError", "load_structure", "save_structure",
]
