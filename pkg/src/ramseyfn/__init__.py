"""Structural Ramsey machinery for structures with relations and symmetric partial functions."""
from .structures import (EMBEDDING, HOMOMORPHISM, MONOMORPHISM, NONE, ORDER, Language, Structure,
                         StructureError, VertexMap, check_map, closure, disjoint_union, free_amalgam,
                         induced_substructure, is_closed)
from .embeddings import automorphisms, copies, embeddings, enumerate_automorphisms, enumerate_embeddings, is_isomorphic
from .irreducible import irreducible_substructures, is_irreducible
from .textio import ParseError, format_structure, parse_structure

__all__ = [
    "EMBEDDING", "HOMOMORPHISM", "MONOMORPHISM", "NONE", "ORDER", "Language", "Structure", "StructureError",
    "VertexMap", "check_map", "closure", "disjoint_union", "free_amalgam", "induced_substructure", "is_closed",
    "automorphisms", "copies", "embeddings", "enumerate_automorphisms", "enumerate_embeddings", "is_isomorphic",
    "irreducible_substructures", "is_irreducible", "ParseError", "format_structure", "parse_structure",
]
