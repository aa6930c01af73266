"""Exact computations with twisted Exel-Pardo tuples, their Cohn algebras and
quotients, twisted Katsura triples, and homotopy K-theory via Smith normal form."""

from .cohn import AlgElem, CohnAlgebra
from .ep import EPTuple, Verdict, nabla, stratify_regular, validate
from .errors import (ConstructionError, DivergenceError, DomainError, EncodingError,
                     MembershipError, SchemaError, TwistedEPError, UnsupportedTupleError)
from .graph import Graph, Path, paths_up_to, reduced_incidence, regular_vertices
from .groups import CyclicGroup, Integers, TableGroup, klein_four, symmetric_group_3, trivial_group
from .katsura import KatsuraTriple, build_tuple, hausdorff_condition, is_kspi, kreg_conditions
from .ktheory import UnitsModel, WMatrix, bf_modules, conjugate, kh_groups, stabilize
from .scalars import Field, ModP
from .semigroup import STriple, ZERO, mul, omega, star
from .snf import AbGroup, coker_ker, smith_normal_form

__all__ = [
    "AbGroup", "AlgElem", "CohnAlgebra", "ConstructionError", "CyclicGroup", "DivergenceError",
    "DomainError", "EPTuple", "EncodingError", "Field", "Graph", "Integers", "KatsuraTriple",
    "MembershipError", "ModP", "Path", "STriple", "SchemaError", "TableGroup", "TwistedEPError",
    "UnitsModel", "UnsupportedTupleError", "Verdict", "WMatrix", "ZERO", "bf_modules",
    "build_tuple", "coker_ker", "conjugate", "hausdorff_condition", "is_kspi", "kh_groups",
    "klein_four", "kreg_conditions", "mul", "nabla", "omega", "paths_up_to", "reduced_incidence",
    "regular_vertices", "smith_normal_form", "stabilize", "star", "stratify_regular",
    "symmetric_group_3", "trivial_group", "validate",
]
