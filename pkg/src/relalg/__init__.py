"""Algebras over finite relational structures.

Horn-axiomatized structure categories, lifted signatures and their algebras,
free term slices, c-clustered equations, c-reflexive quotients and the
correspondence between quotients and compatible pairs, at desk scale.
"""

__version__ = "0.1.0"

from .algebras import Algebra, AlgebraMap, factor_through, validate_algebra
from .equations import ClusteredEquation, RelAtomOnTerms, TermEquality, satisfies_equation
from .free_terms import App, Var, build_free_slice
from .horn import Atom, AxiomSet, Equality, HornClause, gmet_preset, in_C, poset_preset
from .liftings import Lifting
from .quotients_exactness import CompatiblePair, Quotient, enumerate_quotients, is_c_reflexive
from .signatures import AlgebraicSignature, LiftedSignature, QuantityLattice, RelationalSignature
from .structures import Structure, StructureMap, classify_map

__all__ = [
    "Algebra", "AlgebraMap", "AlgebraicSignature", "App", "Atom", "AxiomSet", "ClusteredEquation",
    "CompatiblePair", "Equality", "HornClause", "LiftedSignature", "Lifting", "QuantityLattice",
    "Quotient", "RelAtomOnTerms", "RelationalSignature", "Structure", "StructureMap", "TermEquality",
    "Var", "build_free_slice", "classify_map", "enumerate_quotients", "factor_through", "gmet_preset",
    "in_C", "is_c_reflexive", "poset_preset", "satisfies_equation", "validate_algebra",
]
