"""Toolkit for three weakenings of the group axioms sharing one table format:
groupoids (partial product along matching anchors), almost groupoids (one
unit map), and generalized groups (total product, per-element identities).

Finite structures are verified exhaustively with counterexample witnesses;
rule-backed infinite families are verified on seeded samples.  The census
module supplies brute-force enumeration, canonical forms and isomorphism
search as independent ground truth.
"""

from .kernel import (
    ALMOST_GROUPOID,
    GENERALIZED_GROUP,
    GROUPOID,
    CheckResult,
    ElementId,
    FiniteStructureTable,
    MorphismPair,
    MorphismReport,
    RuleStructure,
    StructureError,
    VerificationReport,
    Witness,
    build_finite_table,
    build_generalized_group,
    group_table,
    lookup_product,
    relabel_table,
    sample_composable_pairs,
)

__version__ = "0.1.0"

__all__ = [
    "ALMOST_GROUPOID",
    "GENERALIZED_GROUP",
    "GROUPOID",
    "CheckResult",
    "ElementId",
    "FiniteStructureTable",
    "MorphismPair",
    "MorphismReport",
    "RuleStructure",
    "StructureError",
    "VerificationReport",
    "Witness",
    "build_finite_table",
    "build_generalized_group",
    "group_table",
    "lookup_product",
    "relabel_table",
    "sample_composable_pairs",
    "__version__",
]
