"""Blowing up polynomial foliation germs until the singularities are reduced."""
from .parse import ParseError, parse_poly, parse_vf
from .poly import BivariatePoly, PolyVectorField
from .reduction import (ReductionError, ResolutionTree, SingularityInfo, Status, camacho_sad_check,
                        chart_consistency, extract_graph, index_table, is_reduced, ledger_discrepancies,
                        reduce, singularity_info)

__all__ = ["BivariatePoly", "PolyVectorField", "ParseError", "parse_poly", "parse_vf", "ReductionError",
           "ResolutionTree", "SingularityInfo", "Status", "camacho_sad_check", "chart_consistency",
           "extract_graph", "index_table", "is_reduced", "ledger_discrepancies", "reduce", "singularity_info"]
