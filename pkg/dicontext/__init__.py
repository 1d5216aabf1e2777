"""Directed spaces as finite complexes: hom-sets of the fundamental category,
dimaps and dihomotopies with exact rational checks, equivalence certificates
rel a context, and combinatorial pushouts."""
from __future__ import annotations

from .complex import DiComplex, build_grid_complex, standard_space, validate_complex
from .errors import DicontextError
from .fundcat import equivalence_obstruction, hom_set
from .glue import pushout_along_map, pushout_identify
from .plmaps import check_dihomotopy, check_dimap, verify_equivalence_certificate
from .reports import Status, Verdict

__all__ = [
    "DiComplex",
    "DicontextError",
    "Status",
    "Verdict",
    "build_grid_complex",
    "check_dihomotopy",
    "check_dimap",
    "equivalence_obstruction",
    "hom_set",
    "pushout_along_map",
    "pushout_identify",
    "standard_space",
    "validate_complex",
    "verify_equivalence_certificate",
]

__version__ = "0.1.0"
