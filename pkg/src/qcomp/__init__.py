"""Diamond norms, guessing probabilities, and deficiency of channels.

The package computes the completely bounded trace norm (diamond norm)
and its dual, optimal state-discrimination values, and deficiency
between quantum channels or statistical experiments, with certified
semidefinite programming throughout. Equivalences between the convex
programs are exposed as checkable identities via :mod:`qcomp.verify`.
"""

from __future__ import annotations

from . import (
    cli,
    deficiency,
    discrimination,
    errors,
    experiments,
    linalg,
    maps,
    norms,
    randomgen,
    schemas,
    sdp,
    verify,
)
from .deficiency import (
    DeficiencyResult,
    deficiency_value,
    deficiency_witness,
    lecam_distance,
    povm_postprocessing_gap,
    thm1_verify,
)
from .discrimination import Ensemble, Povm, ensemble_from_cp_map, psucc
from .errors import QcompError, SolverError, ValidationError
from .experiments import (
    DecisionProblem,
    Experiment,
    Prior,
    classical_deficiency_lp,
    exp_deficiency,
)
from .maps import HermitianMap, adjoint, apply, compose, cq_map, identity_map, pairing, qc_map, tensor
from .norms import (
    cq_norms,
    diamond_norm,
    diamond_norm_cp,
    dual_diamond_norm,
    dual_diamond_norm_cp,
    qc_norms,
)
from .verify import run_suite

__version__ = "0.1.0"

__all__ = [
    "DecisionProblem",
    "DeficiencyResult",
    "Ensemble",
    "Experiment",
    "HermitianMap",
    "Povm",
    "Prior",
    "QcompError",
    "SolverError",
    "ValidationError",
    "adjoint",
    "apply",
    "classical_deficiency_lp",
    "cli",
    "compose",
    "cq_map",
    "cq_norms",
    "deficiency",
    "deficiency_value",
    "deficiency_witness",
    "diamond_norm",
    "diamond_norm_cp",
    "discrimination",
    "dual_diamond_norm",
    "dual_diamond_norm_cp",
    "ensemble_from_cp_map",
    "errors",
    "exp_deficiency",
    "experiments",
    "identity_map",
    "lecam_distance",
    "linalg",
    "maps",
    "norms",
    "pairing",
    "povm_postprocessing_gap",
    "psucc",
    "qc_map",
    "qc_norms",
    "randomgen",
    "run_suite",
    "schemas",
    "sdp",
    "tensor",
    "thm1_verify",
    "verify",
]
