# This file is part of disentanglement
#
# MIT License

from typing import Final

from . import models
from .convexsplit import build_convex_split, certify_convex_split, registers_for, verify_lemma
from .divergences import (
    conditional_mutual_information,
    d_max,
    mutual_information,
    relative_entropy,
    smooth_d_max,
    smooth_max_entropy,
    von_neumann_entropy,
)
from .errors import DisentanglementError, ProtocolError, SolverError, StateError, StateFileError
from .protocol import (
    UnitaryEnsemble,
    decouple_to_separable,
    decoupling_comparison,
    one_shot_cost_search,
    run_disentangling,
    verify_theorem,
)
from .qmatrix import DensityOperator, PureState, make_state, partial_trace, purified_distance, tensor_product
from .recovery import (
    ChannelChoi,
    appendix_converse_check,
    fidelity_of_recovery,
    petz_map,
    rel_entropy_of_recovery,
    simulate_recovery_degrading,
)
from .separability import ProductEnsemble, e_max_smooth, is_ppt, nearest_sep_distance, ree
from .subsystems import SubsystemDims

__all__ = [
    "models",
    "SubsystemDims",
    "DensityOperator",
    "PureState",
    "make_state",
    "partial_trace",
    "tensor_product",
    "purified_distance",
    "von_neumann_entropy",
    "relative_entropy",
    "mutual_information",
    "conditional_mutual_information",
    "d_max",
    "smooth_d_max",
    "smooth_max_entropy",
    "ProductEnsemble",
    "is_ppt",
    "ree",
    "e_max_smooth",
    "nearest_sep_distance",
    "build_convex_split",
    "certify_convex_split",
    "registers_for",
    "verify_lemma",
    "UnitaryEnsemble",
    "run_disentangling",
    "one_shot_cost_search",
    "decouple_to_separable",
    "decoupling_comparison",
    "verify_theorem",
    "ChannelChoi",
    "petz_map",
    "rel_entropy_of_recovery",
    "fidelity_of_recovery",
    "simulate_recovery_degrading",
    "appendix_converse_check",
    "DisentanglementError",
    "StateError",
    "SolverError",
    "ProtocolError",
    "StateFileError",
]

__version__: Final[str] = "0.1.0"
