"""Regular fractal sets, additive energy, fractal uncertainty norms and gap exponents."""

from ._kernels import backend, set_threads, use_backend
from .additive_energy import (
    EnergyResult,
    cantor_leaf_energy,
    energy_count,
    energy_exponent,
    energy_measure,
    energy_result,
    projected_energy,
)
from .errors import FupgapError, GeometryError, RegularityViolation, ResourceError, ValidationError
from .fractal_sets import (
    CantorSpec,
    FitReport,
    IntervalCover,
    SchottkyGroup,
    build_three_funnel,
    cantor_on_circle,
    cover_count,
    gen_cantor,
    minkowski_dimension,
    schottky_limit_set,
    schottky_residuals,
)
from .fup_estimator import (
    ChiCutoff,
    FupMatrix,
    build_fup_matrix,
    fup_exponent,
    jn_lower_probe,
    kernel_decay,
    kernel_K,
    operator_norm,
)
from .gap_constants import ConstantsConfig, beta_gap, beta_jn, beta_std, constants_suite, gap_report
from .multiscale_tree import TripleTree, discretize, prune_triples, pruned_leaf_bound, tree_power
from .regularity import LatticeSet, ad_constant, ap_avoidance, separated_count, snap_to_lattice

__all__ = [name for name in dir() if not name.startswith("_")]
