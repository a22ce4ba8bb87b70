"""Approximation of almost diagonal Lipschitz maps by lattice Lipschitz operators.

Pipeline: find approximate eigenvectors by Monte Carlo minimization of the
diagonal error (``eigensearch``), pick a basis from the resulting cloud
(``basisframe``), then reconstruct the map with weakened lattice McShane and
Whitney extensions carrying pointwise error bounds (``extension``).
"""

from .basisframe import (
    BasisFrame,
    direct_basis,
    identity_frame,
    lattice_abs,
    lattice_inf,
    lattice_sup,
    octant_basis,
    pca_basis,
    user_basis,
)
from .config import RunConfig, format_config, load_config, parse_config
from .diagonal import (
    EigenSample,
    diagonal_error,
    diagonal_errors,
    diagonal_value,
    diagonal_values,
    projection_error_at,
)
from .eigensearch import EigenCloud, SearchConfig, refine_step, run_search, seed_uniform, select_best
from .errors import (
    ConfigError,
    DegenerateCloudError,
    LatlipError,
    NumericalError,
    UnboundedConstantError,
    UncertifiedModelError,
)
from .extension import ExtensionModel, build_model, estimate_K
from .metrics import ErrorReport, bound_audit, cloud_quality, mc_l2_error
from .operator import (
    OperatorHandle,
    catalog_f_section5,
    catalog_G,
    catalog_R,
    catalog_S,
    make_operator,
)

__version__ = "0.1.0"
