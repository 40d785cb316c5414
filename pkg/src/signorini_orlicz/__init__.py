"""Thin-obstacle problems for Orlicz energies on the half disc.

The usual flow::

    from signorini_orlicz import build_half_disc, make_nfunction, BoundaryData, solve_thin_obstacle

    mesh = build_half_disc(1.0, 0.04)
    f = make_nfunction("power", {"p": 1})
    u, report = solve_thin_obstacle(mesh, f, BoundaryData("signorini_trace"))
"""

from .energy import first_variation, gradients, signorini_exact, vertex_gradient
from .errors import (CatalogError, ConfigError, ConstraintError, DomainError, EvaluationError,
                     InputError, ParameterError, ParityError, ResolutionError, ShapeError,
                     SignoriniError, UnsupportedOrderError)
from .extension import even_extension_solve, reflected_energy_identity
from .mesh import Mesh, VertexTag, ball_patch, build_half_disc, reflect_to_disc
from .nodal import Label, PointSet, contact_sets, nodal_set, stratify
from .orlicz import (NFunction, combine, lieberman_estimate, luxemburg_norm, make_nfunction,
                     modular, normalized, parse_nfunction_spec)
from .regularity import (caccioppoli_check, check_pre1, check_pre2, degiorgi_constants,
                         distance_law_fit, holder_fit, level_measure, lipschitz_ratio,
                         sup_bound_check)
from .solver import (BoundaryData, SolveOptions, kkt_check, solve_classical_obstacle,
                     solve_dirichlet_g_harmonic, solve_thin_obstacle)

__version__ = "0.1.0"
