"""Point vortices on the sphere: direct, lifted, Lie-Poisson and shape dynamics."""
from __future__ import annotations

from .errors import DomainError, LiftedCollision, LogDomainError, ShapeUndefined, VortexCollision
from .geometry import hopf_lift, hopf_lift_all, hopf_project, pair_identities, su2_unvec, su2_vec, triple_product_c2
from .lifted import hamiltonian_lifted, momentum_J, momentum_K, momentum_L, momentum_M, rhs_lifted
from .liepoisson import (
    AlgebraElement,
    AlgebraPoint,
    Ad_star,
    ad_star,
    bracket_gamma,
    casimir,
    collective_h,
    faddeev_leverrier,
    lp_bracket_coords,
    lp_rhs,
)
from .shape import (
    ShapePoint,
    casimir_shape_c2,
    f_constraints,
    shape_bracket,
    shape_from_sphere,
    shape_hamiltonian,
    shape_rhs,
)
from .sphere import (
    Circulations,
    hamiltonian_sphere,
    moment_of_vorticity,
    poisson_bracket_r3,
    relative_rhs,
    rhs_sphere,
)
from .stability import (
    EnergyCasimirSpec,
    StabilityReport,
    analyze_tetrahedron,
    energy_casimir,
    hessian_minors_closed,
    tetrahedron_equilibrium,
)
from .timeint import IntegratorConfig, TrajectoryRecord, integrate

__version__ = "0.1.0"
