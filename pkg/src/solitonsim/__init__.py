"""Wave maps with potential into the sphere: evolution, stationary loops,
rotation solitons, and their quantitative verification."""

from ._kernels import BACKEND as kernels_backend
from .elliptic import (
    EllipticConfig,
    EllipticResult,
    elliptic_residual,
    functional_F,
    solve_elliptic,
    tangential_residual_linf,
)
from .evolver import (
    EnergyRecord,
    EvolveResult,
    InstabilityError,
    MapState,
    SolverConfig,
    acceleration,
    check_energy_inequality,
    energy_report,
    epsilon_sweep,
    evolve,
    step,
)
from .geometry import (
    SPHERE,
    TORUS,
    FlatTorusGeometry,
    SphereGeometry,
    hermitian_hessian_residual,
    killing_symmetrized_residual,
)
from .grid import (
    GridField,
    IncompatibleRhsError,
    PeriodicGrid1D,
    PeriodicGrid2D,
    diff1,
    integrate,
    laplacian,
    poisson_solve_periodic,
    read_field_csv,
    sobolev_seminorm,
    write_field_csv,
)
from .profiles import latitude_profile, pole_profile, tangent_perturbation
from .verify import (
    ResidualReport,
    build_soliton_frames,
    holomorphic_isometry_check,
    ishimori_phi,
    ishimori_residual,
    schrodinger_residual,
    sheet_degree,
    spacetime_sheet,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
