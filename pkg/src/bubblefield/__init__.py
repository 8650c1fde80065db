"""Near-field/far-field bubble formation and transport toolkit."""

__version__ = "0.1.0"

from . import bvp_core, coupling, levelset, shape_fit, young_laplace  # noqa: E402,F401
from .bvp_core import (ExtendedBoundary, LinearBVP, Mesh, Trajectory,  # noqa: F401
                       solve_block_midpoint, solve_multiple_shooting)
from .coupling import (BubbleRecord, OscillationParams,  # noqa: F401
                       breathing_frequency, bubble_density, electric_pressure,
                       near_to_far, oscillation_radius, run_coupled_cycle,
                       run_decoupled)
from .levelset import (Grid2D, LevelSetField, TransportParams,  # noqa: F401
                       cd_cylindrical_step, cfl_dt, godunov_grad_mag,
                       init_bubbles, read_snapshot, step, upwind_diffs,
                       write_snapshot)
from .shape_fit import EllipseParams, fit_ellipse, mirror_axisymmetric  # noqa: F401
from .young_laplace import (BubbleProfile, EFieldParams,  # noqa: F401
                            NearFieldParams, ProfileState, bond_number,
                            continue_in_L, jacobian, rhs, solve_profile)
