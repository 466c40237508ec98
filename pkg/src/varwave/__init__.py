"""Conservative solutions and a Lipschitz metric for a variational wave equation."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, SolveError
from .wavespeed import (WaveSpeed, constant_speed, cosine_speed,
                        gaussian_speed, cos_poly_speed, make_wave_speed)
from .chart import (CharChart, InitialDatum, BoundaryTrace, boundary_data,
                    chart_domain, make_datum, relabel, residuals, smooth_bump,
                    solve_chart, solve_for_time, jacobian_determinant)
from .slices import (LevelCurve, PhysicalSlice, SingularityReport,
                     curve_energy, detect_singularities, extract_level_curve,
                     jacobian, reconstruct_slice, slice_at_time)
from .metric import (NormWeights, PathOfData, TangentField, interaction_rate,
                     norm_profile, path_domain, path_length,
                     optimize_relabeling, physical_form_norm, shifts_on_curve,
                     tangent_by_theta, tangent_norm, tangent_norm_at,
                     norm_integrands, weights_along_curve)
from .bounds import (gronwall_check, h1_l2_distance, interpolated_path,
                     lipschitz_experiment, sobolev_rhs,
                     transport_lower_bounds)
from .oracle import (DirectTrajectory, direct_solve, physical_tangent_solve,
                     trajectory_energy, weight_inequality_residual)
