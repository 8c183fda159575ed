"""Balanced configurations of the Newtonian n-body problem.

Potential and derivatives, spectra of planar central configurations,
spectral flow along the trivial branch and pseudo-arclength continuation of
the branches that bifurcate from it.
"""

from .continuation import (Branch, BranchPoint, ContinuationSettings, augmented_jacobian,
                           augmented_residual, branch_switch, classify_point, damped_newton,
                           detect_turning_points, normal_kernel_directions, tangent_vector,
                           trace_branch)
from .errors import *  # noqa: F401,F403
from .planar import (BifurcationCandidate, InertiaTriple, SpectrumReport, b_matrix,
                     bifurcation_candidates, bifurcation_lower_bound, cluster_spectrum,
                     d_matrix, inertia_indices, normal_inertia_at, planar_inertia)
from .plotting import emit_plot
from .potential import (balanced_residual, normalize_to_sphere, potential_gradient,
                        potential_hessian, s_inner, total_potential)
from .presets import preset_configuration
from .records import BranchRecord
from .runner import run_analyze, run_trace
from .scenario import ScenarioSpec, builtin_scenario, load_scenario, serialize_scenario
from .spectral_flow import (certify_bifurcation, full_hessian_form, reduced_hessian,
                            rotation_generator, spectral_flow, symmetry_kernel,
                            trivial_branch_path)

__version__ = "0.1.0"
