"""Discrete functional inequalities on finite-volume and DDFV meshes."""

from .mesh import (AdmissibleMesh, BoundaryTag, MeshError, build_acute_triangulation,
                   build_structured, check_admissible, pyramid_residuals, quality, refine)
from .space import (DiscreteFunction, ExponentError, NormSpec, lp_norm, mean_value,
                    total_variation, w1p_norm, w1p_seminorm, w1p_seminorm_dirichlet)
from .inequalities import (ConfigError, DegenerateSampleError, ExponentSet, InequalityKind,
                           admissible_exponents, estimate_constant, gns_ratio, nash_ratio,
                           pw_ratio, sp_ratio)
from .sampling import SamplerSpec
from .ddfv import DDFVFunction, DDFVMesh, build_ddfv, discrete_gradient, ddfv_quality
from .ddfv_lab import ddfv_estimate
from .solver import convergence_study, solve_anisotropic_laplace
from .oracle import poincare_eigen_oracle

__version__ = "0.1.0"
