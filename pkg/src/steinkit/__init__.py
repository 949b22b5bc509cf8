"""Stein operators, kernels, solutions and comparison bounds for univariate laws."""
from .compare import (BoundReport, general_identity_eval, kernel_bound, lattice_gauss_bound,
                      score_bound, stein_discrepancy, sum_kernel)
from .measure import (DensityModel, LatticeSpec, SupportInterval, cdf_of, density_from_spec,
                      expect, expression_density, parse_density_expression)
from .operators import (OperatorSpec, SteinPair, diffusion_operator, gibbs_operator, pair,
                        pearson_kernel_check, standardize, zero_bias_density)
from .oracle import (characterization_check, kolmogorov_distance, tv_distance,
                     wasserstein_distance)
from .solve import SolutionPair, SteinFactors, TestClass, frechet_solution, solve, stein_factors

__version__ = "0.1.0"
