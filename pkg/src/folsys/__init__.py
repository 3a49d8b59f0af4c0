"""Foliated systems of ODEs: decompositions X = sum_a g_a(t,x) X_a whose
coefficients are leafwise constant, their leaf-preserving reconstruction
rules, group-valued reductions, and compatible Poisson structures."""

from .algebra import (InvariantMetric, LieAlgebra, MatrixRealization,
                      adjoint_matrix, bracket, builtin_algebra,
                      builtin_realization, jacobi_residual, killing_form,
                      realization_residual)
from .fields import (RealizedAlgebra, TDependentVectorField, VectorField,
                     diagonal_prolongation, diagonality_defect,
                     directional_derivative, lie_bracket_at,
                     minimal_particular_solutions, rank_at)
from .foliated import (FoliatedSystem, FoliationChart, assemble, leaf_drift,
                       leaf_of, verify_foliated)
from .integrate import (Trajectory, convergence_order, integrate, interpolate,
                        trajectory_to_csv)
from .superposition import (SuperpositionRule, apply_rule, derive_abelian_rule,
                            first_integral_residual, solve_parameters,
                            verify_rule)
from .automorphic import (AutomorphicSystem, GroupAction, GroupCurve,
                          reconstruct, reconstruction_error, reduce_system,
                          solve_abelian, solve_matrix)
from .poisson import (HamiltonianCheck, PoissonBivector,
                      adjoint_foliated_system, check_rmatrix_hamiltonian,
                      hamiltonian_field, hamiltonian_residual,
                      is_foliated_lie_hamilton, jacobiator, kirillov_bivector,
                      linear_coordinates, poisson_bracket,
                      rmatrix_bivector_aff)
from .util import Box

__version__ = "0.1.0"
