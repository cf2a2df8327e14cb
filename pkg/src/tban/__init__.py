"""Stochastic nonlinear threshold Boolean automata networks on Z^2.

Lattices with clamped external boundaries, coalition potentials, the
projectivity-matrix nullity criterion, exact invariant measures for small
regions and seeded Monte Carlo for larger ones.
"""

from .dynamics import (Configuration, PotentialSet, activation_probability, coalition_term,
                       deterministic_update, exponent_table, local_exponent, logistic,
                       phi_symmetry_check, solve_symmetric_w0, symmetric_potentials, symmetry_residual)
from .errors import ConfigurationError, ConvergenceError, DomainError, SizeCapError, TBANError
from .exact_markov import (Distribution, InfluenceResult, boundary_influence, build_chain,
                           check_conditional_identity, check_projectivity_identities,
                           cylinder_probability, invariant_measure)
from .lattice import (Digraph, NetworkTopology, NodeId, StructureReport, build_lattice, centre,
                      eccentricity, graph_boundary, lattice_digraph, uniform_weights, validate_structure)
from .montecarlo import (Estimate, SimulationPlan, boundary_influence_mc, derive_seed, simulate, sweep,
                         write_csv)
from .projectivity import (CriterionReport, Cylinder, alternating_sum, build_projectivity_matrix,
                           conditional_phi, determinant, phase_transition_report)

__version__ = "0.1.0"
