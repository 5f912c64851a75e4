"""Mass-action reaction networks, CBP construction and Lyapunov certification."""

from .cbp import (
    CbpResult,
    Direction,
    Integrality,
    ProducingMatrix,
    cbp_generate,
    cbp_structure_relation,
    map_equilibrium,
)
from .certify import BoundarySpec, CertificationReport, CertifyOptions, certify
from .dsl import NetworkDocument, parse_dmatrix, parse_network, print_network
from .dynamics import Trajectory, integrate, jacobian, rate_vector, rhs
from .equilibria import (
    ClassEquilibrium,
    ComplexBalanceReport,
    class_equilibrium,
    complex_balance_residuals,
    find_complex_balanced_equilibrium,
    verify_equilibrium,
)
from .lyapunov import (
    LyapunovCandidate,
    boundary_residual,
    candidate_gradient,
    candidate_value,
    dissipation_audit,
    hessian_check,
    pde_residual,
    pde_residual_sweep,
)
from .network import Network, Reaction, StructureSummary, build_network, orthogonal_complement, structure

__all__ = [name for name in dir() if not name.startswith("_")]
