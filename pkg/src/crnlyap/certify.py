"""End-to-end certification of a (generated) network's Lyapunov candidate."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cbp import Integrality, ProducingMatrix, cbp_generate, networks_match
from .dynamics import integrate
from .equilibria import ComplexBalanceReport, complex_balance_residuals, find_complex_balanced_equilibrium
from .errors import CrnError, NewtonDivergence, SourceNotComplexBalanced, StructuralMismatch
from .lyapunov import (
    BoundaryRecord,
    DissipationAudit,
    HessianVerdict,
    LyapunovCandidate,
    PdeResidualReport,
    approach_path,
    boundary_record,
    dissipation_audit,
    hessian_check,
    pde_residual_sweep,
    sample_box,
)
from .network import Network, StructureSummary, structure

CERTIFIED = "certified"
REFUTED = "refuted"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class BoundarySpec:
    point: Sequence[float]
    complex_set: Sequence[Sequence] | None = None  # None: every complex
    path: Sequence[Sequence[float]] | None = None  # None: approach_path(point)


@dataclass
class CertifyOptions:
    region: tuple = (0.1, 10.0)
    samples: int = 1000
    seed: int = 42
    initial_states: Sequence[Sequence[float]] | None = None
    n_random_starts: int = 3
    t_end: float = 50.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    pde_tol: float = 1e-9
    balance_tol: float = 1e-9
    boundaries: Sequence[BoundarySpec] = field(default_factory=tuple)
    override_weights: Sequence | None = None  # debugging: replace the weights


@dataclass(frozen=True)
class CertificationReport:
    verdict: str
    path: str
    structural: StructureSummary
    source_complex_balance: ComplexBalanceReport
    candidate: LyapunovCandidate
    pde: PdeResidualReport
    boundary: tuple[BoundaryRecord, ...]
    hessian: HessianVerdict
    dissipation: tuple[DissipationAudit, ...]
    initial_states: tuple[tuple[float, ...], ...]
    options: CertifyOptions
    species: tuple[str, ...]

    def to_dict(self) -> dict:
        o = self.options
        return {
            "verdict": self.verdict,
            "structural": self.structural.to_dict(),
            "source_complex_balance": self.source_complex_balance.to_dict(),
            "pde": self.pde.to_dict(),
            "boundary": [b.to_dict(self.species) for b in self.boundary],
            "hessian": self.hessian.to_dict(),
            "dissipation": [
                {"initial_state": list(x0), **a.to_dict()} for x0, a in zip(self.initial_states, self.dissipation)
            ],
            "config": {
                "path": self.path,
                "candidate_weights": self.candidate.weights.tolist(),
                "candidate_reference": self.candidate.reference.tolist(),
                "region": [np.broadcast_to(v, (len(self.species),)).tolist() for v in o.region],
                "samples": o.samples,
                "seed": o.seed,
                "pde_tol": o.pde_tol,
                "balance_tol": o.balance_tol,
                "t_end": o.t_end,
                "rel_tol": o.rel_tol,
                "abs_tol": o.abs_tol,
                "scope": "local: verdict covers the sampled box intersected with each compatibility class",
            },
        }


def certify(
    net: Network,
    source: Network | None = None,
    d: ProducingMatrix | None = None,
    x_star=None,
    opts: CertifyOptions | None = None,
) -> CertificationReport:
    """Certify the weighted pseudo-Helmholtz function for ``net``.

    Without ``source`` the network itself must be complex balanced and the
    unit-weight candidate is used. With ``source`` and ``d`` the network must
    equal ``cbp_generate(source, d)`` and the source must be complex balanced
    at ``x_star`` (searched for when not given, in source coordinates).
    """
    opts = opts or CertifyOptions()
    n = net.n_species
    if source is None:
        source = net
        path = "pseudo_helmholtz"
        if d is None:
            d = ProducingMatrix.identity(n)
    else:
        path = "generalized_pseudo_helmholtz"
        if d is None:
            raise StructuralMismatch("a producing matrix is required with a source network")
    try:
        image = cbp_generate(source, d, Integrality.ALLOW_FRACTIONAL).network
    except CrnError as exc:
        raise StructuralMismatch(f"source cannot produce the network: {exc}") from None
    if not networks_match(image, net):
        raise StructuralMismatch("network is not the image of the source under the producing matrix")

    if x_star is None:
        try:
            x_star = find_complex_balanced_equilibrium(source)
        except NewtonDivergence:
            raise SourceNotComplexBalanced("no complex-balanced equilibrium of the source was found") from None
    cb = complex_balance_residuals(source, x_star, opts.balance_tol)
    if not cb.balanced:
        raise SourceNotComplexBalanced(
            f"source is not complex balanced at {np.asarray(x_star, dtype=float)} "
            f"(max residual {cb.max_abs_residual:.3e})"
        )

    dvec = d.as_floats()
    reference = np.asarray(x_star, dtype=float) / dvec
    weights = dvec if opts.override_weights is None else np.asarray(opts.override_weights, dtype=float)
    cand = LyapunovCandidate(weights, reference)

    summ = structure(net)
    pde = pde_residual_sweep(net, cand, opts.region, opts.samples, opts.seed, opts.pde_tol)
    hess = hessian_check(cand, summ.subspace_basis, opts.region, opts.samples, opts.seed)

    if opts.initial_states is not None:
        starts = [tuple(float(v) for v in x0) for x0 in opts.initial_states]
    else:
        starts = [tuple(float(v) for v in x) for x in sample_box(opts.region, n, opts.n_random_starts, opts.seed + 1)]
    audits = []
    for x0 in starts:
        traj = integrate(net, x0, opts.t_end, opts.rel_tol, opts.abs_tol, sample_every=opts.t_end / 200)
        audits.append(dissipation_audit(net, cand, traj))

    boundaries = []
    for spec in opts.boundaries:
        p = spec.path if spec.path is not None else approach_path(spec.point)
        boundaries.append(boundary_record(net, cand, spec.point, spec.complex_set, p))

    if not pde.passed or any(not a.derivative_ok for a in audits):
        verdict = REFUTED
    elif hess.passed and all(a.passed for a in audits) and all(b.passed for b in boundaries):
        verdict = CERTIFIED
    else:
        verdict = INCONCLUSIVE

    return CertificationReport(
        verdict, path, summ, cb, cand, pde, tuple(boundaries), hess, tuple(audits), tuple(starts), opts, net.species
    )
