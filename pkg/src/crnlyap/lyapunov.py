"""Weighted pseudo-Helmholtz candidates and their numerical certification.

The candidate is ``f(x) = sum_j d_j (x*_j - x_j - x_j ln(x*_j / x_j))``. Unit
weights give the classical pseudo-Helmholtz free energy; the producing
matrix diagonal gives the generalised version for generated networks.
Certification evaluates the Lyapunov-function PDE residual on samples,
checks the restricted Hessian, probes the boundary condition along a path,
and audits dissipation along integrated trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .dynamics import Trajectory, _as_state, rhs
from .equilibria import verify_equilibrium
from .errors import DegenerateBasis, InvalidRegion, PathNotInClass
from .network import Complexus, Network, format_complex, structure


@dataclass(frozen=True)
class LyapunovCandidate:
    weights: np.ndarray
    reference: np.ndarray

    def __init__(self, weights, reference):
        w = np.asarray([float(v) for v in weights])
        ref = np.asarray([float(v) for v in reference])
        if w.shape != ref.shape:
            raise ValueError("weights and reference must have the same length")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(ref <= 0):
            raise ValueError("reference point must be strictly positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "reference", ref)

    @property
    def active_set(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.weights > 0))

    def value(self, x) -> float | np.ndarray:
        x = np.asarray(x, dtype=float)
        xs = self.reference
        return np.sum(self.weights * (xs - x - x * np.log(xs / x)), axis=-1)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.weights * np.log(x / self.reference)

    def hessian(self, x) -> np.ndarray:
        x = _as_state(x)
        return np.diag(self.weights / x)


def candidate_value(c: LyapunovCandidate, x) -> float:
    return float(c.value(_as_state(x)))


def candidate_gradient(c: LyapunovCandidate, x) -> np.ndarray:
    return c.gradient(_as_state(x))


def _terms(net: Network, c: LyapunovCandidate, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Both PDE terms per reaction, in log space: (k x^v, k x^v exp(dv . grad))."""
    lx = np.log(X)
    log_mono = net.log_rates + lx @ net.reactant_matrix
    grad = c.weights * (lx - np.log(c.reference))
    return np.exp(log_mono), np.exp(log_mono + grad @ net.gamma)


def pde_residual(net: Network, c: LyapunovCandidate, x) -> float:
    """Left-hand side of the Lyapunov-function PDE at ``x``."""
    x = _as_state(x)
    plain, shifted = _terms(net, c, x[None, :])
    return float(np.sum(plain - shifted))


@dataclass(frozen=True)
class PdeResidualReport:
    sample_points: np.ndarray
    residuals: np.ndarray
    max_abs_residual: float
    scale: float
    passed: bool
    tol: float

    def to_dict(self, include_samples: bool = False) -> dict:
        out = {
            "passed": self.passed,
            "max_abs_residual": self.max_abs_residual,
            "scale": self.scale,
            "tol": self.tol,
            "samples": int(len(self.residuals)),
        }
        if include_samples:
            out["points"] = self.sample_points.tolist()
            out["residuals"] = self.residuals.tolist()
        return out


def _box(region, n: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = region
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,)).copy()
    if not (np.all(lo > 0) and np.all(hi >= lo) and np.all(np.isfinite(hi))):
        raise InvalidRegion(f"region must lie strictly inside the positive orthant, got {region}")
    return lo, hi


def sample_box(region, n: int, samples: int, seed: int) -> np.ndarray:
    """Log-uniform samples from a box, reproducible from ``seed``."""
    if samples < 1:
        raise InvalidRegion("at least one sample is required")
    lo, hi = _box(region, n)
    rng = np.random.default_rng(seed)
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=(samples, n)))


def pde_residual_sweep(
    net: Network,
    c: LyapunovCandidate,
    region=(0.1, 10.0),
    samples: int = 1000,
    seed: int = 42,
    tol: float = 1e-9,
) -> PdeResidualReport:
    """Evaluate the PDE residual at log-uniform samples of a box.

    ``scale`` is the largest single term magnitude met, so the pass criterion
    ``max |residual| <= tol * max(scale, 1)`` is relative to the sizes that
    actually cancel.
    """
    X = sample_box(region, net.n_species, samples, seed)
    plain, shifted = _terms(net, c, X)
    res = np.sum(plain - shifted, axis=1)
    scale = float(max(np.max(plain), np.max(shifted)))
    max_abs = float(np.max(np.abs(res)))
    if not np.isfinite(max_abs):
        max_abs = float("inf")
    return PdeResidualReport(X, res, max_abs, scale, max_abs <= tol * max(scale, 1.0), tol)


@dataclass(frozen=True)
class BoundaryRecord:
    boundary_point: np.ndarray
    complex_set: tuple[Complexus, ...]
    residuals: np.ndarray
    scales: np.ndarray  # largest term magnitude at each path point
    passed: bool

    def to_dict(self, species: Sequence[str]) -> dict:
        return {
            "boundary_point": self.boundary_point.tolist(),
            "complex_set": [format_complex(species, z) for z in self.complex_set],
            "residuals": self.residuals.tolist(),
            "final_abs_residual": float(abs(self.residuals[-1])) if len(self.residuals) else 0.0,
            "passed": self.passed,
        }


def _boundary_terms(net, c, boundary_point, complex_set, path, subspace):
    b = np.asarray(boundary_point, dtype=float)
    if b.shape != (net.n_species,) or np.any(b < 0) or not np.any(b == 0):
        raise ValueError("boundary point must be nonnegative with at least one zero entry")
    if complex_set is None:
        zs = net.complexes
    else:
        zs = tuple(tuple(linalg.as_fraction(v) for v in z) for z in complex_set)
    zset = set(zs)
    if subspace is None:
        perp = structure(net).orthogonal_basis
    else:
        perp = linalg.orthogonal_complement(list(subspace), net.n_species)
    Q = np.array([[float(v) for v in vec] for vec in perp]).reshape(len(perp), net.n_species)
    if len(perp):
        Q = np.linalg.qr(Q.T)[0].T

    out_mask = np.array([rx.reactant in zset for rx in net.reactions])
    in_mask = np.array([rx.product in zset for rx in net.reactions])
    residuals, scales = [], []
    for m, p in enumerate(path, start=1):
        x = _as_state(p)
        if len(perp):
            dev = float(np.max(np.abs(Q @ (x - b))))
            if dev > 1e-9 * max(1.0, float(np.max(np.abs(x - b)))):
                raise PathNotInClass(f"path point {m} leaves boundary_point + S (deviation {dev:.3e})")
        plain, shifted = _terms(net, c, x[None, :])
        plain, shifted = plain[0][out_mask], shifted[0][in_mask]
        residuals.append(float(np.sum(plain) - np.sum(shifted)))
        scales.append(float(max(np.max(plain, initial=0.0), np.max(shifted, initial=0.0))))
    return b, zs, np.array(residuals), np.array(scales)


def boundary_residual(
    net: Network,
    c: LyapunovCandidate,
    boundary_point,
    complex_set: Sequence[Sequence] | None,
    path: Sequence[Sequence],
    subspace: Sequence[Sequence] | None = None,
) -> np.ndarray:
    """Boundary-condition residual at each point of an approach path.

    ``complex_set=None`` means every complex of the network. Path points must
    lie in ``boundary_point + S``; ``subspace`` defaults to ``net``'s own.
    """
    return _boundary_terms(net, c, boundary_point, complex_set, path, subspace)[2]


def boundary_record(
    net: Network,
    c: LyapunovCandidate,
    boundary_point,
    complex_set: Sequence[Sequence] | None,
    path: Sequence[Sequence],
    subspace: Sequence[Sequence] | None = None,
    tol: float = 1e-10,
) -> BoundaryRecord:
    """Boundary residuals plus a verdict.

    The condition is a limit, so the record passes when the last residual is
    below ``tol`` and each magnitude is no larger than its predecessor unless
    it is already at rounding level (``1e-12`` of that point's largest term).
    The rounding allowance matters for complex sets where the residual is
    zero identically and only floating noise remains.
    """
    b, zs, res, scales = _boundary_terms(net, c, boundary_point, complex_set, path, subspace)
    mags = np.abs(res)
    shrinking = all(
        mags[m] <= mags[m - 1] or mags[m] <= 1e-12 * scales[m] for m in range(1, len(mags))
    )
    ok = bool(len(res) and mags[-1] < tol and shrinking)
    return BoundaryRecord(b, zs, res, scales, ok)


def approach_path(boundary_point, steps: int = 20) -> list[np.ndarray]:
    """Interior points ``b + 2**-m e`` with ``e`` the indicator of zero entries."""
    b = np.asarray(boundary_point, dtype=float)
    e = (b == 0).astype(float)
    return [b + 2.0 ** -m * e for m in range(1, steps + 1)]


@dataclass(frozen=True)
class HessianVerdict:
    passed: bool
    min_eigenvalue: float | None
    samples: int

    def to_dict(self) -> dict:
        return {"passed": self.passed, "min_eigenvalue": self.min_eigenvalue, "samples": self.samples}


def hessian_check(
    c: LyapunovCandidate,
    subspace: Sequence[Sequence],
    region=(0.1, 10.0),
    samples: int = 1000,
    seed: int = 42,
    points=None,
) -> HessianVerdict:
    """Positive definiteness of ``B^T diag(d/x) B`` on the stoichiometric subspace.

    Samples come from the box unless explicit ``points`` are given.
    """
    n = len(c.weights)
    if not subspace:
        return HessianVerdict(True, None, 0)
    B = np.array([[float(v) for v in vec] for vec in subspace]).T
    if B.shape[0] != n:
        raise DegenerateBasis(f"basis vectors have length {B.shape[0]}, expected {n}")
    if linalg.rank(subspace) < B.shape[1]:
        raise DegenerateBasis("basis vectors are linearly dependent")
    X = np.atleast_2d(np.asarray(points, dtype=float)) if points is not None else sample_box(region, n, samples, seed)
    passed = True
    min_eig = np.inf
    for x in X:
        x = _as_state(x)
        M = B.T @ ((c.weights / x)[:, None] * B)
        M = 0.5 * (M + M.T)
        try:
            np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            passed = False
        lam = float(np.linalg.eigvalsh(M)[0])
        min_eig = min(min_eig, lam)
        if lam <= 0:
            passed = False
    return HessianVerdict(passed, float(min_eig), len(X))


@dataclass(frozen=True)
class DissipationAudit:
    times: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray
    derivative_ok: bool  # analytic derivative <= slack everywhere
    monotone_ok: bool  # sampled values nonincreasing within tolerance
    strict_decrease_ok: bool  # derivative < 0 wherever |rhs| > 1e-8
    max_uphill: float
    equilibrium_samples: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return self.derivative_ok and self.monotone_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "derivative_ok": self.derivative_ok,
            "monotone_ok": self.monotone_ok,
            "strict_decrease_ok": self.strict_decrease_ok,
            "initial_value": float(self.values[0]),
            "final_value": float(self.values[-1]),
            "max_derivative": float(np.max(self.derivatives)),
            "max_uphill": self.max_uphill,
            "equilibrium_samples": len(self.equilibrium_samples),
            "samples": int(len(self.times)),
        }


def dissipation_audit(net: Network, c: LyapunovCandidate, traj: Trajectory) -> DissipationAudit:
    """Check that the candidate never increases along ``traj``."""
    X = traj.states
    if not np.all(X > 0):
        raise ValueError("trajectory states must be strictly positive")
    values = c.value(X)
    F = np.array([rhs(net, x) for x in X])
    derivs = np.sum(c.gradient(X) * F, axis=1)
    slack = 1e-10 * (1.0 + np.abs(values))
    derivative_ok = bool(np.all(derivs <= slack))
    steps = np.diff(values)
    allowed = 1e-7 * (1.0 + np.abs(values[:-1]))
    monotone_ok = bool(np.all(steps <= allowed))
    max_uphill = float(max(0.0, np.max(steps))) if steps.size else 0.0
    moving = np.max(np.abs(F), axis=1) > 1e-8
    strict_ok = bool(np.all(derivs[moving] < 0))
    eq = tuple(i for i, x in enumerate(X) if abs(derivs[i]) <= slack[i] and verify_equilibrium(net, x).is_equilibrium)
    return DissipationAudit(traj.times, values, derivs, derivative_ok, monotone_ok, strict_ok, max_uphill, eq)
