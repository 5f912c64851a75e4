"""Equilibrium checks, complex balance, and in-class equilibrium solving."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .dynamics import _as_state, rate_vector, rhs
from .errors import NewtonDivergence, NotAnEquilibriumReference
from .network import Complexus, Network, structure


@dataclass(frozen=True)
class ComplexBalance:
    complex: Complexus
    label: str
    consumption: float
    production: float

    @property
    def residual(self) -> float:
        return self.consumption - self.production


@dataclass(frozen=True)
class ComplexBalanceReport:
    per_complex: tuple[ComplexBalance, ...]
    max_abs_residual: float
    balanced: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "balanced": self.balanced,
            "max_abs_residual": self.max_abs_residual,
            "complexes": [
                {"complex": c.label, "consumption": c.consumption, "production": c.production}
                for c in self.per_complex
            ],
        }


def complex_balance_residuals(net: Network, x_star, tol: float = 1e-9) -> ComplexBalanceReport:
    """Per-complex consumption and production rates at ``x_star``.

    Balanced iff every ``|consumption - production| <= tol * max(rates, 1)``.
    """
    x = _as_state(x_star)
    r = rate_vector(net, x)
    idx = net.complex_index
    cons = np.zeros(len(net.complexes))
    prod = np.zeros(len(net.complexes))
    for rx, ri in zip(net.reactions, r):
        cons[idx[rx.reactant]] += ri
        prod[idx[rx.product]] += ri
    resid = cons - prod
    max_abs = float(np.max(np.abs(resid)))
    bound = tol * max(float(np.max(r)), 1.0)
    entries = tuple(
        ComplexBalance(z, net.label(z), float(c), float(p))
        for z, c, p in zip(net.complexes, cons, prod)
    )
    return ComplexBalanceReport(entries, max_abs, max_abs <= bound, tol)


class EquilibriumCheck(NamedTuple):
    is_equilibrium: bool
    residual_norm: float


def verify_equilibrium(net: Network, x, tol: float = 1e-9) -> EquilibriumCheck:
    x = _as_state(x)
    f = rhs(net, x)
    norm = float(np.max(np.abs(f)))
    scale = 1.0 + float(np.max(rate_vector(net, x)))
    return EquilibriumCheck(norm <= tol * scale, norm)


@dataclass(frozen=True)
class ClassEquilibrium:
    point: np.ndarray
    class_anchor: np.ndarray
    newton_iterations: int
    residual_norm: float


def _float_basis(vectors: Sequence[Sequence], n: int) -> np.ndarray:
    """Columns as an n x k float array (k may be 0)."""
    if not vectors:
        return np.zeros((n, 0))
    return np.array([[float(v) for v in vec] for vec in vectors]).T


def class_equilibrium(
    net: Network,
    x_star,
    x0,
    subspace: Sequence[Sequence] | None = None,
    weights=None,
    y_init=None,
    max_iter: int = 200,
) -> ClassEquilibrium:
    """Unique positive equilibrium in the compatibility class of ``x0``.

    The equilibrium set is parametrised as ``x = x_star * exp(P y)`` with the
    columns of ``P`` spanning the orthogonal complement of the underlying
    complex-balanced network's stoichiometric subspace. The class condition
    ``P^T W (x - x0) = 0`` is the gradient of a strictly convex potential, so
    damped Newton with Armijo backtracking on that potential converges.

    ``subspace`` is a basis of ``net``'s own stoichiometric subspace (computed
    if omitted). For a network generated with producing weights ``d`` pass
    ``weights=d``: the underlying subspace is then ``D * subspace`` and the
    class constraint is weighted by ``D``.
    """
    xs = _as_state(x_star)
    a = _as_state(x0)
    n = net.n_species
    if not verify_equilibrium(net, xs, 1e-9).is_equilibrium:
        raise NotAnEquilibriumReference(f"{xs} is not an equilibrium of the network")
    if subspace is None:
        subspace = structure(net).subspace_basis
    if weights is None:
        w_exact = [1] * n
    else:
        w_exact = [linalg.as_fraction(v) for v in weights]
    underlying = [tuple(linalg.as_fraction(wj) * linalg.as_fraction(v) for wj, v in zip(w_exact, vec)) for vec in subspace]
    P = _float_basis(linalg.orthogonal_complement(underlying, n), n)
    w = np.array([float(v) for v in w_exact])

    if P.shape[1] == 0:
        return ClassEquilibrium(xs.copy(), a.copy(), 0, 0.0)

    # column scaling keeps the Newton system well conditioned
    P = P / np.linalg.norm(P, axis=0)
    target = P.T @ (w * a)
    tol = 1e-12 * (1.0 + float(np.max(np.abs(a))))

    def potential(y):
        return float(np.sum(w * xs * np.exp(P @ y)) - target @ y)

    y = np.zeros(P.shape[1]) if y_init is None else np.asarray(y_init, dtype=float)
    for it in range(max_iter + 1):
        x = xs * np.exp(P @ y)
        g = P.T @ (w * x) - target
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= tol:
            return ClassEquilibrium(x, a.copy(), it, gnorm)
        H = P.T @ ((w * x)[:, None] * P)
        step = -np.linalg.solve(H, g)
        phi0 = potential(y)
        slope = float(g @ step)
        alpha = 1.0
        while alpha > 1e-12:
            # exp overflow in a trial point just means the step is too long
            with np.errstate(over="ignore"):
                yt = y + alpha * step
                trial = potential(yt)
                gt = P.T @ (w * xs * np.exp(P @ yt)) - target
            if not np.isfinite(trial):
                alpha *= 0.5
                continue
            # near the root the potential decrease drops below rounding;
            # fall back to requiring a smaller gradient there
            if trial < phi0 + 1e-4 * alpha * slope or np.max(np.abs(gt)) <= (1 - 1e-4 * alpha) * gnorm:
                break
            alpha *= 0.5
        else:
            # no further decrease is representable; accept if already tight
            if gnorm <= 1e3 * tol:
                return ClassEquilibrium(x, a.copy(), it, gnorm)
            raise NewtonDivergence(f"line search failed at iteration {it}, |g| = {gnorm:.3e}")
        y = y + alpha * step
    raise NewtonDivergence(f"no convergence in {max_iter} Newton iterations")


def _gauss_newton(G, u, max_iter, done):
    """Damped Gauss-Newton on ``G(u) = 0`` with a central-difference Jacobian.

    Returns ``(u, iterations)``; ``u`` is None when ``done`` never holds.
    """
    val = G(u)
    for it in range(max_iter):
        if done(u):
            return u, it
        J = np.empty((val.size, u.size))
        for j in range(u.size):
            e = np.zeros(u.size)
            e[j] = 1e-7
            J[:, j] = (G(u + e) - G(u - e)) / 2e-7
        step = np.linalg.lstsq(J, -val, rcond=None)[0]
        f0 = float(val @ val)
        alpha = 1.0
        while alpha > 1e-10:
            with np.errstate(over="ignore", invalid="ignore"):
                new = G(u + alpha * step)
            if np.all(np.isfinite(new)) and float(new @ new) < f0:
                break
            alpha *= 0.5
        else:
            break
        u = u + alpha * step
        val = new
    else:
        it = max_iter
    return (u, it) if done(u) else (None, it)


def _incidence(net: Network) -> np.ndarray:
    # +1 at the reactant complex (consumption), -1 at the product complex
    idx = net.complex_index
    A = np.zeros((len(net.complexes), net.n_reactions))
    for i, rx in enumerate(net.reactions):
        A[idx[rx.reactant], i] += 1.0
        A[idx[rx.product], i] -= 1.0
    return A


def find_complex_balanced_equilibrium(net: Network, max_iter: int = 100, tol: float = 1e-12) -> np.ndarray:
    """Search for a complex-balanced equilibrium from ``ln x = 0``.

    Newton on the per-complex balance equations in log-concentration
    variables. Each equation is divided by the complex's total turnover, so
    draining every rate towards the boundary cannot fake a solution. Raises
    :class:`NewtonDivergence` when no balanced point is reached.
    """
    V, logk = net.reactant_matrix, net.log_rates
    A = _incidence(net)
    absA = np.abs(A)

    def G(u):
        r = np.exp(logk + u @ V)
        return (A @ r) / (absA @ r)

    def done(u):
        with np.errstate(over="ignore", invalid="ignore"):
            r = np.exp(logk + u @ V)
            return bool(np.all(np.isfinite(r)) and np.max(np.abs(A @ r)) <= tol * np.max(r))

    u, _ = _gauss_newton(G, np.zeros(net.n_species), max_iter, done)
    if u is None:
        raise NewtonDivergence("no complex-balanced equilibrium found from ln x = 0")
    return np.exp(u)


def solve_equilibrium_in_class(net: Network, x0, max_iter: int = 200, tol: float = 1e-10) -> ClassEquilibrium:
    """Direct damped Newton for an equilibrium in ``x0 + S``.

    Fallback for networks with no known reference equilibrium. Unknowns are
    log-concentrations; equations are each species' net rate relative to its
    turnover, plus the conservation laws of the class.
    """
    a = _as_state(x0)
    summ = structure(net)
    n = net.n_species
    Q = _float_basis(summ.orthogonal_basis, n)
    if Q.shape[1]:
        Q = np.linalg.qr(Q)[0]
    absG = np.abs(net.gamma)
    a_scale = float(np.max(a))

    def G(u):
        x = np.exp(u)
        r = rate_vector(net, x)
        return np.concatenate([(net.gamma @ r) / (absG @ r + 1e-300), Q.T @ (x - a) / a_scale])

    def done(u):
        x = np.exp(u)
        if not np.all(np.isfinite(x)) or not np.all(x > 0):
            return False
        r = rate_vector(net, x)
        ok_rates = np.all(np.abs(net.gamma @ r) <= tol * (absG @ r))
        return bool(ok_rates and np.all(np.abs(Q.T @ (x - a)) <= tol * a_scale))

    u, its = _gauss_newton(G, np.log(a), max_iter, done)
    if u is None:
        raise NewtonDivergence("direct equilibrium search did not converge")
    x = np.exp(u)
    return ClassEquilibrium(x, a.copy(), its, float(np.max(np.abs(rhs(net, x)))))
