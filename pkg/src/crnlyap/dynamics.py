"""Mass-action kinetics: rates, vector field, Jacobian, integration.

The integrator is the Dormand-Prince 5(4) pair with local extrapolation and
a positivity guard: any step whose stages or result leave the open positive
orthant is rejected and halved. Samples between accepted steps come from
cubic Hermite interpolation using the end-point derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeConcentration, NonPositiveInitial, StepSizeUnderflow
from .network import Network


def _as_state(x, allow_boundary: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(~np.isfinite(x)):
        raise NegativeConcentration(f"concentrations must be nonnegative and finite, got {x}")
    if not allow_boundary and np.any(x == 0):
        raise NegativeConcentration(f"state must be strictly positive, got {x}")
    return x


def is_boundary(x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= 0) and np.any(x == 0))


def log_monomials(net: Network, x: np.ndarray) -> np.ndarray:
    """ln(k_i x^{v_i}) for strictly positive x; x may be (n,) or (m, n)."""
    return net.log_rates + np.log(x) @ net.reactant_matrix


def rate_vector(net: Network, x) -> np.ndarray:
    """Mass-action rates ``k_i * prod_j x_j**v_ji`` with ``0**0 == 1``."""
    x = _as_state(x, allow_boundary=True)
    if np.all(x > 0):
        return np.exp(log_monomials(net, x))
    V = net.reactant_matrix
    with np.errstate(divide="ignore", invalid="ignore"):
        lx = np.log(x)
        # 0 * (-inf) must contribute nothing
        terms = np.where(V == 0, 0.0, V * lx[:, None])
    return net.rates * np.exp(terms.sum(axis=0))


def rhs(net: Network, x) -> np.ndarray:
    return net.gamma @ rate_vector(net, x)


def jacobian(net: Network, x) -> np.ndarray:
    x = _as_state(x)
    r = rate_vector(net, x)
    # d rate_m / d x_j = v_jm * rate_m / x_j
    dR = (net.reactant_matrix * r[None, :]) / x[:, None]
    return net.gamma @ dR.T


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), n)
    accepted: int = 0
    rejected: int = 0

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def scaled(self, factors) -> "Trajectory":
        """Componentwise rescaling, e.g. ``x -> D^-1 x``."""
        f = np.asarray(factors, dtype=float)
        return Trajectory(self.times.copy(), self.states * f, self.accepted, self.rejected)

    def to_csv(self, species, extra: dict[str, np.ndarray] | None = None) -> str:
        header = ["t", *species, *(extra or {})]
        cols = [self.times, *self.states.T, *(extra or {}).values()]
        lines = [",".join(header)]
        for row in zip(*cols):
            lines.append(",".join(format(float(v), ".17g") for v in row))
        return "\n".join(lines) + "\n"


# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_E = _B - np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def integrate(
    net: Network,
    x0,
    t_end: float,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    max_step: float | None = None,
    sample_every: float | None = None,
) -> Trajectory:
    """Integrate ``dx/dt = Gamma R(x)`` from ``x0`` over ``[0, t_end]``.

    With ``sample_every`` the trajectory holds states at multiples of it
    (plus ``t_end``); otherwise it holds every accepted step.
    """
    y = np.asarray(x0, dtype=float)
    if y.shape != (net.n_species,):
        raise NonPositiveInitial(f"initial state must have {net.n_species} entries")
    if not np.all(y > 0) or not np.all(np.isfinite(y)):
        raise NonPositiveInitial(f"initial state must be strictly positive, got {y}")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    if max_step is None:
        max_step = t_end / 10
    if sample_every is not None and sample_every <= 0:
        raise ValueError("sample_every must be positive")

    G, V, logk = net.gamma, net.reactant_matrix, net.log_rates

    def f(state):
        return G @ np.exp(logk + np.log(state) @ V)

    h_min = 1e-14 * t_end
    if sample_every is not None:
        n_samples = int(math.floor(t_end / sample_every + 1e-9))
        grid = [k * sample_every for k in range(n_samples + 1)]
        if t_end - grid[-1] > 1e-12 * t_end:
            grid.append(t_end)
        else:
            grid[-1] = t_end
        next_sample = 1
    times = [0.0]
    states = [y.copy()]

    t = 0.0
    fy = f(y)
    # initial step from the local scale of the solution
    scale = abs_tol + rel_tol * np.abs(y)
    d0, d1 = np.max(np.abs(y) / scale), np.max(np.abs(fy) / scale)
    h = 0.01 * d0 / d1 if d1 > 1e-10 and d0 > 1e-10 else 1e-6 * t_end
    h = min(h, max_step, t_end)
    accepted = rejected = 0
    K = np.empty((7, y.size))

    while t < t_end:
        if t + h > t_end or t_end - (t + h) < h_min:
            h = t_end - t
        if h < h_min:
            raise StepSizeUnderflow(f"step size {h:.3e} below {h_min:.3e} at t={t:.6g}")
        K[0] = fy
        ok = True
        for i in range(1, 7):
            stage = y + h * (np.asarray(_A[i]) @ K[:i])
            if not np.all(stage > 0):
                ok = False
                break
            K[i] = f(stage)
            if i == 5:
                stage6 = stage
        if ok:
            y_new = y + h * (_B @ K)
            ok = bool(np.all(y_new > 0))
        if not ok:
            rejected += 1
            h *= 0.5
            continue
        err_vec = h * (_E @ K)
        tol = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.max(np.abs(err_vec) / tol))
        if err > 1.0:
            rejected += 1
            h *= max(0.2, 0.9 * err ** -0.2)
            continue

        t_new = t + h
        f_new = K[6]  # FSAL
        if sample_every is None:
            times.append(t_new)
            states.append(y_new.copy())
        else:
            pending = []
            j = next_sample
            while j < len(grid) and grid[j] <= t_new + 1e-12 * t_end:
                ts = grid[j]
                ys = y_new.copy() if abs(ts - t_new) <= 1e-12 * t_end else _hermite(t, y, fy, t_new, y_new, f_new, ts)
                pending.append((ts, ys))
                j += 1
            if any(not np.all(ys > 0) for _, ys in pending):
                rejected += 1
                h *= 0.5
                continue
            for ts, ys in pending:
                times.append(ts)
                states.append(ys)
            next_sample = j

        accepted += 1
        t, y, fy = t_new, y_new, f_new
        if t_end - t <= 1e-12 * t_end:
            t = t_end
        fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h = min(h * fac, max_step)
        # Keep h * rho(J) inside the stability region (boundary ~3.3 on the
        # real axis); otherwise roundoff near an attracting equilibrium
        # grows until the error control notices it.
        dy = np.linalg.norm(y_new - stage6)
        if dy > 0:
            rho = np.linalg.norm(K[6] - K[5]) / dy
            if rho > 0:
                h = min(h, 3.0 / rho)

    return Trajectory(np.array(times), np.array(states), accepted, rejected)
