"""Trajectory integration and simulation-based falsification.

The integrator is fixed-step classic Runge-Kutta; for linear systems an
exact propagator through the matrix exponential is available as the
reference path. The falsifier launches trajectories from boundary samples
(nudged slightly inward) and reports the first start whose trajectory
leaves the set beyond a strict band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .numerics import DEFAULT_TOLS, Tolerances, as_square, as_vector, solve_linear
from .sets import ConvexSet, inward_direction, outside_violation_batch, sample_boundary
from .systems import DynamicalSystem, LinearSystem, field_batch


@dataclass
class Trajectory:
    """Fixed-step trajectory; truncated with diverged=True if the state blew up."""

    times: np.ndarray
    states: np.ndarray
    step: float
    diverged: bool = False

    def to_csv(self, path) -> None:
        """Write one row per step: t, x1, ..., xn."""
        n = self.states.shape[1]
        header = "t," + ",".join(f"x{i + 1}" for i in range(n))
        lines = [header]
        for t, x in zip(self.times, self.states):
            lines.append(",".join("%.17g" % v for v in (t, *x)))
        text = "\n".join(lines) + "\n"
        if hasattr(path, "write"):
            path.write(text)
        else:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)


def _pade6_expm(a: np.ndarray, tols: Tolerances) -> np.ndarray:
    """Matrix exponential by sixth-order Pade with scaling and squaring."""
    n = a.shape[0]
    nrm = float(np.max(np.sum(np.abs(a), axis=1))) if n else 0.0
    squarings = max(0, int(math.ceil(math.log2(nrm / 0.5))) ) if nrm > 0.5 else 0
    a_s = a / (2.0 ** squarings)
    m = 6
    coeff = 1.0
    num = np.eye(n)
    den = np.eye(n)
    power = np.eye(n)
    for k in range(1, m + 1):
        coeff *= (m - k + 1) / (k * (2 * m - k + 1))
        power = power @ a_s
        num = num + coeff * power
        den = den + coeff * ((-1.0) ** k) * power
    # solve den @ F = num column-wise
    f = np.column_stack([solve_linear(den, num[:, j], tols) for j in range(n)]) if n else num
    for _ in range(squarings):
        f = f @ f
    return f


def expm(a, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """exp(A) for a square matrix."""
    return _pade6_expm(as_square(a, "A"), tols)


def _rk4_step(sys_field, t, x, h):
    k1 = sys_field(t, x)
    k2 = sys_field(t + 0.5 * h, x + (0.5 * h) * k1)
    k3 = sys_field(t + 0.5 * h, x + (0.5 * h) * k2)
    k4 = sys_field(t + h, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(sys: DynamicalSystem, x0, t0: float, horizon: float, step: float,
              tols: Tolerances = DEFAULT_TOLS) -> Trajectory:
    """Classic fixed-step RK4 from t0 over the horizon.

    Truncates with diverged=True when a state goes non-finite or its norm
    exceeds the divergence threshold.
    """
    x0 = as_vector(x0, "x0")
    if step <= 0.0 or horizon < step:
        raise InputError("need step > 0 and horizon >= step")
    nsteps = max(1, int(round(horizon / step)))
    times = [t0]
    states = [x0.copy()]
    x = x0.copy()
    diverged = False
    for k in range(nsteps):
        t = t0 + k * step
        x = _rk4_step(sys.field, t, x, step)
        if not np.all(np.isfinite(x)):
            diverged = True
            break
        times.append(t0 + (k + 1) * step)
        states.append(x.copy())
        if float(np.linalg.norm(x)) > tols.divergence:
            diverged = True
            break
    return Trajectory(np.array(times), np.array(states), step, diverged)


def integrate_exact(sys: LinearSystem, x0, t0: float, horizon: float, step: float,
                    tols: Tolerances = DEFAULT_TOLS) -> Trajectory:
    """Exact linear propagation x(t0 + k h) = exp(A h)^k x0."""
    x0 = as_vector(x0, "x0")
    if step <= 0.0 or horizon < step:
        raise InputError("need step > 0 and horizon >= step")
    prop = expm(sys.a * step, tols)
    nsteps = max(1, int(round(horizon / step)))
    times = [t0]
    states = [x0.copy()]
    x = x0.copy()
    diverged = False
    for k in range(nsteps):
        x = prop @ x
        if not np.all(np.isfinite(x)):
            diverged = True
            break
        times.append(t0 + (k + 1) * step)
        states.append(x.copy())
        if float(np.linalg.norm(x)) > tols.divergence:
            diverged = True
            break
    return Trajectory(np.array(times), np.array(states), step, diverged)


def _nudged_starts(s: ConvexSet, points, tols: Tolerances) -> list[np.ndarray]:
    """Push boundary points slightly inside; exact boundary starts can flag
    spurious instant exits under floating point."""
    out = []
    for bp in points:
        x = bp.point
        d = inward_direction(s, bp)
        if d is not None:
            cand = x + tols.inward_push * (1.0 + float(np.linalg.norm(x))) * d
            if outside_violation_batch(s, cand.reshape(-1, 1), tols)[0] == 0.0:
                out.append(cand)
                continue
        out.append(x.copy())
    return out


def falsify(s: ConvexSet, sys: DynamicalSystem, n_starts: int, horizon: float,
            step: float, seed: int, extra_starts=None, t0: float = 0.0,
            tols: Tolerances = DEFAULT_TOLS):
    """Search for a trajectory that leaves the set.

    Integrates from boundary samples (and any extra starts, tried first);
    returns (x0, t_exit) for the lowest-index start whose violation exceeds
    the strict exit band within the horizon, or None if no exit is seen.
    Deterministic for a given seed.
    """
    samples = sample_boundary(s, n_starts, seed, tols)
    starts: list[np.ndarray] = []
    if extra_starts is not None:
        from .sets import BoundaryPoint  # local alias for wrapping raw points

        wrapped = [p if isinstance(p, BoundaryPoint) else BoundaryPoint(as_vector(p, "x0"), None)
                   for p in extra_starts]
        starts.extend(_nudged_starts(s, wrapped, tols))
    starts.extend(_nudged_starts(s, samples, tols))
    if not starts:
        return None
    nsteps = max(1, int(round(horizon / step)))
    band = tols.exit_band

    rk4_map = None
    if isinstance(sys, LinearSystem):
        # for a linear field the RK4 update is exactly the degree-4 Taylor
        # polynomial of exp(hA), so one matmul advances the whole batch
        a = sys.a
        n = a.shape[0]
        rk4_map = np.eye(n)
        power = np.eye(n)
        fact = 1.0
        for k in range(1, 5):
            power = power @ (step * a)
            fact *= k
            rk4_map = rk4_map + power / fact

    x0_all = np.column_stack(starts)
    n_cols = x0_all.shape[1]
    exit_time = np.full(n_cols, np.inf)
    best = n_cols  # columns with index >= best can no longer win
    cur = x0_all.copy()
    idx_map = np.arange(n_cols)
    div2 = tols.divergence ** 2
    for k in range(nsteps):
        if idx_map.size == 0:
            break
        t_now = t0 + k * step
        if rk4_map is not None:
            cur = rk4_map @ cur
        else:
            cur = _rk4_step(lambda tt, xx: field_batch(sys, tt, xx), t_now, cur, step)
        finite = np.all(np.isfinite(cur), axis=0)
        if not np.all(finite):
            cur[:, ~finite] = 0.0
        viol = outside_violation_batch(s, cur, tols)
        exited = (viol > band) & finite
        if np.any(exited):
            hit_idx = idx_map[exited]
            exit_time[hit_idx] = (k + 1) * step
            best = min(best, int(hit_idx[0]))
        keep = finite & ~exited & (np.einsum("ij,ij->j", cur, cur) <= div2)
        keep &= idx_map < best
        if not np.all(keep):
            cur = cur[:, keep]
            idx_map = idx_map[keep]
    if best < n_cols:
        return x0_all[:, best].copy(), float(exit_time[best])
    return None
