"""Classical fixed-step RK4 with trajectory storage and order diagnostics.

Fixed step only: the verification harness needs reproducible, bitwise
deterministic runs, not adaptive efficiency.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BlowUpError, DomainExitError, ErrorFloorError
from .fields import TDependentVectorField

DEFAULT_STEP = 1e-3


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled solution curve; the last interval may be shorter."""

    times: np.ndarray
    states: np.ndarray
    step: float

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.states, dtype=float)
        if t.ndim != 1 or x.ndim != 2 or t.size != x.shape[0]:
            raise ValueError("times and states must be aligned 1-d / 2-d arrays")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        t.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", x)

    def __len__(self) -> int:
        return self.times.size

    @property
    def state_dim(self) -> int:
        return self.states.shape[1]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()


def _time_grid(t0: float, t1: float, h: float) -> np.ndarray:
    n_full = int(np.floor((t1 - t0) / h + 1e-9))
    times = t0 + h * np.arange(n_full + 1)
    if times[-1] < t1 - 1e-9 * h:
        times = np.append(times, t1)
    else:
        times[-1] = t1  # land on t1 exactly, absorbing grid roundoff
    return times


def integrate(F: TDependentVectorField, x0, t0: float, t1: float,
              h: float = DEFAULT_STEP) -> Trajectory:
    """Classical 4th-order Runge-Kutta from t0 to t1 (reached exactly)."""
    x0 = np.asarray(x0, dtype=float)
    if x0.size != F.dim:
        raise ValueError(f"initial state must have dimension {F.dim}")
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    if not 0.0 < h <= t1 - t0:
        raise ValueError("need 0 < h <= t1 - t0")
    if F.domain is not None and not F.domain(x0):
        raise DomainExitError(t0, "initial state outside domain")

    times = _time_grid(t0, t1, h)
    states = np.empty((times.size, x0.size))
    states[0] = x0
    x = x0.copy()
    for k in range(times.size - 1):
        t = times[k]
        dt = times[k + 1] - t
        k1 = F(t, x)
        k2 = F(t + 0.5 * dt, x + 0.5 * dt * k1)
        k3 = F(t + 0.5 * dt, x + 0.5 * dt * k2)
        k4 = F(t + dt, x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise BlowUpError(times[k + 1], partial=_partial(times, states, k, h))
        if F.domain is not None and not F.domain(x):
            raise DomainExitError(times[k + 1],
                                  partial=_partial(times, states, k, h))
        states[k + 1] = x
    return Trajectory(times, states, h)


def _partial(times, states, k, h):
    # samples up to the last accepted step; reported alongside guard exits
    if k < 1:
        return None
    return Trajectory(times[:k + 1].copy(), states[:k + 1].copy(), h)


def interpolate(traj: Trajectory, t: float) -> np.ndarray:
    """Piecewise-linear interpolation; bitwise exact at stored sample times."""
    times = traj.times
    if t < times[0] or t > times[-1]:
        raise ValueError(f"t out of range: {t} not in [{times[0]}, {times[-1]}]")
    idx = int(np.searchsorted(times, t))
    if idx < times.size and times[idx] == t:
        return traj.states[idx].copy()
    lo, hi = idx - 1, idx
    w = (t - times[lo]) / (times[hi] - times[lo])
    return (1.0 - w) * traj.states[lo] + w * traj.states[hi]


def convergence_order(F: TDependentVectorField, x0, t0: float, t1: float,
                      h: float) -> float:
    """log2 of the terminal-error ratio between steps h and h/2.

    The h/4 run serves as the reference; the expected value for a smooth
    problem is log2((1 - 4^-4)/(2^-4 - 4^-4)) = log2(17) ~ 4.09.
    """
    ref = integrate(F, x0, t0, t1, h / 4.0).final_state
    e1 = float(np.max(np.abs(integrate(F, x0, t0, t1, h).final_state - ref)))
    e2 = float(np.max(np.abs(integrate(F, x0, t0, t1, h / 2.0).final_state - ref)))
    if e2 < 1e-14:
        raise ErrorFloorError("error floor reached")
    return float(np.log2(e1 / e2))


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write header ``t,x1,...,xN`` and one row per sample, 17 significant digits."""
    path = Path(path)
    cols = ",".join(f"x{i + 1}" for i in range(traj.state_dim))
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"t,{cols}\n")
        for t, row in zip(traj.times, traj.states):
            vals = ",".join(f"{v:.17g}" for v in row)
            fh.write(f"{t:.17g},{vals}\n")
