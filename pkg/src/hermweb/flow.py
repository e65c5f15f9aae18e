"""Chern-Ricci flow d omega / dt = -Ric(omega) with adaptive RK2 stepping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric import HermitianMetricField, is_positive_definite, ricci_tensor


class FlowError(RuntimeError):
    pass


@dataclass(frozen=True)
class FlowState:
    t: float
    g: HermitianMetricField
    ricci_norm: float


@dataclass(frozen=True)
class FlowHistoryRow:
    t: float
    dt: float
    ricci_norm: float


def flow_state(g: HermitianMetricField, t: float = 0.0) -> FlowState:
    return FlowState(t, g, float(np.max(np.abs(ricci_tensor(g)))))


def flow_step(state: FlowState, dt: float) -> FlowState:
    """One explicit midpoint (RK2) step; rejects steps losing positivity."""
    if dt <= 0:
        raise FlowError("dt must be positive")
    g = state.g.g
    k1 = -ricci_tensor(state.g)
    g_mid = g + (0.5 * dt) * k1
    if not is_positive_definite(g_mid):
        raise FlowError(f"positivity violated at midpoint; halve dt ({dt:g})")
    k2 = -ricci_tensor(HermitianMetricField(state.g.grid, g_mid))
    g_new = g + dt * k2
    if not is_positive_definite(g_new):
        raise FlowError(f"positivity violated; halve dt ({dt:g})")
    return flow_state(HermitianMetricField(state.g.grid, g_new), state.t + dt)


def run_flow(
    g0: HermitianMetricField,
    tol: float,
    dt0: float,
    max_steps: int,
    min_dt: float = 1e-12,
) -> tuple[FlowState, list[FlowHistoryRow]]:
    """Iterate until the max-norm of Ric drops below tol.

    dt halves on a rejected step (positivity loss or Ricci-norm increase) and
    grows by 1.1x on success, capped at dt0.
    """
    if tol <= 0:
        raise FlowError("tol must be positive")
    state = flow_state(g0)
    history = [FlowHistoryRow(state.t, 0.0, state.ricci_norm)]
    dt = dt0
    steps = 0
    while state.ricci_norm > tol:
        if steps >= max_steps:
            raise FlowError(
                f"step cap {max_steps} exceeded (ricci_norm {state.ricci_norm:.3e})"
            )
        try:
            new = flow_step(state, dt)
        except FlowError:
            new = None
        if new is None or new.ricci_norm > state.ricci_norm:
            dt *= 0.5
            if dt < min_dt:
                raise FlowError("dt underflow; flow is not contracting")
            continue
        state = new
        steps += 1
        history.append(FlowHistoryRow(state.t, dt, state.ricci_norm))
        dt = min(dt * 1.1, dt0)
    return state, history
