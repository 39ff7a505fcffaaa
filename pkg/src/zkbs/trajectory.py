"""Trajectory container shared by the linear and nonlinear integrators.

A Trajectory stores scalar diagnostics densely (one value per step
boundary, plus one value per step interval for the quantities that feed
the energy audits) and spectral snapshots at a caller-chosen stride.
The audit quadrature works from the dense scalar series, so memory does
not grow with snapshot resolution.

Midpoint-interval series (mid_*) hold the audit integrands evaluated on
the averaged state (u_n + u_{n+1}) / 2, which is how the midpoint time
rule is realized on a trajectory that is only known at step boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import log

import numpy as np

from .domain import DomainConfig

__all__ = ["Trajectory", "EnergyReport", "attach_refinement_order"]


@dataclass(eq=False)
class Trajectory:
    domain: DomainConfig
    scheme: str
    times: np.ndarray                 # (n+1,) step boundaries, strictly increasing
    l2: np.ndarray                    # (n+1,) L2 norm
    h1: np.ndarray                    # (n+1,) full H1 norm
    h2: np.ndarray                    # (n+1,) full H2 norm
    diss_l2: np.ndarray               # (n+1,) integral u_x^2 + u_y^2
    diss_h1: np.ndarray               # (n+1,) integral u_xx^2 + 2 u_xy^2 + u_yy^2
    e2_mixed: np.ndarray              # (n+1,) integral u_xx^2 + u_xy^2 + u_yy^2
    nonlin_flux: np.ndarray           # (n+1,) integral g_h(u) u_x
    step_iters: np.ndarray            # (n+1,) iterations spent entering this boundary
    mid_diss0: np.ndarray             # (n,) integral |Du|^2 at averaged states
    mid_diss1: np.ndarray             # (n,) integral u_xx^2 + 2 u_xy^2 + u_yy^2, averaged states
    mid_diss2: np.ndarray             # (n,) third-order dissipation integral, averaged states
    snapshot_indices: np.ndarray      # indices into times
    snapshots: list                   # spectral coefficient arrays, complex (nx, ny)
    cube: np.ndarray | None = None            # (n+1,) integral u^3 (nonlinear runs)
    mid_rhs_h1: np.ndarray | None = None      # (n,) 2 integral u u_x (u_xx + u_yy)
    mid_rhs_h2: np.ndarray | None = None      # (n,) second-order forcing pairing
    mid_u2lap: np.ndarray | None = None       # (n,) integral u^2 (u_xx + u_yy)
    blowup_time: float | None = None

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def lyapunov_h1(self) -> np.ndarray:
        """integral |Du|^2 + u^2 at step boundaries."""
        return self.diss_l2 + self.l2**2

    @property
    def lyapunov_h2(self) -> np.ndarray:
        """integral |D2 u|^2 + |Du|^2 + u^2 at step boundaries."""
        return self.e2_mixed + self.diss_l2 + self.l2**2

    def snapshot(self, i: int) -> np.ndarray:
        """Spectral snapshot by position in the stored list."""
        return self.snapshots[i]

    def cumulative_midpoint(self, mid_values: np.ndarray) -> np.ndarray:
        """Running midpoint-rule integral of a per-interval series.

        Entry i approximates the integral from times[0] to times[i].
        """
        out = np.empty(len(mid_values) + 1)
        out[0] = 0.0
        np.cumsum(mid_values * self.dt, out=out[1:])
        return out


@dataclass
class EnergyReport:
    """Residual history of one energy balance audit."""

    identity: str
    times: np.ndarray
    residual: np.ndarray
    max_residual: float
    dt: float
    order: float | None = None          # filled by attach_refinement_order
    dt_pair: tuple[float, float] | None = None


def attach_refinement_order(coarse: EnergyReport, fine: EnergyReport) -> EnergyReport:
    """Annotate the fine report with the observed refinement order.

    Both reports must audit the same identity; the order is
    log(residual ratio) / log(dt ratio).
    """
    if coarse.identity != fine.identity:
        raise ValueError("refinement pair must audit the same identity")
    if not (coarse.dt > fine.dt > 0):
        raise ValueError("expected coarse.dt > fine.dt > 0")
    order = log(coarse.max_residual / fine.max_residual) / log(coarse.dt / fine.dt)
    return replace(fine, order=order, dt_pair=(coarse.dt, fine.dt))
