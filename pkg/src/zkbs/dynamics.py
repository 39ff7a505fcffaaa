"""Nonlinear dynamics: regularized flux, pseudospectral stepping, Picard.

The nonlinear term of u_t + u_xxx + u_xyy + u u_x - delta (u_xx + u_yy) = 0
is treated pseudospectrally as -d/dx g_h(u): transform to the grid, apply
the flux pointwise, transform back, multiply by -i xi, and (by default)
zero the upper third of both mode ranges so quadratic products cannot
alias onto retained modes.

g_h is the regularized flux

    g_h(u) = integral_0^u [ theta eta(2 - h |theta|)
                            + (2 sign(theta) / h) eta(h |theta| - 1) ] d theta,

built from the smooth ramp eta below.  It equals u^2/2 exactly for
|u| <= 1/h, grows linearly with slope 2/h for |u| >= 2/h, and is glued
smoothly in between; both bounds |g_h'| <= 2/h and |g_h'| <= 2|u| hold
everywhere.  The unregularized flux u^2/2 is selected with h = None.

Two steppers share the exponential tables: a second-order exponential
predictor-corrector (etd2) and a per-step fixed-point iteration
(picard).  picard_solve additionally runs the whole-window iteration
v -> S(t) u0 + Duhamel[-d/dx g_h(v)] that mirrors the contraction
argument behind local existence, reporting the successive-difference
ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _integrate

from .domain import (
    DomainConfig,
    GridField,
    SpectralField,
    dealias_mask,
    grid_quadrature,
    mode_multipliers,
    to_grid,
    to_spectral,
)
from .semigroup import SymbolTable, phi, symbol
from .trajectory import Trajectory

__all__ = [
    "eta",
    "CutoffEta",
    "RegularizedFlux",
    "g_h",
    "StepperConfig",
    "BlowupError",
    "ContractionError",
    "PicardDiagnostics",
    "nonlinear_term",
    "etd2_step",
    "picard_solve",
    "simulate",
]

BLOWUP_GUARD = 1e6


class BlowupError(RuntimeError):
    """Raised when a run leaves the trust region; carries the time."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} at t = {t:.6g}")
        self.t = t


class ContractionError(RuntimeError):
    pass


def eta(x):
    """Smooth ramp: 0 for x <= 0, 1 for x >= 1, C-infinity glue between.

    Built from s(x) = exp(-1/x) as s(x) / (s(x) + s(1-x)), which makes
    eta(x) + eta(1 - x) = 1 hold to rounding.
    """
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    lo = arr <= 0.0
    hi = arr >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    xm = arr[mid]
    a = np.exp(-1.0 / xm)
    b = np.exp(-1.0 / (1.0 - xm))
    out[mid] = a / (a + b)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


class CutoffEta:
    """Callable wrapper around eta, kept for symmetry with the flux type."""

    def __call__(self, x):
        return eta(x)


# Band integrand after the substitution theta = (1 + sigma) / h; the band
# contribution to g_h is then h^{-2} * integral_0^{h|u|-1} of this.
def _band_integrand(sigma):
    return (1.0 + sigma) * eta(1.0 - sigma) + 2.0 * eta(sigma)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)


def _band_integral(s):
    """J(s) = integral_0^s of the band integrand, vectorized Gauss rule."""
    s = np.asarray(s, dtype=float)
    half = 0.5 * s[..., None]
    nodes = half * (_GL_NODES + 1.0)
    vals = _band_integrand(nodes)
    return half[..., 0] * np.sum(vals * _GL_WEIGHTS, axis=-1)


@dataclass(frozen=True)
class RegularizedFlux:
    """Flux g_h with cutoff scale h in (0, 1], or unregularized when h is None."""

    h: float | None = None

    def __post_init__(self):
        if self.h is not None and not (0.0 < self.h <= 1.0):
            raise ValueError("cutoff scale h must lie in (0, 1]")

    @property
    def regularized(self) -> bool:
        return self.h is not None

    def __call__(self, u):
        """Pointwise flux values; vectorized over arrays."""
        arr = np.asarray(u, dtype=float)
        scalar = arr.ndim == 0
        if self.h is None:
            out = 0.5 * arr**2
            return float(out) if scalar else out
        h = self.h
        arr = np.atleast_1d(arr)
        a = np.abs(arr)
        out = 0.5 * arr**2
        band = a > 1.0 / h
        if np.any(band):
            ab = np.minimum(a[band], 2.0 / h)
            vals = 0.5 / h**2 + _band_integral(h * ab - 1.0) / h**2
            tail = a[band] - 2.0 / h
            vals = vals + (2.0 / h) * np.where(tail > 0.0, tail, 0.0)
            out[band] = vals
        return float(out[0]) if scalar else out

    def prime(self, u):
        """Pointwise derivative g_h'."""
        arr = np.asarray(u, dtype=float)
        if self.h is None:
            return float(arr) if arr.ndim == 0 else arr.copy()
        h = self.h
        a = np.abs(arr)
        out = arr * eta(2.0 - h * a) + (2.0 / h) * np.sign(arr) * eta(h * a - 1.0)
        return float(out) if arr.ndim == 0 else out


def g_h(u: float, flux: RegularizedFlux, quad_tol: float = 1e-12) -> float:
    """Scalar flux value with adaptive quadrature on the transition band.

    Closed forms cover |u| <= 1/h (parabola) and |u| >= 2/h (linear tail);
    the glue region integrates the defining integrand with scipy's
    adaptive rule at absolute tolerance quad_tol.  The vectorized
    RegularizedFlux.__call__ agrees with this to well below 1e-11.
    """
    if flux.h is None:
        return 0.5 * float(u) ** 2
    h = flux.h
    a = abs(float(u))
    if a <= 1.0 / h:
        return 0.5 * float(u) ** 2
    val = 0.5 / h**2
    hi = min(a, 2.0 / h)
    band, _ = _integrate.quad(
        lambda th: th * eta(2.0 - h * th) + (2.0 / h) * eta(h * th - 1.0),
        1.0 / h,
        hi,
        epsabs=quad_tol,
        epsrel=1e-13,
        limit=200,
    )
    val += band
    if a > 2.0 / h:
        val += (2.0 / h) * (a - 2.0 / h)
    return val


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping options shared by the production schemes."""

    scheme: str = "etd2"          # "etd2" | "picard"
    dt: float = 1e-3
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    dealias: bool = True

    def __post_init__(self):
        if self.scheme not in ("etd2", "picard"):
            raise ValueError("scheme must be 'etd2' or 'picard'")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.picard_tol <= 0 or self.picard_max_iter < 1:
            raise ValueError("picard_tol must be > 0 and picard_max_iter >= 1")


@dataclass
class PicardDiagnostics:
    """Successive-difference history of a fixed-point solve."""

    iterations: int
    diffs: np.ndarray       # max-over-window L2 distance between iterates
    ratios: np.ndarray      # diffs[k] / diffs[k-1]
    n_steps: int
    dt: float
    converged: bool


def _nonlinear_core(coeffs: np.ndarray, flux: RegularizedFlux, d: DomainConfig,
                    mask: np.ndarray | None, t: float = 0.0):
    """Shared pseudospectral evaluation; returns (grid values, N coefficients)."""
    vals = to_grid(SpectralField(coeffs), d).values
    g = flux(vals)
    if not np.all(np.isfinite(g)):
        raise BlowupError("non-finite grid values in nonlinear term", t)
    ghat = to_spectral(GridField(g), d).coeffs
    n = -1j * d.xi_odd[:, None] * ghat
    if mask is not None:
        n = np.where(mask, n, 0.0)
    return vals, n


def nonlinear_term(u: SpectralField, flux: RegularizedFlux, cfg: StepperConfig,
                   d: DomainConfig) -> SpectralField:
    """-d/dx g_h(u) evaluated pseudospectrally (dealiased per cfg)."""
    mask = dealias_mask(d) if cfg.dealias else None
    _, n = _nonlinear_core(np.asarray(u.coeffs, dtype=complex), flux, d, mask)
    return SpectralField(n)


def _etd2_tables(S: SymbolTable, dt: float):
    z = S.m * dt
    return np.exp(z), dt * phi(1, z), dt * phi(2, z)


def etd2_step(u: SpectralField, cfg: StepperConfig, flux: RegularizedFlux,
              S: SymbolTable) -> SpectralField:
    """One exponential predictor-corrector step of size cfg.dt."""
    d = S.domain
    E, hp1, hp2 = _etd2_tables(S, cfg.dt)
    mask = dealias_mask(d) if cfg.dealias else None
    u0 = np.asarray(u.coeffs, dtype=complex)
    _, n0 = _nonlinear_core(u0, flux, d, mask)
    a = E * u0 + hp1 * n0
    _, na = _nonlinear_core(a, flux, d, mask)
    return SpectralField(a + hp2 * (na - n0))


def picard_solve(u0: SpectralField, t0: float, cfg: StepperConfig,
                 flux: RegularizedFlux, S: SymbolTable):
    """Whole-window fixed point of v -> semigroup + Duhamel[nonlinear(v)].

    The window [0, t0] is cut into steps of cfg.dt (rounded to divide t0)
    and the iterate is stored at every boundary.  Each sweep rebuilds the
    trajectory from the current iterate's nonlinear term under the
    endpoint-pair exponential quadrature, so the fixed point is a
    second-order discretization of the flow.

    Returns (field at t0, PicardDiagnostics).  Raises ContractionError
    when the successive differences fail to drop below cfg.picard_tol
    within cfg.picard_max_iter sweeps.
    """
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    d = S.domain
    n = max(1, round(t0 / cfg.dt))
    dt = t0 / n
    z = S.m * dt
    E = np.exp(z)
    hp1 = dt * phi(1, z)
    hp2 = dt * phi(2, z)
    mask = dealias_mask(d) if cfg.dealias else None
    W = d.parseval_weight

    base = np.asarray(u0.coeffs, dtype=complex)
    if mask is not None:
        base = np.where(mask, base, 0.0)

    # sweep 0: pure semigroup transport of the data
    v = np.empty((n + 1,) + d.shape, dtype=complex)
    v[0] = base
    for i in range(n):
        v[i + 1] = E * v[i]

    diffs: list[float] = []
    converged = False
    for _ in range(cfg.picard_max_iter):
        nl = np.empty_like(v)
        for i in range(n + 1):
            _, nl[i] = _nonlinear_core(v[i], flux, d, mask, t=i * dt)
        w = np.empty_like(v)
        w[0] = base
        for i in range(n):
            w[i + 1] = E * w[i] + hp1 * nl[i] + hp2 * (nl[i + 1] - nl[i])
        diff = math.sqrt(W * float(np.max(np.sum(np.abs(w - v) ** 2, axis=(1, 2)))))
        diffs.append(diff)
        v = w
        if diff < cfg.picard_tol:
            converged = True
            break
    diffs_arr = np.array(diffs)
    ratios = diffs_arr[1:] / np.where(diffs_arr[:-1] > 0.0, diffs_arr[:-1], np.inf)
    diag = PicardDiagnostics(
        iterations=len(diffs),
        diffs=diffs_arr,
        ratios=ratios,
        n_steps=n,
        dt=dt,
        converged=converged,
    )
    if not converged:
        raise ContractionError(
            "contraction failed, reduce t0 (successive differences stalled at "
            f"{diffs_arr[-1]:.3e} after {len(diffs)} sweeps)"
        )
    return SpectralField(v[n]), diag


def simulate(u0: GridField, T: float, cfg: StepperConfig, flux: RegularizedFlux,
             d: DomainConfig, snapshot_stride: int = 0,
             guard_factor: float = BLOWUP_GUARD) -> Trajectory:
    """Integrate the full equation and record diagnostics every step.

    Per-boundary diagnostics: L2/H1/H2 norms, the two dissipation
    integrals, the mixed second-derivative energy, integral u^3, the
    nonlinear flux integral g_h(u) u_x, and iteration counts.  Per-interval
    series evaluate the audit integrands on averaged states (midpoint
    rule).  Snapshots are stored every snapshot_stride steps (0 keeps only
    the endpoints).

    On blowup (L2 norm above guard_factor times its initial value, or
    non-finite grid values) the trajectory is truncated and its
    blowup_time is set.
    """
    S = symbol(d)
    nsteps = _resolve_nsteps(T, cfg.dt)
    dt = cfg.dt
    E, hp1, hp2 = _etd2_tables(S, dt)
    mask = dealias_mask(d) if cfg.dealias else None
    mults = mode_multipliers(d)
    W = d.parseval_weight
    wh1 = 1.0 + mults.d1
    lap = -mults.d1  # spectral Laplacian multiplier

    u = to_spectral(u0, d).coeffs
    if mask is not None:
        u = np.where(mask, u, 0.0)

    times = dt * np.arange(nsteps + 1)
    cols = {name: np.empty(nsteps + 1) for name in
            ("l2", "h1", "h2", "diss_l2", "diss_h1", "e2_mixed", "cube", "nonlin_flux")}
    step_iters = np.zeros(nsteps + 1, dtype=int)
    mid = {name: np.zeros(nsteps) for name in
           ("diss0", "diss1", "diss2", "rhs_h1", "rhs_h2", "u2lap")}
    snaps: list[np.ndarray] = []
    snap_idx: list[int] = []

    def record_boundary(i: int, coeffs: np.ndarray, vals: np.ndarray,
                        nl_grid_flux: float) -> None:
        a2 = np.abs(coeffs) ** 2
        cols["l2"][i] = math.sqrt(W * float(np.sum(a2)))
        cols["h1"][i] = math.sqrt(W * float(np.sum(wh1 * a2)))
        cols["h2"][i] = math.sqrt(W * float(np.sum(wh1**2 * a2)))
        cols["diss_l2"][i] = W * float(np.sum(mults.d1 * a2))
        cols["diss_h1"][i] = W * float(np.sum(mults.d2 * a2))
        cols["e2_mixed"][i] = W * float(np.sum(mults.e2 * a2))
        cols["cube"][i] = grid_quadrature(vals**3, d)
        cols["nonlin_flux"][i] = nl_grid_flux
        if (snapshot_stride > 0 and i % snapshot_stride == 0) or i in (0, nsteps):
            snap_idx.append(i)
            snaps.append(coeffs.copy())

    def flux_integral(coeffs: np.ndarray, vals: np.ndarray) -> float:
        ux = to_grid(SpectralField(1j * d.xi_odd[:, None] * coeffs), d).values
        return grid_quadrature(flux(vals) * ux, d)

    guard = guard_factor * math.sqrt(W * float(np.sum(np.abs(u) ** 2)))
    blowup_time = None
    i = 0
    try:
        vals, n0 = _nonlinear_core(u, flux, d, mask, t=0.0)
        record_boundary(0, u, vals, flux_integral(u, vals))
        while i < nsteps:
            t = times[i]
            if cfg.scheme == "etd2":
                a = E * u + hp1 * n0
                _, na = _nonlinear_core(a, flux, d, mask, t=t + dt)
                u_next = a + hp2 * (na - n0)
                iters = 1
            else:
                u_next = E * u + hp1 * n0  # exponential Euler predictor
                iters = 0
                while True:
                    _, nn = _nonlinear_core(u_next, flux, d, mask, t=t + dt)
                    cand = E * u + hp1 * n0 + hp2 * (nn - n0)
                    change = math.sqrt(W * float(np.sum(np.abs(cand - u_next) ** 2)))
                    u_next = cand
                    iters += 1
                    if change < cfg.picard_tol:
                        break
                    if iters >= cfg.picard_max_iter:
                        raise ContractionError(
                            "contraction failed, reduce t0 (per-step fixed point "
                            f"stalled at {change:.3e}, t = {t + dt:.6g})"
                        )
            norm_next = math.sqrt(W * float(np.sum(np.abs(u_next) ** 2)))
            if not math.isfinite(norm_next) or norm_next > guard:
                raise BlowupError("L2 norm left the trust region", t + dt)

            uavg = 0.5 * (u + u_next)
            aavg = np.abs(uavg) ** 2
            mid["diss0"][i] = W * float(np.sum(mults.d1 * aavg))
            mid["diss1"][i] = W * float(np.sum(mults.d2 * aavg))
            mid["diss2"][i] = W * float(np.sum(mults.d3 * aavg))
            vals_avg, n_avg = _nonlinear_core(uavg, flux, d, mask, t=t + 0.5 * dt)
            pair = (np.conj(uavg) * n_avg).real
            mid["rhs_h1"][i] = 2.0 * W * float(np.sum(mults.d1 * pair))
            mid["rhs_h2"][i] = 2.0 * W * float(np.sum(mults.e2 * pair))
            lap_avg = to_grid(SpectralField(lap * uavg), d).values
            mid["u2lap"][i] = grid_quadrature(vals_avg**2 * lap_avg, d)

            u = u_next
            i += 1
            step_iters[i] = iters
            vals, n0 = _nonlinear_core(u, flux, d, mask, t=times[i])
            record_boundary(i, u, vals, flux_integral(u, vals))
    except BlowupError as exc:
        blowup_time = exc.t
        keep = i + 1
        times = times[:keep]
        for name in cols:
            cols[name] = cols[name][:keep]
        step_iters = step_iters[:keep]
        for name in mid:
            mid[name] = mid[name][: max(keep - 1, 0)]

    return Trajectory(
        domain=d,
        scheme=cfg.scheme,
        times=times,
        l2=cols["l2"],
        h1=cols["h1"],
        h2=cols["h2"],
        diss_l2=cols["diss_l2"],
        diss_h1=cols["diss_h1"],
        e2_mixed=cols["e2_mixed"],
        nonlin_flux=cols["nonlin_flux"],
        step_iters=step_iters,
        mid_diss0=mid["diss0"],
        mid_diss1=mid["diss1"],
        mid_diss2=mid["diss2"],
        snapshot_indices=np.array(snap_idx, dtype=int),
        snapshots=snaps,
        cube=cols["cube"],
        mid_rhs_h1=mid["rhs_h1"],
        mid_rhs_h2=mid["rhs_h2"],
        mid_u2lap=mid["u2lap"],
        blowup_time=blowup_time,
    )


def _resolve_nsteps(T: float, dt: float) -> int:
    if T <= 0:
        raise ValueError("final time must be positive")
    n = round(T / dt)
    if n < 1 or abs(n * dt - T) > 1e-9 * max(T, 1.0):
        raise ValueError("dt must divide the final time")
    return n
