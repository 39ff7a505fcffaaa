"""Strip domain and Fourier-sine spectral transforms.

The solver works on the periodized strip [-X, X) x (0, L): periodic in x,
homogeneous Dirichlet walls at y = 0 and y = L.  Fields are expanded in

    e_{j,l}(x, y) = exp(i xi_j x) sin(pi l y / L),
    xi_j = pi j / X  (j = -nx/2 .. nx/2 - 1),   l = 1 .. ny,

and sampled on the tensor grid x_j = -X + 2X j / nx (uniform, periodic)
and y_k = k L / (ny + 1) (interior sine-collocation nodes; wall rows are
not stored, the sine synthesis vanishes there identically).

Normalization, fixed once and shared by every norm and energy audit in
the package: a SpectralField stores the complex amplitudes c(j, l) of
e_{j,l}, so Parseval reads

    integral |u|^2 dx dy = (X * L) * sum_{j,l} |c(j, l)|^2.

The weight X * L is exposed as DomainConfig.parseval_weight.  Grid
quadrature uses the tensor weights dx * dy with dx = 2X/nx and
dy = L/(ny + 1); these are trapezoid-consistent because every stored
integrand of interest vanishes on the walls.

Transforms are plain FFT in x and an unnormalized type-I DST in y.  All
functions here are pure: they read DomainConfig and return new fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as _sfft

__all__ = [
    "DomainConfig",
    "GridField",
    "SpectralField",
    "plan_domain",
    "to_spectral",
    "to_grid",
    "derivative",
    "mixed_derivative",
    "dealias_mask",
    "parseval_norm_sq",
    "mode_inner",
    "grid_quadrature",
    "ModeMultipliers",
    "mode_multipliers",
]


@dataclass(eq=False)
class DomainConfig:
    """Geometry, resolution and precomputed mode tables.

    Treat instances as immutable after plan_domain; the stepper and the
    audits share them freely across calls.
    """

    L: float
    X: float
    nx: int
    ny: int
    delta: float
    xi: np.ndarray = field(repr=False, default=None)        # (nx,) FFT order
    xi_odd: np.ndarray = field(repr=False, default=None)    # xi with Nyquist zeroed
    lam: np.ndarray = field(repr=False, default=None)       # (ny,) (pi l / L)^2
    ky: np.ndarray = field(repr=False, default=None)        # (ny,) pi l / L
    phase: np.ndarray = field(repr=False, default=None)     # (nx,) (-1)^j
    _cos_mat: np.ndarray = field(repr=False, default=None)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def x(self) -> np.ndarray:
        return -self.X + 2.0 * self.X * np.arange(self.nx) / self.nx

    @property
    def y(self) -> np.ndarray:
        return self.L * np.arange(1, self.ny + 1) / (self.ny + 1)

    @property
    def dx(self) -> float:
        return 2.0 * self.X / self.nx

    @property
    def dy(self) -> float:
        return self.L / (self.ny + 1)

    @property
    def parseval_weight(self) -> float:
        """Per-mode weight in the Parseval identity (see module docstring)."""
        return self.X * self.L

    def cos_matrix(self) -> np.ndarray:
        # Synthesis of cos(pi l y / L) on the interior grid; only needed for
        # odd-order y derivatives, built lazily.
        if self._cos_mat is None:
            n1 = self.ny + 1
            k = np.arange(1, self.ny + 1)
            l = np.arange(1, self.ny + 1)
            self._cos_mat = np.cos(np.pi * np.outer(k, l) / n1)
        return self._cos_mat


@dataclass(eq=False)
class GridField:
    """Real collocation samples, shape (nx, ny), x index first."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("GridField expects a 2-d array (nx, ny)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("GridField entries must be finite")


@dataclass(eq=False)
class SpectralField:
    """Complex mode amplitudes c(j, l), shape (nx, ny), x frequency first.

    The x axis uses FFT ordering (j = 0, 1, ..., nx/2-1, -nx/2, ..., -1);
    the y axis indexes sine modes l = 1 .. ny.  Fields representing real
    data satisfy c(-j, l) = conj(c(j, l)).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2:
            raise ValueError("SpectralField expects a 2-d array (nx, ny)")


def plan_domain(L: float, X: float, nx: int, ny: int, delta: float) -> DomainConfig:
    """Validate sizes and precompute frequency tables.

    Args:
        L: strip width, y in (0, L).
        X: half period of the x truncation, x in [-X, X).
        nx: x collocation points, even and >= 8.
        ny: interior y collocation points, >= 4.
        delta: dissipation coefficient, > 0.
    """
    if not (L > 0 and X > 0):
        raise ValueError("L and X must be positive")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if nx < 8 or nx % 2 != 0:
        raise ValueError("nx must be even and >= 8")
    if ny < 4:
        raise ValueError("ny must be >= 4")

    j = np.fft.fftfreq(nx, d=1.0 / nx).astype(int)
    xi = np.pi * j / X
    xi_odd = xi.copy()
    # The j = -nx/2 mode has no conjugate partner; odd powers of xi there
    # would break realness, so dispersion and odd x derivatives drop it.
    xi_odd[j == -nx // 2] = 0.0
    l = np.arange(1, ny + 1)
    ky = np.pi * l / L
    lam = ky**2
    phase = np.where(j % 2 == 0, 1.0, -1.0)
    return DomainConfig(L=float(L), X=float(X), nx=int(nx), ny=int(ny),
                        delta=float(delta), xi=xi, xi_odd=xi_odd, lam=lam,
                        ky=ky, phase=phase)


def _check_shape(arr: np.ndarray, d: DomainConfig, what: str) -> None:
    if arr.shape != d.shape:
        raise ValueError(f"{what} has shape {arr.shape}, expected {d.shape}")


def to_spectral(f: GridField, d: DomainConfig) -> SpectralField:
    """Forward transform: collocation samples to mode amplitudes."""
    _check_shape(f.values, d, "grid field")
    csin = _sfft.dst(f.values, type=1, axis=1) / (d.ny + 1)
    coeffs = d.phase[:, None] * np.fft.fft(csin, axis=0) / d.nx
    return SpectralField(coeffs)


def _x_synthesis(coeffs: np.ndarray, d: DomainConfig) -> np.ndarray:
    """Inverse x transform; returns per-x sine (or cosine) coefficients.

    Raises if the input is visibly non-Hermitian, i.e. would not produce
    a real field.
    """
    tmp = np.fft.ifft(coeffs * d.phase[:, None] * d.nx, axis=0)
    scale = float(np.max(np.abs(tmp.real), initial=0.0))
    defect = float(np.max(np.abs(tmp.imag), initial=0.0))
    if defect > 1e-10 * max(scale, 1.0) and defect > 1e-13:
        raise ValueError(
            "spectral field is not Hermitian-symmetric; cannot synthesize a real grid field"
        )
    return tmp.real


def to_grid(s: SpectralField, d: DomainConfig) -> GridField:
    """Inverse transform: mode amplitudes to real collocation samples."""
    _check_shape(s.coeffs, d, "spectral field")
    csin = _x_synthesis(s.coeffs, d)
    return GridField(_sfft.dst(csin, type=1, axis=1) / 2.0)


def mixed_derivative(s: SpectralField, kx: int, ky: int, d: DomainConfig) -> GridField:
    """Grid samples of d^kx/dx^kx d^ky/dy^ky u for kx + ky <= 3.

    Even y orders stay in the sine basis; odd y orders land in the cosine
    basis and are synthesized on the same interior grid.
    """
    _check_shape(s.coeffs, d, "spectral field")
    if kx < 0 or ky < 0 or kx + ky > 3:
        raise ValueError("mixed_derivative supports orders kx, ky >= 0 with kx + ky <= 3")
    xi = d.xi_odd if kx % 2 == 1 else d.xi
    c = s.coeffs * (1j * xi[:, None]) ** kx
    if ky % 2 == 0:
        c = c * (-d.lam[None, :]) ** (ky // 2)
        csin = _x_synthesis(c, d)
        return GridField(_sfft.dst(csin, type=1, axis=1) / 2.0)
    # odd y order: sin -> cos, one sign flip per full second derivative
    sign = -1.0 if ky == 3 else 1.0
    c = c * (sign * d.ky[None, :] ** ky)
    ccos = _x_synthesis(c, d)
    return GridField(ccos @ d.cos_matrix().T)


def derivative(s: SpectralField, axis: str, order: int, d: DomainConfig) -> GridField:
    """Spectral derivative along one axis, returned as grid samples.

    Args:
        axis: "x" or "y".
        order: 1, 2 or 3.
    """
    if order not in (1, 2, 3):
        raise ValueError("derivative order must be 1, 2 or 3")
    if axis == "x":
        return mixed_derivative(s, order, 0, d)
    if axis == "y":
        return mixed_derivative(s, 0, order, d)
    raise ValueError("axis must be 'x' or 'y'")


def dealias_mask(d: DomainConfig) -> np.ndarray:
    """Boolean keep-mask implementing the 2/3 rule on both axes.

    Kept x indices satisfy 3|j| < nx, kept sine indices satisfy
    3l < 2(ny + 1); quadratic products of kept modes then alias neither
    onto kept modes nor onto the x mean.
    """
    j = np.fft.fftfreq(d.nx, d=1.0 / d.nx).astype(int)
    kx = (d.nx - 1) // 3
    kyl = (2 * (d.ny + 1) - 1) // 3
    keep_x = np.abs(j) <= kx
    keep_y = np.arange(1, d.ny + 1) <= kyl
    return np.logical_and(keep_x[:, None], keep_y[None, :])


def parseval_norm_sq(coeffs: np.ndarray, d: DomainConfig) -> float:
    """integral |u|^2 dx dy evaluated from mode amplitudes."""
    return d.parseval_weight * float(np.sum(np.abs(coeffs) ** 2))


def mode_inner(a: np.ndarray, b: np.ndarray, d: DomainConfig) -> float:
    """L2 pairing integral a*b dx dy of two real fields given spectrally."""
    return d.parseval_weight * float(np.sum((np.conj(a) * b).real))


def grid_quadrature(values: np.ndarray, d: DomainConfig) -> float:
    """Tensor quadrature sum(values) * dx * dy over the stored grid."""
    return float(np.sum(values)) * d.dx * d.dy


@dataclass(eq=False)
class ModeMultipliers:
    """Per-mode weights for the derivative integrals used everywhere.

    With xi the x frequency and lam the sine eigenvalue (pi l / L)^2:

      d1:   xi^2 + lam                  -> integral u_x^2 + u_y^2
      d2:   (xi^2 + lam)^2              -> integral u_xx^2 + 2 u_xy^2 + u_yy^2
      e2:   xi^4 + xi^2 lam + lam^2     -> integral u_xx^2 + u_xy^2 + u_yy^2
      d3:   d1 * e2                     -> integral u_xxx^2 + 2 u_xxy^2 + 2 u_xyy^2 + u_yyy^2
    """

    d1: np.ndarray
    d2: np.ndarray
    e2: np.ndarray
    d3: np.ndarray


def mode_multipliers(d: DomainConfig) -> ModeMultipliers:
    xi2 = d.xi[:, None] ** 2
    lam = d.lam[None, :]
    d1 = xi2 + lam
    e2 = xi2**2 + xi2 * lam + lam**2
    return ModeMultipliers(d1=d1, d2=d1**2, e2=e2, d3=d1 * e2)
