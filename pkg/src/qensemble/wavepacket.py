"""One-dimensional wave packets by Fourier synthesis.

``psi(x, t) = int dk exp(i (k x - omega(k) t)) psi_hat(k)``, evaluated as a
direct quadrature sum over a uniform k grid.  A one-point k grid is a single
plane wave with unit weight (a delta spectrum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from qensemble.errors import DomainError, ResolutionError, TruncationError
from qensemble.io import write_csv

ALIAS_THRESHOLD = 1e-10
POINTS_PER_WAVELENGTH = 4


def free_dispersion(m: float = 1.0, hbar: float = 1.0, factor: float = 0.5) -> Callable:
    """``omega = factor * hbar k^2 / m``; ``factor=0.5`` is the free Schrodinger case,
    ``factor=1`` the ``E_T = m u^2`` convention."""

    def omega(k):
        return factor * hbar * np.asarray(k) ** 2 / m

    return omega


@dataclass(frozen=True)
class GaussianPacketParams:
    b: float
    k0: float
    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.b > 0:
            raise DomainError(f"packet width must be positive, got {self.b}")
        if not (self.m > 0 and self.hbar > 0):
            raise DomainError("m and hbar must be positive")

    @property
    def group_velocity(self) -> float:
        return self.hbar * self.k0 / self.m


@dataclass(frozen=True)
class SpectralPacket:
    k_grid: np.ndarray
    psi_hat: np.ndarray
    dispersion: Callable = field(default_factory=free_dispersion)
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.k_grid, dtype=float))
        psi_hat = np.atleast_1d(np.asarray(self.psi_hat, dtype=complex))
        if k.shape != psi_hat.shape:
            raise DomainError("k_grid and psi_hat differ in shape")
        if not np.all(np.isfinite(psi_hat)):
            raise DomainError("psi_hat must be finite")
        if k.size > 1:
            dk = np.diff(k)
            if np.any(dk <= 0) or not np.allclose(dk, dk[0], rtol=1e-9, atol=0):
                raise DomainError("k_grid must be strictly increasing and uniform")
        object.__setattr__(self, "k_grid", k)
        object.__setattr__(self, "psi_hat", psi_hat)
        if self.weights is None:
            w = np.ones_like(k) if k.size == 1 else np.full_like(k, k[1] - k[0])
            object.__setattr__(self, "weights", w)

    @classmethod
    def monochromatic(cls, k0: float, m: float = 1.0, hbar: float = 1.0,
                      dispersion: Optional[Callable] = None) -> "SpectralPacket":
        return cls(np.array([k0]), np.array([1.0 + 0j]), dispersion or free_dispersion(m, hbar))


def gaussian_spectrum(p: GaussianPacketParams, k_grid, dispersion: Optional[Callable] = None) -> SpectralPacket:
    """``psi_hat(k) = exp(-(k - k0)^2 b^2 / 2)`` on ``k_grid``.

    The grid must reach ``k0 +- 6/b``; otherwise a :class:`TruncationError`
    is raised.
    """
    k = np.asarray(k_grid, dtype=float)
    need_lo, need_hi = p.k0 - 6.0 / p.b, p.k0 + 6.0 / p.b
    if k.min() > need_lo or k.max() < need_hi:
        raise TruncationError(
            f"k grid [{k.min()}, {k.max()}] does not span [{need_lo}, {need_hi}]"
        )
    psi_hat = np.exp(-((k - p.k0) ** 2) * p.b**2 / 2.0)
    return SpectralPacket(k, psi_hat, dispersion or free_dispersion(p.m, p.hbar))


def default_k_grid(p: GaussianPacketParams, half_span: float = 10.0, n: int = 2001) -> np.ndarray:
    return np.linspace(p.k0 - half_span / p.b, p.k0 + half_span / p.b, n)


@dataclass(frozen=True)
class ComplexGrid1D:
    x: np.ndarray
    values: np.ndarray

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def to_csv(self, path, scale: float = 1.0):
        d = self.density * scale
        v = self.values * math.sqrt(scale)
        return write_csv(
            path,
            ["x (m)", "|psi|^2 (1)", "Re psi (1)", "Im psi (1)"],
            [self.x, d, v.real, v.imag],
        )


def _check_resolution(sp: SpectralPacket, x: np.ndarray):
    if x.size < 2:
        return
    dx = np.min(np.diff(np.sort(x)))
    peak = np.max(np.abs(sp.psi_hat))
    significant = np.abs(sp.psi_hat) > ALIAS_THRESHOLD * peak
    if not np.any(significant):
        return
    k_max = np.max(np.abs(sp.k_grid[significant]))
    k_ok = 2.0 * math.pi / (POINTS_PER_WAVELENGTH * dx)
    if k_max > k_ok:
        raise ResolutionError(
            f"spatial step {dx:.3e} resolves |k| <= {k_ok:.3e} but the spectrum "
            f"carries weight up to |k| = {k_max:.3e}"
        )


def evolve(sp: SpectralPacket, t: float, x_grid, chunk: int = 512) -> ComplexGrid1D:
    """Synthesize ``psi(x, t)`` on ``x_grid``."""
    x = np.asarray(x_grid, dtype=float)
    _check_resolution(sp, x)
    coeff = sp.weights * sp.psi_hat * np.exp(-1j * sp.dispersion(sp.k_grid) * t)
    out = np.empty(x.shape, dtype=complex)
    for start in range(0, x.size, chunk):
        xs = x[start:start + chunk]
        out[start:start + chunk] = np.exp(1j * np.outer(xs, sp.k_grid)) @ coeff
    return ComplexGrid1D(x, out)


def transform(x_grid, psi, k_grid) -> np.ndarray:
    """Spectrum on ``k_grid`` such that :func:`evolve` at ``t = 0`` inverts it.

    ``psi_hat(k) = (1 / 2 pi) sum_x psi(x) exp(-i k x) dx`` over a uniform grid.
    """
    x = np.asarray(x_grid, dtype=float)
    dx = x[1] - x[0]
    return (np.exp(-1j * np.outer(k_grid, x)) @ np.asarray(psi, dtype=complex)) * dx / (2 * math.pi)


def gaussian_norm_analytic(p: GaussianPacketParams, x, t):
    """Closed-form ``|psi(x, t)|^2`` for the Gaussian packet (reference closed form).

    ``(1 + s)^-1 * exp(-b^-2 (1 + s)^-2 (x - hbar k0 t / m)^2)`` with
    ``s = hbar^2 t^2 / (m^2 b^4)``.  Its width grows as ``1 + s`` rather
    than ``sqrt(1 + s)``, so it is not the density produced by free
    evolution for ``t != 0``; see :func:`gaussian_norm_schrodinger`.
    """
    x = np.asarray(x, dtype=float)
    s = (p.hbar * t / (p.m * p.b**2)) ** 2
    shift = x - p.hbar * p.k0 * t / p.m
    return (1.0 + s) ** -1 * np.exp(-(p.b**-2) * (1.0 + s) ** -2 * shift**2)


def gaussian_norm_schrodinger(p: GaussianPacketParams, x, t):
    """Exact free-evolution density ``(1 + s)^-1/2 exp(-(x - v t)^2 / (b^2 (1 + s)))``."""
    x = np.asarray(x, dtype=float)
    s = (p.hbar * t / (p.m * p.b**2)) ** 2
    shift = x - p.hbar * p.k0 * t / p.m
    return (1.0 + s) ** -0.5 * np.exp(-(shift**2) / (p.b**2 * (1.0 + s)))


def gaussian_density_scale(p: GaussianPacketParams) -> float:
    """Factor mapping ``|evolve(gaussian_spectrum)|^2`` to unit peak at ``t = 0``."""
    return p.b**2 / (2.0 * math.pi)


def intrinsic_potential(envelope):
    """``phi(x) = psi0(x)^2`` for a real amplitude envelope."""
    return np.abs(np.asarray(envelope)) ** 2


def _spacing(x):
    # a scalar step keeps np.gradient exact on constants for uniform grids
    x = np.asarray(x, dtype=float)
    d = np.diff(x)
    if d.size and np.allclose(d, d[0], rtol=1e-9, atol=0):
        return (x[-1] - x[0]) / (x.size - 1)
    return x


def intrinsic_force(envelope, x):
    """``F = -d phi / dx`` by second-order central differences on ``x``."""
    phi = intrinsic_potential(envelope)
    return -np.gradient(phi, _spacing(x), edge_order=2)


def gaussian_force(x, b: float):
    x = np.asarray(x, dtype=float)
    return 2.0 * x / b**2 * np.exp(-(x**2) / b**2)


def equilibrium_residual(field, x) -> float:
    """``max |psi0* grad psi0 + psi0 grad psi0*|`` on the grid.

    The bracket equals ``grad |psi0|^2``; it is differentiated in that form so
    that a pure phase field gives zero up to rounding.
    """
    field = np.asarray(field)
    if field.size < 2:
        return 0.0
    grad = np.gradient(np.abs(field) ** 2, _spacing(x), edge_order=2)
    return float(np.max(np.abs(grad)))


def mode_intrinsic_potential(psi0_k, k, m: float = 1.0, hbar: float = 1.0):
    """Per-mode intrinsic potential ``(hbar k / m)^2 |psi0_k|^2``."""
    k = np.asarray(k, dtype=float)
    return (hbar * k / m) ** 2 * np.abs(np.asarray(psi0_k)) ** 2
