"""Kirchhoff diffraction from slit apertures and single-event sampling.

Geometry is one-dimensional: slits are intervals on the aperture line
``z = 0``, the screen is the line ``z = D``, and the source sits on the axis
a distance ``R`` before the aperture.  The amplitude at a screen point is

    Gamma(k, x) = (i / 2 lambda) * int dy' (D / rho^2) (1 + i / (k rho)) e^{i k rho}

with ``rho = sqrt(D^2 + (x - y')^2)``, multiplied by the source factor
``e^{i k R}``.  Only the surface term of the Green's-function integral is
kept; the gradient term is dropped along with the derivatives of the
per-particle delta function.

Detection events are drawn by inverse-CDF sampling from the normalised
intensity on the screen grid using a Philox (counter-based) generator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from qensemble.errors import DomainError
from qensemble.io import write_csv
from qensemble.quadrature import gauss_legendre

DEFAULT_ORDER = 32
MAX_ORDER = 4096
REFINE_TOL = 1e-8
FAR_FIELD_RATIO = 100.0


class NearFieldWarning(UserWarning):
    """Screen distance is not large compared with the aperture extent."""


@dataclass(frozen=True)
class SlitAperture:
    slits: tuple
    screen_distance: float
    source_distance: float = 1.0

    def __post_init__(self):
        slits = tuple(sorted((float(c), float(w)) for c, w in self.slits))
        for c, w in slits:
            if not w > 0:
                raise DomainError(f"slit width must be positive, got {w}")
        for (c1, w1), (c2, w2) in zip(slits, slits[1:]):
            if c1 + w1 / 2 > c2 - w2 / 2:
                raise DomainError("slits overlap")
        if not (self.screen_distance > 0 and self.source_distance > 0):
            raise DomainError("distances must be positive")
        object.__setattr__(self, "slits", slits)

    @classmethod
    def double(cls, width: float, separation: float, screen_distance: float,
               source_distance: float = 1.0) -> "SlitAperture":
        return cls(((-separation / 2, width), (separation / 2, width)), screen_distance, source_distance)

    @classmethod
    def single(cls, width: float, screen_distance: float, center: float = 0.0,
               source_distance: float = 1.0) -> "SlitAperture":
        return cls(((center, width),), screen_distance, source_distance)

    def cover(self, index: int) -> "SlitAperture":
        """Aperture with slit ``index`` closed."""
        slits = tuple(s for i, s in enumerate(self.slits) if i != index)
        return SlitAperture(slits, self.screen_distance, self.source_distance)

    @property
    def extent(self) -> float:
        if not self.slits:
            return 0.0
        lo = min(c - w / 2 for c, w in self.slits)
        hi = max(c + w / 2 for c, w in self.slits)
        return hi - lo


def _aperture_sum(a: SlitAperture, k: float, x: np.ndarray, order: int) -> np.ndarray:
    D = a.screen_distance
    out = np.zeros(x.shape, dtype=complex)
    for c, w in a.slits:
        y, wt = gauss_legendre(c - w / 2, c + w / 2, order)
        rho = np.hypot(D, x[:, None] - y[None, :])
        integrand = (D / rho**2) * (1.0 + 1j / (k * rho)) * np.exp(1j * k * rho)
        out += integrand @ wt
    return out


def kirchhoff_amplitude(a: SlitAperture, k: float, x_screen, order: int = DEFAULT_ORDER):
    """Complex amplitude at screen positions ``x_screen``.

    Gauss-Legendre per slit; the order doubles until two successive results
    agree to ``1e-8`` relative to the largest amplitude.
    """
    if not k > 0:
        raise DomainError(f"wave number must be positive, got {k}")
    x = np.atleast_1d(np.asarray(x_screen, dtype=float))
    if a.extent and a.screen_distance < FAR_FIELD_RATIO * a.extent:
        warnings.warn(
            f"screen distance {a.screen_distance:.3g} is below {FAR_FIELD_RATIO:g}x the "
            f"aperture extent {a.extent:.3g}",
            NearFieldWarning,
            stacklevel=2,
        )
    if not a.slits:
        out = np.zeros(x.shape, dtype=complex)
        return out if np.ndim(x_screen) else complex(out[0])
    lam = 2.0 * math.pi / k
    prev = _aperture_sum(a, k, x, order)
    while order < MAX_ORDER:
        order *= 2
        cur = _aperture_sum(a, k, x, order)
        scale = max(float(np.max(np.abs(cur))), np.finfo(float).tiny)
        if np.max(np.abs(cur - prev)) < REFINE_TOL * scale:
            prev = cur
            break
        prev = cur
    gamma = (1j / (2.0 * lam)) * prev * np.exp(1j * k * a.source_distance)
    return gamma if np.ndim(x_screen) else complex(gamma[0])


def fraunhofer_amplitude(a: SlitAperture, k: float, x_screen):
    """Far-field closed form (sinc envelope times slit phases), up to a constant."""
    x = np.asarray(x_screen, dtype=float)
    q = k * x / a.screen_distance
    out = np.zeros(x.shape, dtype=complex)
    for c, w in a.slits:
        out += w * np.sinc(q * w / (2 * math.pi)) * np.exp(-1j * q * c)
    return out


def _normalise(x, intensity):
    total = np.trapezoid(intensity, x)
    if total <= 0:
        raise DomainError("intensity integrates to zero")
    return intensity / total


def intensity_pattern(a: SlitAperture, k: float, screen_grid, order: int = DEFAULT_ORDER):
    """``|Gamma|^2`` on ``screen_grid``, normalised to unit trapezoidal integral."""
    x = np.asarray(screen_grid, dtype=float)
    return _normalise(x, np.abs(kirchhoff_amplitude(a, k, x, order)) ** 2)


def fringe_contrast(x, intensity, center: float, half_width: float) -> float:
    """``(I_max - I_min) / (I_max + I_min)`` over ``|x - center| <= half_width``."""
    x = np.asarray(x)
    sel = np.abs(x - center) <= half_width
    region = np.asarray(intensity)[sel]
    hi, lo = float(region.max()), float(region.min())
    return (hi - lo) / (hi + lo)


@dataclass(frozen=True)
class HitRecord:
    positions: np.ndarray
    seed: int

    def to_csv(self, path):
        idx = np.arange(self.positions.size)
        return write_csv(path, ["index (1)", "x_hit (m)"], [idx, self.positions])


def cell_probabilities(x, intensity) -> np.ndarray:
    """Probability mass of each grid cell under the trapezoidal density."""
    x = np.asarray(x, dtype=float)
    intensity = np.asarray(intensity, dtype=float)
    mass = 0.5 * (intensity[1:] + intensity[:-1]) * np.diff(x)
    return mass / mass.sum()


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for ``seed``; distinct ``stream`` values give independent streams."""
    ss = np.random.SeedSequence(seed, spawn_key=(stream,) if stream else ())
    return np.random.Generator(np.random.Philox(ss))


def sample_hits(x, intensity, n: int, seed: int = 0, stream: int = 0) -> HitRecord:
    """Draw ``n`` detection positions from the screen intensity.

    A cell is chosen by inverting the cumulative cell mass; the position is
    then uniform inside the cell.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    x = np.asarray(x, dtype=float)
    p = cell_probabilities(x, intensity)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    rng = make_rng(seed, stream)
    u = rng.random(n)
    v = rng.random(n)
    cell = np.searchsorted(cdf, u, side="right")
    cell = np.minimum(cell, p.size - 1)
    left = x[cell]
    pos = left + v * (x[cell + 1] - left)
    return HitRecord(pos, seed)


def histogram_l1(record: HitRecord, x, intensity) -> float:
    """L1 distance between the hit histogram (bins = grid cells) and the cell masses."""
    counts, _ = np.histogram(record.positions, bins=np.asarray(x, dtype=float))
    return float(np.sum(np.abs(counts / record.positions.size - cell_probabilities(x, intensity))))
