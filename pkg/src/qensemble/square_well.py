"""Ensemble treatment of the one-dimensional square well.

The well is ``V = 0`` for ``|x| <= x0`` and ``V = V0`` outside.  Each member
pairs an interior wave number ``k1`` with an exterior decay constant ``k2``
through ``k1^2 + k2^2 = m V0 / hbar^2`` and carries the even (cosine)
wavefunction that is continuous at ``+-x0``.  The ensemble density
integrates the members' ``|phi|^2`` over the allowed k ranges and is then
renormalised to unit probability.

Two integration modes exist:

``"printed"``
    interior members over ``k1 in [0, sqrt(m E_T)/hbar]`` and, independently,
    exterior members over ``k2 in [0, sqrt(m (V0 - E_T))/hbar]``.
``"paired"``
    every interior member ``k1`` also contributes its own exterior tail with
    ``k2 = partner_k(k1)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from qensemble.constants import HBAR
from qensemble.ensemble import EnsembleDensity
from qensemble.errors import DomainError, SingularMemberError, UnsupportedRegimeError
from qensemble.io import write_csv
from qensemble.quadrature import composite_nodes

SINGULAR_TOL = 1e-8
GAP_FRACTION = 1e-6
MODES = ("printed", "paired")


class AmplitudeAnomalyWarning(UserWarning):
    """The printed member amplitude is zero or negative (cos(k1 x0) <= 0)."""


@dataclass(frozen=True)
class WellGeometry:
    x0: float
    V0: float
    m: float
    hbar: float = HBAR

    def __post_init__(self):
        if not (self.x0 > 0 and self.V0 > 0 and self.m > 0 and self.hbar > 0):
            raise DomainError("x0, V0, m and hbar must all be positive")

    @property
    def k_total_sq(self) -> float:
        return self.m * self.V0 / self.hbar**2


@dataclass(frozen=True)
class WellMember:
    k1: float
    k2: float
    phi0: float
    flagged: bool = False


def partner_k(k1, g: WellGeometry):
    """Exterior decay constant ``sqrt(m V0 / hbar^2 - k1^2)`` paired with ``k1``."""
    k1 = np.asarray(k1, dtype=float)
    total = g.k_total_sq
    sq = total - k1**2
    if np.any(k1 < 0) or np.any(sq < -1e-12 * total):
        raise DomainError(f"k1 must satisfy 0 <= k1^2 <= m V0 / hbar^2 = {total!r}")
    out = np.sqrt(np.clip(sq, 0.0, None))
    return float(out) if out.ndim == 0 else out


def _amplitude_sq(k1, k2, g: WellGeometry):
    # phi0^2 from the printed amplitude, without the sign of cos(k1 x0).
    return g.m * k2 / (1.0 + k2 * g.x0) * np.exp(2.0 * k2 * g.x0) * np.cos(k1 * g.x0) ** 2


def member_amplitude(k1: float, k2: float, g: WellGeometry) -> float:
    """``sqrt(m k2 / (1 + k2 x0)) * exp(k2 x0) * cos(k1 x0)``.

    Warns with :class:`AmplitudeAnomalyWarning` when ``cos(k1 x0) <= 0``.
    """
    c = math.cos(k1 * g.x0)
    if c <= 0:
        warnings.warn(
            f"cos(k1 x0) = {c:.3e} <= 0 for k1 = {k1!r}; amplitude is not positive",
            AmplitudeAnomalyWarning,
            stacklevel=2,
        )
    return math.sqrt(g.m * k2 / (1.0 + k2 * g.x0)) * math.exp(k2 * g.x0) * c


def normalized_amplitude(k1: float, k2: float, g: WellGeometry) -> float:
    """Amplitude that makes ``int |phi|^2 dx = m`` for the member wavefunction.

    Closed form of the normalisation integral of the piecewise member
    wavefunction; it agrees with :func:`member_amplitude` only when
    ``tan(k1 x0) = k2 / k1``.
    """
    x0 = g.x0
    c = math.cos(k1 * x0)
    if abs(c) < SINGULAR_TOL:
        raise SingularMemberError(f"cos(k1 x0) = {c:.3e} for k1 = {k1!r}")
    inner = x0 + (math.sin(2 * k1 * x0) / (2 * k1) if k1 > 0 else x0)
    bracket = 1.0 / k2 + inner / c**2
    return math.sqrt(g.m * math.exp(2 * k2 * x0) / bracket)


def amplitude_deviation(k1: float, g: WellGeometry) -> float:
    """Relative deviation of the printed amplitude from the normalising one."""
    k2 = partner_k(k1, g)
    exact = normalized_amplitude(k1, k2, g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AmplitudeAnomalyWarning)
        printed = member_amplitude(k1, k2, g)
    return abs(printed - exact) / abs(exact)


def make_member(k1: float, g: WellGeometry) -> WellMember:
    k2 = partner_k(k1, g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AmplitudeAnomalyWarning)
        phi0 = member_amplitude(k1, k2, g)
    return WellMember(k1, k2, phi0, flagged=math.cos(k1 * g.x0) <= 0)


def matching_k1(g: WellGeometry, index: int = 0) -> float:
    """Root of ``k1 tan(k1 x0) = partner_k(k1)`` on the ``index``-th even branch."""
    x0 = g.x0
    k_top = math.sqrt(g.k_total_sq)
    lo = index * math.pi / x0
    hi = min(lo + 0.5 * math.pi / x0, k_top)
    if lo >= k_top:
        raise DomainError(f"no even matching root with index {index}")

    def f(k):
        return k * math.sin(k * x0) - partner_k(k, g) * math.cos(k * x0)

    eps = 1e-14 * max(1.0, hi)
    return brentq(f, lo + eps, hi - eps, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def member_wavefunction(member: WellMember, g: WellGeometry, x):
    """Piecewise member wavefunction; exponential tails, cosine interior."""
    c = math.cos(member.k1 * g.x0)
    if abs(c) < SINGULAR_TOL:
        raise SingularMemberError(f"cos(k1 x0) = {c:.3e}; member is singular")
    x = np.asarray(x, dtype=float)
    edge = member.phi0 * math.exp(-member.k2 * g.x0)
    inside = edge * np.cos(member.k1 * x) / c
    outside = member.phi0 * np.exp(-member.k2 * np.abs(x))
    out = np.where(np.abs(x) <= g.x0, inside, outside)
    return float(out) if out.ndim == 0 else out


def _interior_breakpoints(k_hi: float, x0: float):
    """``[0, k_hi]`` split around the zeros of ``cos(k x0)`` with small gaps removed."""
    gap = 0.5 * GAP_FRACTION * k_hi
    points = [0.0]
    j = 0
    while True:
        ks = (2 * j + 1) * math.pi / (2 * x0)
        if ks >= k_hi:
            break
        points.extend([ks - gap, ks + gap])
        j += 1
    points.append(k_hi)
    # consecutive (lo, hi) pairs; the (ks - gap, ks + gap) pairs are dropped
    return [(points[i], points[i + 1]) for i in range(0, len(points), 2)]


def _nodes_over(intervals, order):
    xs, ws = [], []
    for lo, hi in intervals:
        x, w = composite_nodes([lo, hi], order)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


class WellDensity:
    """Renormalised ensemble density of the square well as a callable of ``x``."""

    def __init__(self, g: WellGeometry, E_T: float, mode: str = "printed", order: int = 64):
        if not 0 < E_T < g.V0:
            raise UnsupportedRegimeError(f"need 0 < E_T < V0, got E_T={E_T!r}, V0={g.V0!r}")
        if mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
        self.g, self.E_T, self.mode = g, E_T, mode
        x0, hbar, m = g.x0, g.hbar, g.m
        k0 = math.sqrt(m * E_T) / hbar
        k0p = math.sqrt(m * (g.V0 - E_T)) / hbar

        k1, w1 = _nodes_over(_interior_breakpoints(k0, x0), order)
        k2_of_k1 = partner_k(k1, g)
        amp_in = _amplitude_sq(k1, k2_of_k1, g) * np.exp(-2 * k2_of_k1 * x0) / np.cos(k1 * x0) ** 2
        self._k_in, self._wt_in = k1, w1 * amp_in

        if mode == "printed":
            k2, w2 = composite_nodes([0.0, k0p], order)
            k1_of_k2 = partner_k(k2, g)
            amp_out = _amplitude_sq(k1_of_k2, k2, g)
        else:
            k2, w2 = k2_of_k1, w1
            amp_out = _amplitude_sq(k1, k2, g)
        self._k_out, self._wt_out = k2, w2 * amp_out

        inner = 0.5 * x0 + np.sin(2 * k1 * x0) / (4 * k1)
        outer = np.exp(-2 * k2 * x0) / (2 * k2)
        self.norm = 2.0 * (np.dot(self._wt_in, inner) + np.dot(self._wt_out, outer))
        self.rho_bar = 1.0 / self.norm

    def unnormalized(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        flat = ax.ravel()
        out = np.empty_like(flat)
        inside = flat <= self.g.x0
        if np.any(inside):
            out[inside] = np.cos(np.outer(flat[inside], self._k_in)) ** 2 @ self._wt_in
        if np.any(~inside):
            out[~inside] = np.exp(-2 * np.outer(flat[~inside], self._k_out)) @ self._wt_out
        return out.reshape(ax.shape)

    def __call__(self, x):
        return self.unnormalized(x) * self.rho_bar


def well_ensemble_density(g: WellGeometry, E_T: float, grid, mode: str = "printed",
                          order: int = 64) -> EnsembleDensity:
    """Square-well ensemble density sampled on ``grid`` (integrates to 1 on the real line)."""
    grid = np.asarray(grid, dtype=float)
    dens = WellDensity(g, E_T, mode, order)
    return EnsembleDensity(grid=grid, w=dens(grid), rho_bar=dens.rho_bar)


def member_table(g: WellGeometry, k1_values) -> list[WellMember]:
    return [make_member(float(k), g) for k in k1_values]


def write_member_dump(path, members):
    return write_csv(
        path,
        ["k1 (1/m)", "k2 (1/m)", "phi0 (sqrt(kg))"],
        [[mb.k1 for mb in members], [mb.k2 for mb in members], [mb.phi0 for mb in members]],
    )
