"""Quantum ensembles: bounded-k manifolds, densities in potentials, filters.

An ensemble is the set of plane waves with radial wave numbers in
``[k_min, k_max]`` and equal per-mode weight.  Only the isotropic (radial)
reduction ``4 pi int k^2 dk`` of the three-dimensional Fourier integral is
used.  The per-mode amplitude ``sqrt(m)`` is carried as a bare number; the
mass it hides is a documented prefactor, not a unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

import numpy as np

from qensemble.constants import HBAR
from qensemble.errors import DomainError, UnsupportedRegimeError
from qensemble.io import write_csv
from qensemble.quadrature import gauss_legendre

OSCILLATORY = "oscillatory"
EVANESCENT = "evanescent"

SegmentValue = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class QuantumEnsemble:
    k_min: float
    k_max: float
    amplitude: float = 1.0
    branch: str = OSCILLATORY

    def __post_init__(self):
        if not (0 <= self.k_min <= self.k_max):
            raise DomainError(f"need 0 <= k_min <= k_max, got [{self.k_min}, {self.k_max}]")
        if not self.amplitude > 0:
            raise DomainError(f"amplitude must be positive, got {self.amplitude}")
        if self.branch not in (OSCILLATORY, EVANESCENT):
            raise DomainError(f"unknown branch {self.branch!r}")

    @property
    def is_local(self) -> bool:
        """True when the ensemble has collapsed to a single wave number."""
        return self.k_min == self.k_max


def k_limit(E_T: float, V: float, m: float, hbar: float = HBAR):
    """Wave-number bound at a point with potential ``V``.

    Returns ``(k, branch)``: ``sqrt(m (E_T - V)) / hbar`` on the oscillatory
    branch when ``E_T >= V``, otherwise ``sqrt(m (V - E_T)) / hbar`` as the
    decay constant of the evanescent branch.
    """
    if not m > 0:
        raise DomainError(f"mass must be positive, got {m}")
    if E_T < 0:
        raise DomainError(f"E_T must be non-negative, got {E_T}")
    if E_T >= V:
        return math.sqrt(m * (E_T - V)) / hbar, OSCILLATORY
    return math.sqrt(m * (V - E_T)) / hbar, EVANESCENT


def free_ensemble(E_T: float, m: float, hbar: float = HBAR) -> QuantumEnsemble:
    if E_T < 0:
        raise DomainError(f"E_T must be non-negative, got {E_T}")
    k_max, _ = k_limit(E_T, 0.0, m, hbar)
    return QuantumEnsemble(0.0, k_max, math.sqrt(m), OSCILLATORY)


def ensemble_k_volume(e: QuantumEnsemble) -> float:
    """``(4 pi / 3) (k_max^3 - k_min^3) * amplitude^2``."""
    return 4.0 * math.pi / 3.0 * (e.k_max**3 - e.k_min**3) * e.amplitude**2


class PotentialField1D:
    """Piecewise potential on a finite interval.

    ``segments`` is an ordered sequence of ``(x_lo, x_hi, value)`` tiling the
    domain; ``value`` is a float (constant segment) or a vectorised callable.
    At an interior breakpoint the right-hand segment applies.
    """

    def __init__(self, segments: Sequence[tuple[float, float, SegmentValue]]):
        segs = [(float(lo), float(hi), val) for lo, hi, val in segments]
        if not segs:
            raise DomainError("at least one segment is required")
        for i, (lo, hi, val) in enumerate(segs):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise DomainError(f"segment {i} has non-finite bounds")
            if not hi > lo:
                raise DomainError(f"segment {i} has zero or negative length [{lo}, {hi}]")
            if not callable(val) and not math.isfinite(val):
                raise DomainError(f"segment {i} has non-finite value {val!r}")
            if i and lo != segs[i - 1][1]:
                raise DomainError(f"segments {i - 1} and {i} leave a gap or overlap")
        self.segments = segs

    @classmethod
    def from_steps(cls, edges, values) -> "PotentialField1D":
        edges = list(edges)
        values = list(values)
        if len(edges) != len(values) + 1:
            raise DomainError("need one more edge than values")
        return cls([(edges[i], edges[i + 1], values[i]) for i in range(len(values))])

    @property
    def domain(self) -> tuple[float, float]:
        return self.segments[0][0], self.segments[-1][1]

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([s[0] for s in self.segments] + [self.segments[-1][1]])

    @staticmethod
    def _segment_values(value, x):
        if callable(value):
            out = np.asarray(value(x), dtype=float)
            return np.broadcast_to(out, np.shape(x)).astype(float)
        return np.full(np.shape(x), float(value))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any((x < lo) | (x > hi)):
            raise DomainError(f"points outside the domain [{lo}, {hi}]")
        idx = np.searchsorted(self.breakpoints[1:-1], x, side="right")
        out = np.empty_like(x)
        for i, (_, _, val) in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                out[mask] = self._segment_values(val, x[mask])
        return out

    def with_value(self, index: int, value: SegmentValue) -> "PotentialField1D":
        segs = list(self.segments)
        lo, hi, _ = segs[index]
        segs[index] = (lo, hi, value)
        return PotentialField1D(segs)


@dataclass(frozen=True)
class EnsembleDensity:
    grid: np.ndarray
    w: np.ndarray
    rho_bar: float

    def to_csv(self, path):
        return write_csv(path, ["x (m)", "w (1/m)"], [self.grid, self.w])


def _energy_excess(V: PotentialField1D, E_T: float, x: np.ndarray, where: str):
    excess = E_T - V(x)
    if np.any(excess <= 0):
        bad = x[np.argmax(excess <= 0)]
        raise UnsupportedRegimeError(
            f"E_T <= V(x) at x={bad!r} ({where}); the ensemble density is only "
            "defined where the total energy exceeds the potential"
        )
    return excess


def density_function(V: PotentialField1D, E_T: float, order: int = 64):
    """Return ``(w, rho_bar)`` where ``w`` is the normalised density as a callable.

    ``rho_bar = 1 / int (E_T - V)^{3/2} dx`` is evaluated with an
    ``order``-point Gauss-Legendre rule on every segment.
    """
    total = 0.0
    for lo, hi, _ in V.segments:
        x, wq = gauss_legendre(lo, hi, order)
        total += float(np.dot(wq, _energy_excess(V, E_T, x, "quadrature node") ** 1.5))
    rho_bar = 1.0 / total

    def w(x):
        x = np.asarray(x, dtype=float)
        return rho_bar * _energy_excess(V, E_T, x, "grid") ** 1.5

    return w, rho_bar


def ensemble_density(V: PotentialField1D, E_T: float, grid, order: int = 64) -> EnsembleDensity:
    """Probability density ``(E_T - V)^{3/2} / int (E_T - V)^{3/2}`` on ``grid``.

    Raises :class:`UnsupportedRegimeError` if ``E_T <= V`` anywhere on the
    grid or the domain.
    """
    grid = np.asarray(grid, dtype=float)
    w, rho_bar = density_function(V, E_T, order)
    return EnsembleDensity(grid=grid, w=w(grid), rho_bar=rho_bar)


@dataclass(frozen=True)
class CollapseResult:
    before: QuantumEnsemble
    after: QuantumEnsemble
    retained_fraction: float
    k_threshold: float
    k_in_analyzer: float


def _threshold_k(E_rfa: float, m: float, hbar: float) -> float:
    return math.sqrt(2.0 * m * max(E_rfa, 0.0)) / hbar


def apply_filter(e: QuantumEnsemble, E_rfa: float, m: float, hbar: float = HBAR) -> QuantumEnsemble:
    """Keep only members whose kinetic energy exceeds the barrier ``E_rfa``.

    Members with ``k < sqrt(2 m E_rfa) / hbar`` are removed; if nothing
    survives the result is the local ensemble at ``k_max``.
    """
    if e.branch != OSCILLATORY:
        raise DomainError("only oscillatory ensembles can pass a retarding field")
    if E_rfa < 0:
        raise DomainError(f"E_rfa must be non-negative, got {E_rfa}")
    k_th = _threshold_k(E_rfa, m, hbar)
    return replace(e, k_min=min(max(e.k_min, k_th), e.k_max))


def collapse_filter(E_k: float, E_rfa: float, m: float, hbar: float = HBAR) -> CollapseResult:
    """Ensemble before and after a retarding-field analyzer at ``E_rfa``.

    ``E_k`` is the kinetic energy of the ensemble limit, so
    ``k0 = sqrt(2 m E_k) / hbar``.  The retained fraction is the k-space
    volume ratio ``(k0^3 - k_th^3) / k0^3``.  A barrier at or above ``E_k``
    leaves the local ensemble ``[k0, k0]`` with fraction 0.
    """
    if E_k < 0 or E_rfa < 0:
        raise DomainError("energies must be non-negative")
    k0 = math.sqrt(2.0 * m * E_k) / hbar
    before = QuantumEnsemble(0.0, k0, math.sqrt(m), OSCILLATORY)
    after = apply_filter(before, E_rfa, m, hbar)
    v_before = ensemble_k_volume(before)
    if v_before == 0.0:
        fraction = 1.0 if E_rfa == 0 else 0.0
    else:
        fraction = ensemble_k_volume(after) / v_before
    k_in = math.sqrt(2.0 * m * max(E_k - E_rfa, 0.0)) / hbar
    return CollapseResult(before, after, fraction, after.k_min, k_in)
