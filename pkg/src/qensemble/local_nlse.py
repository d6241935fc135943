"""Local Planck/de Broglie relations and the local (nonlinear) Schrodinger system.

The stationary form is ``[-beta^2 Lap + rho0^2 phi] psi = rho0 beta omega psi``
and the time-dependent form ``[-beta^2 Lap + rho0^2 phi] psi = i rho0 beta dpsi/dt``
with ``rho0 = |psi|^2``.  Fields live on uniform periodic grids (the right
endpoint is excluded) and the Laplacian is spectral.

``phi`` is a scalar profile in the equation's own units; ``beta`` defaults
to the electron value but every routine accepts a nondimensional one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from qensemble.constants import BETA_EL
from qensemble.errors import ConvergenceError, DomainError, SingularityError

ON_SHELL_RTOL = 1e-10
FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAXITER = 50
GAMMA_POLE_TOL = 1e-9


def local_relations(rho0: float, u: float, beta: float = BETA_EL):
    """Local wavelength and angular frequency ``(2 pi beta / (rho0 u), rho0 u^2 / beta)``."""
    if not (rho0 > 0 and u > 0):
        raise DomainError(f"density and velocity must be positive, got rho0={rho0}, u={u}")
    return 2.0 * math.pi * beta / (rho0 * u), rho0 * u**2 / beta


def wave_dispersion(rho0: float, u: float, omega: float):
    """``beta = rho0 u^2 / omega`` and ``k = rho0 u / beta = omega / u``."""
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    beta = rho0 * u**2 / omega
    return beta, rho0 * u / beta


@dataclass(frozen=True)
class LocalPlaneWave:
    amplitude: complex
    u: float
    omega: float
    phi: float = 0.0
    beta: float = BETA_EL

    @classmethod
    def on_shell(cls, amplitude: complex, u: float, phi: float = 0.0,
                 beta: float = BETA_EL) -> "LocalPlaneWave":
        rho0 = abs(amplitude) ** 2
        return cls(amplitude, u, rho0 * (u**2 + phi) / beta, phi, beta)

    @property
    def rho0(self) -> float:
        return abs(self.amplitude) ** 2

    @property
    def k(self) -> float:
        return self.rho0 * self.u / self.beta

    @property
    def is_on_shell(self) -> bool:
        lhs = self.rho0 * (self.u**2 + self.phi)
        rhs = self.beta * self.omega
        return abs(lhs - rhs) <= ON_SHELL_RTOL * max(abs(lhs), abs(rhs), np.finfo(float).tiny)

    def __call__(self, x, t):
        return self.amplitude * np.exp(1j * (self.k * np.asarray(x) - self.omega * t))


@dataclass(frozen=True)
class LocalField1D:
    grid: np.ndarray
    psi: np.ndarray
    phi: object = 0.0
    beta: float = BETA_EL
    regularized_fraction: float = 0.0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        psi = np.asarray(self.psi, dtype=complex)
        if grid.ndim != 1 or grid.size < 2 or grid.shape != psi.shape:
            raise DomainError("grid and psi must be 1-D arrays of equal length")
        d = np.diff(grid)
        if not np.allclose(d, d[0], rtol=1e-9, atol=0) or d[0] <= 0:
            raise DomainError("grid must be uniform and increasing")
        if not np.all(np.isfinite(psi)):
            raise DomainError("psi must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def periodic(cls, length: float, n: int, psi_fn, phi=0.0, beta: float = BETA_EL):
        x = np.arange(n) * (length / n)
        return cls(x, psi_fn(x), phi, beta)

    @property
    def dx(self) -> float:
        return self.grid[1] - self.grid[0]

    @property
    def length(self) -> float:
        return self.dx * self.grid.size

    @property
    def rho0(self) -> np.ndarray:
        return np.abs(self.psi) ** 2

    @property
    def phi_profile(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.phi, dtype=float), self.grid.shape)

    def total_density(self) -> float:
        return float(np.sum(self.rho0) * self.dx)


def wavenumbers(n: int, dx: float) -> np.ndarray:
    return 2.0 * math.pi * np.fft.fftfreq(n, d=dx)


def laplacian(psi, dx: float):
    """Spectral Laplacian on a periodic grid."""
    k = wavenumbers(len(psi), dx)
    return np.fft.ifft(-(k**2) * np.fft.fft(psi))


def laplacian_matrix(n: int, dx: float) -> np.ndarray:
    """Dense circulant matrix of :func:`laplacian`."""
    return np.real(np.fft.ifft(-(wavenumbers(n, dx) ** 2)[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0))


def apply_local_hamiltonian(f: LocalField1D, psi=None):
    """``[-beta^2 Lap + rho0^2 phi] psi`` with ``rho0 = |psi|^2``."""
    psi = f.psi if psi is None else psi
    rho0 = np.abs(psi) ** 2
    return -(f.beta**2) * laplacian(psi, f.dx) + rho0**2 * f.phi_profile * psi


def stationary_residual(f: LocalField1D, omega: float) -> float:
    """``max |[-beta^2 Lap + rho0^2 phi] psi - rho0 beta omega psi|``."""
    lhs = apply_local_hamiltonian(f)
    return float(np.max(np.abs(lhs - f.rho0 * f.beta * omega * f.psi)))


def best_fit_omega(f: LocalField1D) -> float:
    """Frequency minimising the L2 stationary residual of ``f``."""
    a = f.rho0 * f.beta * f.psi
    h = apply_local_hamiltonian(f)
    denom = np.vdot(a, a).real
    if denom == 0:
        return 0.0
    return float(np.vdot(a, h).real / denom)


def _floor(f: LocalField1D, epsilon):
    if epsilon is None:
        return 1e-12 * max(float(np.max(f.rho0)), np.finfo(float).tiny)
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    return float(epsilon)


def _operator(rho, phi, beta, lap):
    # L = -(beta / rho) Lap + (rho / beta) phi, so that i dpsi/dt = L psi
    return -(beta / rho)[:, None] * lap + np.diag(rho * phi / beta)


def evolve_local(f: LocalField1D, dt: float, steps: int, epsilon=None, callback=None) -> LocalField1D:
    """Integrate ``i rho0 beta dpsi/dt = [-beta^2 Lap + rho0^2 phi] psi``.

    Crank-Nicolson in time with ``rho0`` taken at the half step and frozen
    inside each fixed-point iterate; ``rho0`` is floored at ``epsilon``
    (default ``1e-12`` times the initial peak density).  The fraction of
    grid samples that ever hit the floor is returned in
    ``regularized_fraction``.  ``callback(step, field)`` is invoked after
    every step.
    """
    if steps < 0:
        raise DomainError("steps must be non-negative")
    eps = _floor(f, epsilon)
    n = f.grid.size
    lap = laplacian_matrix(n, f.dx)
    phi = f.phi_profile
    beta = f.beta
    eye = np.eye(n)
    psi = f.psi.copy()
    hit = np.zeros(n, dtype=bool)
    scale = max(float(np.max(np.abs(psi))), np.finfo(float).tiny)

    for step in range(1, steps + 1):
        rho_old = np.abs(psi) ** 2
        nxt = psi
        for it in range(FIXED_POINT_MAXITER):
            rho_raw = 0.5 * (rho_old + np.abs(nxt) ** 2)
            hit |= rho_raw < eps
            rho = np.maximum(rho_raw, eps)
            L = _operator(rho, phi, beta, lap)
            half = 0.5j * dt * L
            cand = np.linalg.solve(eye + half, psi - half @ psi)
            change = float(np.max(np.abs(cand - nxt)))
            nxt = cand
            if change < FIXED_POINT_TOL * scale:
                break
        else:
            raise ConvergenceError(
                f"fixed point did not converge in {FIXED_POINT_MAXITER} iterations "
                f"at step {step} (last change {change:.3e})"
            )
        psi = nxt
        if not np.all(np.isfinite(psi)):
            raise ConvergenceError(f"non-finite field at step {step}")
        if callback is not None:
            callback(step, replace(f, psi=psi))
    return replace(f, psi=psi, regularized_fraction=float(np.mean(hit)))


def cn_phase_per_step(omega: float, dt: float) -> float:
    """Phase advance of one Crank-Nicolson step on a mode of frequency ``omega``."""
    return 2.0 * math.atan(0.5 * omega * dt)


@dataclass(frozen=True)
class SuperpositionResidual:
    lhs: float
    rhs: float
    deviation: float
    density: float = field(default=0.0)


def superposition_residual(w1: LocalPlaneWave, w2: LocalPlaneWave, x, t,
                           floor: float = 1e-12) -> SuperpositionResidual:
    """Hamiltonian density of ``psi1 + psi2`` per the interference formula.

    ``lhs = beta (|a1|^2 w1 + |a2|^2 w2) / |psi_s|^2
    + phi (|psi_s|^4 - |a1|^4 - |a2|^4) / |psi_s|^2``, compared with
    ``rhs = beta (w1 + w2)``.
    """
    if not (w1.is_on_shell and w2.is_on_shell):
        raise DomainError("both waves must be on-shell")
    if w1.beta != w2.beta or w1.phi != w2.phi:
        raise DomainError("waves must share beta and phi")
    beta, phi = w1.beta, w1.phi
    s = complex(w1(x, t) + w2(x, t))
    dens = abs(s) ** 2
    if dens < floor:
        raise SingularityError(
            f"|psi1 + psi2|^2 = {dens:.3e} below floor {floor:.1e} (destructive interference)"
        )
    r1, r2 = w1.rho0, w2.rho0
    lhs = beta * (r1 * w1.omega + r2 * w2.omega) / dens + phi * (dens**2 - r1**2 - r2**2) / dens
    rhs = beta * (w1.omega + w2.omega)
    return SuperpositionResidual(lhs, rhs, lhs - rhs, dens)


def _gamma_denominator(delta_phi):
    return 4.0 * (1.0 + np.cos(delta_phi)) ** 2 - 2.0


GAMMA_CRITICAL_COS = -1.0 + 1.0 / math.sqrt(2.0)
GAMMA_CRITICAL_PHASES = (math.acos(GAMMA_CRITICAL_COS), 2 * math.pi - math.acos(GAMMA_CRITICAL_COS))


def interference_gamma(delta_phi, beta: float = BETA_EL):
    """``beta (1 + 2 cos d) / (4 (1 + cos d)^2 - 2)``.

    Raises :class:`SingularityError` within ``1e-9`` of a pole; the poles sit
    at ``cos d = -1 + 1/sqrt(2)`` (the other root, ``-1 - 1/sqrt(2)``, is
    not a real phase).
    """
    d = np.asarray(delta_phi, dtype=float)
    den = _gamma_denominator(d)
    if np.any(np.abs(den) < GAMMA_POLE_TOL):
        raise SingularityError(
            f"Gamma pole: phase difference at cos = {GAMMA_CRITICAL_COS:.12f}, i.e. "
            f"{GAMMA_CRITICAL_PHASES[0]:.12f} or {GAMMA_CRITICAL_PHASES[1]:.12f} (mod 2 pi)",
            critical=GAMMA_CRITICAL_PHASES,
        )
    out = beta * (1.0 + 2.0 * np.cos(d)) / den
    return float(out) if out.ndim == 0 else out


def wave_equation_residual(waves, grid, t: float, u: float) -> float:
    """``max |(Lap - u^-2 d^2/dt^2) psi|`` for a sum of plane waves.

    Space uses the spectral Laplacian on ``grid``; the time derivative is
    exact for the modal sum (``-omega_j^2 psi_j``).
    """
    grid = np.asarray(grid, dtype=float)
    dx = grid[1] - grid[0]
    psi = sum(w(grid, t) for w in waves)
    psi_tt = sum(-(w.omega**2) * w(grid, t) for w in waves)
    return float(np.max(np.abs(laplacian(psi, dx) - psi_tt / u**2)))
