"""Intrinsic-field magnetic interaction, quantum eraser, Zeno dynamics and IFM.

The Zeno routines use hbar = 1: ``H`` is in units of angular frequency and
``t`` in the matching inverse units.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from qensemble.errors import BeamStoppingError, DomainError

# ---------------------------------------------------------------------------
# magnetic interaction of intrinsic fields


@dataclass(frozen=True)
class EmFieldState:
    E0: float
    B0: float
    k0: float
    omega0: float
    u0: float

    def __post_init__(self):
        if not self.u0 > 0:
            raise DomainError("propagation speed must be positive")
        if not math.isclose(self.E0, self.u0 * self.B0, rel_tol=1e-12, abs_tol=1e-300):
            raise DomainError(f"E0 = {self.E0} differs from u0 * B0 = {self.u0 * self.B0}")
        if not math.isclose(self.k0 * self.u0, self.omega0, rel_tol=1e-12, abs_tol=1e-300):
            raise DomainError(f"k0 u0 = {self.k0 * self.u0} differs from omega0 = {self.omega0}")

    @classmethod
    def plane_wave(cls, B0: float, k0: float, u0: float) -> "EmFieldState":
        return cls(E0=u0 * B0, B0=B0, k0=k0, omega0=k0 * u0, u0=u0)

    def phase(self, x, t):
        return self.k0 * np.asarray(x) - self.omega0 * t

    # fixed orientation: propagation along x, E along y, B along z
    polarization = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


class PrimedFields(NamedTuple):
    Ey: object
    Ez: object
    By: object
    Bz: object


def apply_uniform_field(f: EmFieldState, B_ext: float, theta: float, x, t,
                        tau: Optional[float] = None) -> PrimedFields:
    """Intrinsic fields after a field ``B_ext (0, -sin theta, cos theta)`` ramped over ``tau``.

    With ``tau=None`` the ramp ratio ``x / tau`` is replaced by ``u0``,
    the substitution under which the interaction potential is evaluated.
    """
    if tau is None:
        ramp = f.u0
    else:
        if not tau > 0:
            raise DomainError("tau must be positive")
        ramp = np.asarray(x) / tau
    c = np.cos(f.phase(x, t))
    st, ct = math.sin(theta), math.cos(theta)
    Ey = f.E0 * c - B_ext * ct * ramp
    Ez = -B_ext * st * ramp + 0.0 * c
    By = -B_ext * st + 0.0 * c
    Bz = f.B0 * c + B_ext * ct
    return PrimedFields(Ey, Ez, By, Bz)


def em_potential(fields: PrimedFields, u0: float):
    """``1/2 (|E|^2 / u^2 + |B|^2)`` of the primed fields."""
    e2 = np.abs(fields.Ey) ** 2 + np.abs(fields.Ez) ** 2
    b2 = np.abs(fields.By) ** 2 + np.abs(fields.Bz) ** 2
    return 0.5 * (e2 / u0**2 + b2)


def em_potential_closed(f: EmFieldState, B_ext: float, x, t):
    """``B0^2 cos^2(k0 x - omega0 t) + B_ext^2``."""
    return f.B0**2 * np.cos(f.phase(x, t)) ** 2 + B_ext**2


def kinetic_potential_shift(phi_k0: float, B_ext: float, sign: int = -1) -> float:
    """``phi_k' = phi_k0 + sign * B_ext^2``; ``sign=-1`` is the branch used for the phase shift."""
    if sign not in (-1, 1):
        raise DomainError("sign must be +1 or -1")
    return phi_k0 + sign * B_ext**2


def velocity_shift(B_ext: float, rho_bar: float) -> float:
    """Positive root ``Delta u = B_ext / sqrt(rho_bar)`` of ``rho_bar Delta u^2 = B_ext^2``."""
    if not rho_bar > 0:
        raise DomainError("rho_bar must be positive")
    return abs(B_ext) / math.sqrt(rho_bar)


def unwrapped_phase(l: float, lam: float, B_ext: float, rho_bar: float, u0: float) -> float:
    """``2 pi (l / lambda) B_ext / sqrt(rho_bar u0^2)`` in radians."""
    if not (l > 0 and lam > 0 and rho_bar > 0 and u0 > 0):
        raise DomainError("l, lambda, rho_bar and u0 must be positive")
    if B_ext < 0:
        raise DomainError("B_ext must be non-negative")
    if B_ext**2 > rho_bar * u0**2:
        raise BeamStoppingError(
            f"B_ext^2 = {B_ext**2:.3e} exceeds rho_bar u0^2 = {rho_bar * u0**2:.3e}"
        )
    return 2.0 * math.pi * (l / lam) * B_ext / math.sqrt(rho_bar * u0**2)


def magnetic_phase_shift(l: float, lam: float, B_ext: float, rho_bar: float, u0: float):
    """Return ``(alpha, n)``: the phase in ``[0, 2 pi)`` and the whole turns removed."""
    turns = unwrapped_phase(l, lam, B_ext, rho_bar, u0) / (2.0 * math.pi)
    n = math.floor(turns)
    return 2.0 * math.pi * (turns - n), n


# ---------------------------------------------------------------------------
# quantum eraser

BASELINE = "baseline"
ROTATOR = "rotator_in_path1"
ROTATOR_DIAGONAL = "rotator_plus_diagonal"
ERASER_STAGES = (BASELINE, ROTATOR, ROTATOR_DIAGONAL)


@dataclass(frozen=True)
class EraserConfig:
    stage: str
    phase: float
    base_intensity: float

    def __post_init__(self):
        if self.stage not in ERASER_STAGES:
            raise DomainError(f"stage must be one of {ERASER_STAGES}")
        if not self.base_intensity > 0:
            raise DomainError("base_intensity must be positive")


def eraser_intensity(c: EraserConfig) -> float:
    """Recombined-beam potential for each eraser stage (closed forms)."""
    if c.stage == BASELINE:
        return 0.5 * c.base_intensity * (1.0 + math.cos(c.phase))
    if c.stage == ROTATOR:
        return c.base_intensity
    return 0.25 * c.base_intensity * (1.0 + math.cos(c.phase))


_EX = np.array([1.0, 0.0, 0.0])
_EY = np.array([0.0, 1.0, 0.0])
_EZ = np.array([0.0, 0.0, 1.0])
_ROT90 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


def eraser_fields(stage: str, E1: complex, B1: complex, phase: float):
    """Recombined complex ``(E, B)`` 3-vectors built from the two path fields.

    Path 2 carries ``e^{i phase}``.  The rotator turns path 1 by 90 degrees
    about the beam axis (``e_x -> e_y``, ``e_y -> -e_x``); the diagonal
    polarizer projects ``E`` on ``(e_x + e_y)/sqrt 2`` and ``B`` on the
    transverse partner ``e_z x e_xy``.
    """
    if stage not in ERASER_STAGES:
        raise DomainError(f"stage must be one of {ERASER_STAGES}")
    e1, b1 = E1 * _EX, B1 * _EY
    shift = complex(math.cos(phase), math.sin(phase))
    e2, b2 = E1 * shift * _EX, B1 * shift * _EY
    if stage != BASELINE:
        e1, b1 = _ROT90 @ e1, _ROT90 @ b1
    E = (e1 + e2) / math.sqrt(2.0)
    B = (b1 + b2) / math.sqrt(2.0)
    if stage == ROTATOR_DIAGONAL:
        pe = (_EX + _EY) / math.sqrt(2.0)
        pb = np.cross(_EZ, pe)
        E = np.dot(pe, E) * pe
        B = np.dot(pb, B) * pb
    return E, B


def field_potential(E, B, c: float = 1.0) -> float:
    return 0.5 * (np.vdot(E, E).real / c**2 + np.vdot(B, B).real)


def contrast(values) -> float:
    v = np.asarray(values, dtype=float)
    hi, lo = float(v.max()), float(v.min())
    return (hi - lo) / (hi + lo)


# ---------------------------------------------------------------------------
# quantum Zeno effect


class ZenoValidityWarning(UserWarning):
    """The second-order survival expansion is used outside ``dH2 t^2 < 1``."""


def zeno_second_order_survival(dH2: float, t: float) -> float:
    """``1 - dH2 t^2``; warns when ``dH2 t^2 >= 1``."""
    if dH2 < 0:
        raise DomainError("energy variance must be non-negative")
    x = dH2 * t * t
    if x >= 1:
        warnings.warn(f"dH2 t^2 = {x:g} >= 1: expansion invalid", ZenoValidityWarning, stacklevel=2)
    return 1.0 - x


def zeno_repeated_measurement(dH2: float, t: float, n: int) -> float:
    """``[1 - dH2 (t/n)^2]^n``, the probability that ``n`` checks all find the initial state."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if dH2 < 0:
        raise DomainError("energy variance must be non-negative")
    x = dH2 * (t / n) ** 2
    if x >= 1:
        warnings.warn(f"dH2 (t/n)^2 = {x:g} >= 1: expansion invalid", ZenoValidityWarning, stacklevel=2)
        return (1.0 - x) ** n
    return math.exp(n * math.log1p(-x))


MAX_ZENO_DIM = 64


@dataclass(frozen=True)
class ZenoSystem:
    H: np.ndarray
    initial: np.ndarray

    def __post_init__(self):
        H = np.asarray(self.H, dtype=complex)
        psi = np.asarray(self.initial, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DomainError("H must be square")
        if H.shape[0] > MAX_ZENO_DIM:
            raise DomainError(f"dimension {H.shape[0]} exceeds {MAX_ZENO_DIM}")
        if np.max(np.abs(H - H.conj().T), initial=0.0) > 1e-12:
            raise DomainError("H is not Hermitian")
        if psi.shape != (H.shape[0],):
            raise DomainError("initial state has the wrong dimension")
        if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise DomainError("initial state must have unit norm")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "initial", psi)

    @property
    def dim(self) -> int:
        return self.H.shape[0]


def energy_variance(z: ZenoSystem) -> float:
    """``<H^2> - <H>^2`` in the initial state."""
    hpsi = z.H @ z.initial
    mean = np.vdot(z.initial, hpsi).real
    return float(np.vdot(hpsi, hpsi).real - mean**2)


def evolve_state(z: ZenoSystem, t: float) -> np.ndarray:
    """``exp(-i H t) initial`` via the eigendecomposition of ``H``."""
    evals, evecs = np.linalg.eigh(z.H)
    return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ z.initial))


def zeno_exact_evolution(z: ZenoSystem, t: float) -> float:
    """Survival probability ``|<initial| exp(-i H t) |initial>|^2``."""
    return float(abs(np.vdot(z.initial, evolve_state(z, t))) ** 2)


def interaction_amplitudes(z: ZenoSystem, t: float, rtol: float = 1e-12, atol: float = 1e-13):
    """Solve ``i da_j/dt = sum_k V_jk a_k exp(i (E_j - E_k) t)``.

    ``E`` is the diagonal of ``H`` and ``V`` its off-diagonal part; the
    state is ``sum_k a_k(t) exp(-i E_k t) u_k``.
    """
    E = np.real(np.diag(z.H))
    V = z.H - np.diag(np.diag(z.H))
    dE = E[:, None] - E[None, :]

    def rhs(s, y):
        a = y[: z.dim] + 1j * y[z.dim:]
        da = -1j * ((V * np.exp(1j * dE * s)) @ a)
        return np.concatenate([da.real, da.imag])

    y0 = np.concatenate([z.initial.real, z.initial.imag])
    if t == 0:
        return z.initial.copy()
    sol = solve_ivp(rhs, (0.0, t), y0, method="DOP853", rtol=rtol, atol=atol)
    y = sol.y[:, -1]
    return y[: z.dim] + 1j * y[z.dim:]


def state_from_amplitudes(z: ZenoSystem, a: np.ndarray, t: float) -> np.ndarray:
    E = np.real(np.diag(z.H))
    return a * np.exp(-1j * E * t)


def polarizer_chain_transmission(n: int, element_transmission: float = 1.0) -> float:
    """Transmission through ``n`` rotators (each ``pi / 2n``) each followed by a polarizer.

    ``element_transmission`` multiplies once per optical element (``2n`` of them).
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if not 0 < element_transmission <= 1:
        raise DomainError("element transmission must lie in (0, 1]")
    return math.cos(math.pi / (2 * n)) ** (2 * n) * element_transmission ** (2 * n)


# ---------------------------------------------------------------------------
# interaction-free measurement


class IfmResult(NamedTuple):
    p_detect: float
    p_trigger: float
    merit: float


def ifm_figure_of_merit(R: float) -> IfmResult:
    """Bomb-in Michelson event tree for beam-splitter reflectivity ``R``.

    Transmitted light (``1 - R``) enters the bomb arm and triggers it;
    reflected light returns from the mirror arm and reaches ``D_ifm`` on
    transmission, ``R (1 - R)``.  The figure of merit is
    ``p_detect / (p_detect + p_trigger) = R / (1 + R)``; at ``R = 1`` the
    limit ``1/2`` is returned.
    """
    if not 0 <= R <= 1:
        raise DomainError(f"reflectivity must lie in [0, 1], got {R}")
    p_trigger = 1.0 - R
    p_detect = R * (1.0 - R)
    merit = R / (1.0 + R)
    return IfmResult(p_detect, p_trigger, merit)
