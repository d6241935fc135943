"""Physical constants (SI) and the electron-volume derived quantities.

Energy convention used throughout the package: the total energy of an
ensemble member is ``E_T = m u**2`` (twice the classical kinetic energy),
so that the wave-number cutoff is ``k_max = sqrt(m E_T) / hbar = m u / hbar``.
Operations that work with a kinetic energy ``E_k = m u**2 / 2`` say so and
use the equivalent ``sqrt(2 m E_k) / hbar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from qensemble.errors import DomainError

HBAR = 1.054571817e-34  # J s (CODATA 2018)
M_ELECTRON = 9.1093837015e-31  # kg (CODATA 2018)
R_HYDROGEN = 3.3e-10  # m, atomic radius used for the free-electron volume


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float
    m_electron: float
    r_hydrogen: float
    v_electron: float
    beta_el: float

    def __post_init__(self):
        for name in ("hbar", "m_electron", "r_hydrogen", "v_electron", "beta_el"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be finite and positive, got {value!r}")


def derived_constants(r_hydrogen: float = R_HYDROGEN, hbar: float = HBAR,
                      m_electron: float = M_ELECTRON) -> PhysicalConstants:
    """Build the constant registry for a given hydrogen radius.

    The free-electron volume is ``2 pi r**3`` and the local constant is
    ``beta_el = hbar / v_electron`` (units kg m^-1 s^-1).
    """
    if not (math.isfinite(r_hydrogen) and r_hydrogen > 0):
        raise DomainError(f"r_hydrogen must be positive, got {r_hydrogen!r}")
    v_electron = 2.0 * math.pi * r_hydrogen**3
    return PhysicalConstants(
        hbar=hbar,
        m_electron=m_electron,
        r_hydrogen=r_hydrogen,
        v_electron=v_electron,
        beta_el=hbar / v_electron,
    )


def norm_integral_coefficient(m: float, hbar: float = HBAR) -> float:
    """Coefficient ``alpha = 4 pi m**4 / (3 hbar**3)`` in ``int |psi|^2 = alpha u**3``."""
    if not m > 0:
        raise DomainError(f"mass must be positive, got {m!r}")
    return 4.0 * math.pi * m**4 / (3.0 * hbar**3)


DEFAULT = derived_constants()
BETA_EL = DEFAULT.beta_el
V_ELECTRON = DEFAULT.v_electron
