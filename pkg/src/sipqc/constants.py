"""Physical constants for P donors in 28Si and the point-dipole coupling laws."""
from __future__ import annotations

from dataclasses import dataclass

from scipy import constants as sc

MU_B_OVER_H = sc.physical_constants["Bohr magneton in Hz/T"][0]
H_PLANCK = sc.h
K_B = sc.k
MU_0 = sc.mu_0
SI_ATOMIC_DENSITY = 5.0e28  # m^-3

# point-dipole prefactors: kHz nm^3 (electron-29Si) and MHz nm^3 (electron-electron)
EN_DIPOLAR_KHZ_NM3 = 15.7
EE_DIPOLAR_MHZ_NM3 = 12.98 * 4


@dataclass(frozen=True)
class PhysicalConstants:
    """Spin-Hamiltonian constants; frequencies in Hz, gyromagnetic ratios in Hz/T."""

    g_e: float = 1.9985
    mu_B_over_h: float = MU_B_OVER_H
    gamma_n_31P: float = 17.235e6
    A_hyperfine: float = 117.4e6

    def __post_init__(self):
        for name in ("g_e", "mu_B_over_h", "gamma_n_31P"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive, got {getattr(self, name)}")
        # A = 0 is allowed as the hyperfine-free limit
        if self.A_hyperfine < 0:
            raise ValueError(f"A_hyperfine must be non-negative, got {self.A_hyperfine}")

    @property
    def gamma_e(self) -> float:
        """Electron frequency per field, g_e * mu_B / h (Hz/T)."""
        return self.g_e * self.mu_B_over_h

    @property
    def hyperfine_field(self) -> float:
        """Hyperfine splitting expressed as an electron field offset (T)."""
        return self.A_hyperfine / self.gamma_e


DEFAULT_CONSTANTS = PhysicalConstants()


def en_dipolar(r_nm: float) -> float:
    """Electron-29Si dipolar interaction in kHz at distance ``r_nm``."""
    if r_nm <= 0:
        raise ValueError("distance must be positive")
    return EN_DIPOLAR_KHZ_NM3 / r_nm**3


def ee_dipolar(r_nm: float) -> float:
    """Electron-electron dipolar interaction in Hz at distance ``r_nm``."""
    if r_nm <= 0:
        raise ValueError("distance must be positive")
    return EE_DIPOLAR_MHZ_NM3 * 1e6 / r_nm**3
