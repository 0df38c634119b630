"""Analytic coherence, polarization and array-size budget.

Independent decoherence mechanisms combine additively in rate.  Every
mechanism is kept in the report, including the ones a field gradient
suppresses, so the effect of the gradient stays visible.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass, field

from .constants import (
    DEFAULT_CONSTANTS,
    H_PLANCK,
    K_B,
    SI_ATOMIC_DENSITY,
    PhysicalConstants,
    ee_dipolar,
    en_dipolar,
)
from .hamiltonians import ChainParams

# spin-lattice endpoints (K, s)
T1_LOW = (4.0, 10.0)
T1_HIGH = (10.0, 1e-3)

# Brown's spectral-diffusion estimate is calibrated at this point
BROWN_FRACTION = 0.0008
BROWN_TM = 85e-3  # s
GAMMA_29SI = 8.465e6  # |gamma|/2pi, Hz/T

FLIPFLOP_SUPPRESSION_GRADIENT = 1000.0  # T/m


@dataclass(frozen=True)
class ThermalParams:
    B: float  # T
    T: float  # K
    g_e: float = DEFAULT_CONSTANTS.g_e

    def __post_init__(self):
        if self.B <= 0 or self.T <= 0:
            raise ValueError("B and T must be positive")


def thermal_alpha(p: ThermalParams, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Boltzmann population ratio of the upper to lower electron level."""
    nu = p.g_e * constants.mu_B_over_h * p.B
    return math.exp(-H_PLANCK * nu / (K_B * p.T))


def _orbach_fit() -> tuple[float, float]:
    (ta, t1a), (tb, t1b) = T1_LOW, T1_HIGH
    barrier = math.log(t1a / t1b) / (1 / ta - 1 / tb)  # Delta_E / k_B in K
    prefactor = t1a / math.exp(barrier / ta)
    return prefactor, barrier


T1_PREFACTOR, T1_BARRIER_K = _orbach_fit()


def t1_spin_lattice(T: float) -> float:
    """Orbach-form T1(T) = C exp(Delta/T) through (4 K, 10 s) and (10 K, 1 ms)."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    if not T1_LOW[0] <= T <= T1_HIGH[0]:
        warnings.warn(f"T = {T} K is outside the fitted 4-10 K range", stacklevel=2)
    return T1_PREFACTOR * math.exp(T1_BARRIER_K / T)


def t2_si29(r_typical_nm: float) -> float:
    """Dipolar estimate of the 29Si-limited T2: 1/D with D = 15.7/r^3 kHz."""
    return 1 / (en_dipolar(r_typical_nm) * 1e3)


def t_flipflop(r_nm: float) -> float:
    return 1 / ee_dipolar(r_nm)


def _brown_raw_rate(fraction: float, constants: PhysicalConstants) -> float:
    # 0.37 gamma_e^1/2 gamma_Si^3/2 N hbar (0.5*1.5)^1/4 in SI with angular gyromagnetic ratios;
    # the expression is missing a mu0/4pi-type factor, fixed by calibration below
    g_e = 2 * math.pi * constants.gamma_e
    g_si = 2 * math.pi * GAMMA_29SI
    n = fraction * SI_ATOMIC_DENSITY
    hbar = H_PLANCK / (2 * math.pi)
    return 0.37 * math.sqrt(g_e) * g_si**1.5 * n * hbar * 0.75**0.25


@dataclass(frozen=True)
class BrownEstimate:
    t_m: float  # s
    raw_rate: float  # uncalibrated expression value
    normalization: float
    extrapolated: bool


def brown_estimate(fraction_si29: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> BrownEstimate:
    if not 0 < fraction_si29 <= 1:
        raise ValueError("29Si fraction must be in (0, 1]")
    norm = (1 / BROWN_TM) / _brown_raw_rate(BROWN_FRACTION, constants)
    raw = _brown_raw_rate(fraction_si29, constants)
    ratio = fraction_si29 / BROWN_FRACTION
    return BrownEstimate(1 / (norm * raw), raw, norm, not 0.1 <= ratio <= 10)


def brown_tm(fraction_si29: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Spectral-diffusion T_m (s), linear in 29Si density, 85 ms at 0.08 %."""
    return brown_estimate(fraction_si29, constants).t_m


class Mechanism(str, enum.Enum):
    SPIN_LATTICE = "SpinLattice"
    SI29_SPECTRAL_DIFFUSION = "Si29SpectralDiffusion"
    ELECTRON_FLIP_FLOP = "ElectronFlipFlop"


@dataclass(frozen=True)
class MechanismRate:
    name: Mechanism
    rate: float  # Hz
    suppressed_by_gradient: bool = False
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("rate must be non-negative")


@dataclass(frozen=True)
class ArchitectureSize:
    n_geom: int
    n_spectral: int
    n: int
    m_copies: int


def _floor(x: float) -> int:
    # guards against 41.9/0.1 = 418.99999999999994
    return math.floor(x * (1 + 1e-12))


def architecture_size(
    resonator_inner: tuple[float, float] = (2e-6, 10e-6),
    spacing_dense: float = 5e-9,
    spacing_sparse: float = 100e-9,
    hyperfine_sep_G: float = 41.9,
    domain_G: float = 0.1,
) -> ArchitectureSize:
    """Qubits per chain (geometric and spectral limits) and number of chain copies."""
    vals = (*resonator_inner, spacing_dense, spacing_sparse, hyperfine_sep_G, domain_G)
    if any(v <= 0 for v in vals):
        raise ValueError("all architecture inputs must be positive")
    small, large = sorted(resonator_inner)
    n_geom = _floor(small / spacing_dense)
    n_spectral = _floor(hyperfine_sep_G / domain_G)
    return ArchitectureSize(n_geom, n_spectral, min(n_geom, n_spectral), _floor(large / spacing_sparse))


@dataclass(frozen=True)
class ArchitectureParams:
    resonator_inner: tuple[float, float] = (2e-6, 10e-6)  # m
    spacing_sparse: float = 100e-9  # m
    hyperfine_sep_G: float = 41.9
    domain_G: float = 0.1


@dataclass(frozen=True)
class BudgetReport:
    mechanisms: list[MechanismRate]
    t2_effective: float
    t_store_nuclear: float
    gate_time: float
    gate_count_capacity: float
    coherence_gate_ratio: float
    divincenzo_ratio_ok: bool
    n_qubits_geom: int
    n_qubits_spectral: int
    m_copies: int
    homogeneous_linewidth_G: float
    domain_G: float
    domain_ok: bool
    t2_dipolar_estimate: float
    gradient: float
    gradient_on: bool

    @property
    def active_rate(self) -> float:
        return sum(m.rate for m in self.mechanisms if not m.suppressed_by_gradient)

    def dominant(self) -> MechanismRate:
        return max((m for m in self.mechanisms if not m.suppressed_by_gradient), key=lambda m: m.rate)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mechanisms"] = [{**asdict(m), "name": m.name.value} for m in self.mechanisms]
        return d


DIVINCENZO_MIN_RATIO = 1e4


def build_budget(
    chain: ChainParams,
    T: float,
    fraction_si29: float,
    gradient_on: bool,
    gate_time: float,
    t_store_nuclear: float,
    arch: ArchitectureParams = ArchitectureParams(),
    r_typical_si29_nm: float = 2.5,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> BudgetReport:
    """Assemble mechanism rates, effective T2, gate-count figures and array size.

    The 29Si contribution entering the rate sum is the calibrated Brown
    estimate; the point-dipole estimate is carried alongside for comparison.
    """
    if gate_time <= 0 or t_store_nuclear <= 0:
        raise ValueError("gate_time and t_store_nuclear must be positive")
    t1 = t1_spin_lattice(T)
    brown = brown_estimate(fraction_si29, constants)
    dense_nm = chain.spacing * 1e9
    sparse_nm = arch.spacing_sparse * 1e9
    suppressed = gradient_on and abs(chain.gradient) >= FLIPFLOP_SUPPRESSION_GRADIENT
    mechanisms = [
        MechanismRate(Mechanism.SPIN_LATTICE, 1 / t1, False, {"T_K": T, "t1_s": t1}),
        MechanismRate(Mechanism.SI29_SPECTRAL_DIFFUSION, 1 / brown.t_m, False,
                      {"fraction": fraction_si29, "brown_tm_s": brown.t_m,
                       "calibrated_extrapolation": brown.extrapolated,
                       "dipolar_estimate_t2_s": t2_si29(r_typical_si29_nm)}),
        MechanismRate(Mechanism.ELECTRON_FLIP_FLOP, ee_dipolar(dense_nm), suppressed,
                      {"axis": "dense", "r_nm": dense_nm, "gradient_T_per_m": chain.gradient}),
        MechanismRate(Mechanism.ELECTRON_FLIP_FLOP, ee_dipolar(sparse_nm), False,
                      {"axis": "sparse", "r_nm": sparse_nm}),
    ]
    rate = sum(m.rate for m in mechanisms if not m.suppressed_by_gradient)
    t2 = 1 / rate
    linewidth_G = 1 / (math.pi * t2) / constants.gamma_e * 1e4
    size = architecture_size(arch.resonator_inner, chain.spacing, arch.spacing_sparse,
                             arch.hyperfine_sep_G, arch.domain_G)
    return BudgetReport(
        mechanisms=mechanisms,
        t2_effective=t2,
        t_store_nuclear=t_store_nuclear,
        gate_time=gate_time,
        gate_count_capacity=t_store_nuclear / gate_time,
        coherence_gate_ratio=t2 / gate_time,
        divincenzo_ratio_ok=t2 / gate_time >= DIVINCENZO_MIN_RATIO,
        n_qubits_geom=size.n_geom,
        n_qubits_spectral=size.n_spectral,
        m_copies=size.m_copies,
        homogeneous_linewidth_G=linewidth_G,
        domain_G=arch.domain_G,
        domain_ok=linewidth_G < arch.domain_G,
        t2_dipolar_estimate=t2_si29(r_typical_si29_nm),
        gradient=chain.gradient,
        gradient_on=gradient_on,
    )
