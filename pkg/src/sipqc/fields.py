"""Microwire and resonator magnetostatics plus the electrical power budget.

The closed-form expressions treat each wire as a line current at distance
Delta/2 + a/2 from the midline.  :func:`biot_savart_square_wire` integrates
the exact 2-D kernel over square conductors centred at those same positions,
so the two routes differ only by the finite cross-section.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import MU_0

K = MU_0 / (2 * math.pi)


class Polarity(str, enum.Enum):
    PARALLEL = "parallel"
    ANTIPARALLEL = "antiparallel"


@dataclass(frozen=True)
class WirePair:
    a: float = 1e-6  # square side, m
    delta: float = 2e-6  # separation parameter, m
    length: float = 1e-5  # m
    conductivity: float = 1.5e10  # S/m
    current: float = 1.0  # A
    polarity: Polarity = Polarity.PARALLEL

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("wire side a must be positive")
        if self.delta <= self.a:
            raise ValueError("delta must exceed a (wires would overlap)")
        if self.conductivity <= 0 or self.length <= 0:
            raise ValueError("length and conductivity must be positive")
        object.__setattr__(self, "polarity", Polarity(self.polarity))

    @property
    def offset(self) -> float:
        """Distance of each effective line current from the midline."""
        return self.delta / 2 + self.a / 2

    @property
    def inner_limit(self) -> float:
        """Largest |x| accepted by the field evaluators."""
        return self.delta / 2 - self.a / 2


@dataclass(frozen=True)
class ResonatorModel:
    field_per_amp: float = 0.24  # T/A, calibrated so 25 A -> 6 T
    loop_resistance: float | None = None  # ohm; None -> one wire-equivalent

    def __post_init__(self):
        if self.field_per_amp <= 0:
            raise ValueError("field_per_amp must be positive")


@dataclass(frozen=True)
class PulseSchedule:
    pulse_current: float = 25.0  # A
    pulse_duration: float = 10e-6  # s
    period: float = 10e-3  # s

    def __post_init__(self):
        if self.period <= 0 or self.pulse_duration < 0:
            raise ValueError("period must be positive and duration non-negative")
        if self.pulse_duration > self.period:
            raise ValueError(f"duty cycle {self.duty:.3g} exceeds 1")

    @property
    def duty(self) -> float:
        return self.pulse_duration / self.period


class ConductorError(ValueError):
    """Evaluation point outside the region between the wires."""


def _check_x(x, w: WirePair) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= w.inner_limit):
        raise ConductorError(
            f"x must satisfy |x| < delta/2 - a/2 = {w.inner_limit:.3e} m (between the wires)"
        )
    return x


def gradient_per_amp(x, w: WirePair = WirePair()):
    """Field gradient per ampere (T/(m A)) for co-directed currents."""
    x = _check_x(x, w)
    c = w.offset
    g = K * (1 / (x + c) ** 2 + 1 / (x - c) ** 2)
    return g if g.ndim else float(g)


def field_per_amp(x, w: WirePair = WirePair(polarity=Polarity.ANTIPARALLEL)):
    """Field per ampere (T/A) on the midplane; zero-sum for parallel currents at x = 0."""
    x = _check_x(x, w)
    c = w.offset
    if w.polarity is Polarity.ANTIPARALLEL:
        b = K * (1 / (x + c) - 1 / (x - c))
    else:
        b = K * (1 / (x - c) + 1 / (x + c))
    b = np.abs(b)
    return b if b.ndim else float(b)


@dataclass(frozen=True)
class OracleResult:
    field: float  # T/A
    gradient: float  # T/(m A)
    grid_n: int


def biot_savart_square_wire(x: float, w: WirePair = WirePair(), grid_n: int = 64,
                            centre: float | None = None) -> OracleResult:
    """Midpoint quadrature of the infinite-wire kernel over both square cross-sections.

    Conductors are centred at +-``centre`` (default delta/2 + a/2, the line
    positions of the closed forms; pass delta/2 to place the conductor centres
    delta apart).  The field is the z component at (x, 0) and the gradient its
    analytic x-derivative.  Polarity decides the sign of the second wire's
    current.
    """
    if grid_n < 16:
        raise ValueError("grid_n must be >= 16")
    x = float(_check_x(x, w))
    c = w.offset if centre is None else centre
    if centre is not None and abs(x) >= c - w.a / 2:
        raise ConductorError(f"x = {x:.3e} m lies inside a conductor")
    u = ((np.arange(grid_n) + 0.5) / grid_n - 0.5) * w.a
    du, dz = np.meshgrid(u, u, indexing="ij")
    second = 1.0 if w.polarity is Polarity.PARALLEL else -1.0
    b = g = 0.0
    # current +y in the left wire; B_z(x) = K I dx / r^2, dB_z/dx = K I (z^2 - dx^2) / r^4
    for sign, xc in ((1.0, -c), (second, c)):
        dx = x - (xc + du)
        r2 = dx**2 + dz**2
        b += sign * np.mean(dx / r2)
        g += sign * np.mean((dz**2 - dx**2) / r2**2)
    return OracleResult(abs(K * b), abs(K * g), grid_n)


def current_for_gradient(g_target: float, w: WirePair = WirePair()) -> float:
    if g_target <= 0:
        raise ValueError("target gradient must be positive")
    return g_target / gradient_per_amp(0.0, w)


def wire_resistance(w: WirePair = WirePair()) -> float:
    return w.length / (w.conductivity * w.a**2)


def joule_power(w: WirePair, current: float) -> float:
    """Dissipation in one wire section (W)."""
    return current**2 * wire_resistance(w)


def duty_cycle_power(w: WirePair, res: ResonatorModel, s: PulseSchedule) -> float:
    """Time-averaged dissipation of both wires and the resonator loop (W)."""
    r_wire = wire_resistance(w)
    r_res = r_wire if res.loop_resistance is None else res.loop_resistance
    return s.pulse_current**2 * (2 * r_wire + r_res) * s.duty


def prepolarization_field(res: ResonatorModel, i_res: float, w: WirePair, i_wires: float) -> float:
    w = replace(w, polarity=Polarity.ANTIPARALLEL)
    return res.field_per_amp * i_res + field_per_amp(0.0, w) * i_wires


def field_profile(xs, w: WirePair = WirePair(), grid_n: int = 64) -> list[dict]:
    """Rows of thin-wire vs. quadrature field and gradient per ampere.

    The field columns use the antiparallel drive, the gradient columns the
    parallel drive, matching how each quantity is produced in the device.
    """
    anti = replace(w, polarity=Polarity.ANTIPARALLEL)
    par = replace(w, polarity=Polarity.PARALLEL)
    rows = []
    for x in np.atleast_1d(np.asarray(xs, dtype=float)):
        b = field_per_amp(x, anti)
        g = gradient_per_amp(x, par)
        ob = biot_savart_square_wire(x, anti, grid_n).field
        og = biot_savart_square_wire(x, par, grid_n).gradient
        rows.append({
            "x_m": float(x),
            "B_per_A": b,
            "G_per_A": g,
            "B_oracle": ob,
            "G_oracle": og,
            "rel_err": max(abs(ob - b) / b, abs(og - g) / g),
        })
    return rows
