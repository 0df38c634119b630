"""Regression table of every published design number the package reproduces.

Each row compares a computed value with its published target under a
stated tolerance.  Rows are grouped by item number; each group also checks
its own wall-clock budget.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .analysis import cnot_report, swap_report
from .budget import (
    ThermalParams,
    architecture_size,
    brown_tm,
    build_budget,
    t1_spin_lattice,
    t2_si29,
    t_flipflop,
    thermal_alpha,
)
from .constants import DEFAULT_CONSTANTS, PhysicalConstants, ee_dipolar
from .fields import (
    Polarity,
    PulseSchedule,
    ResonatorModel,
    WirePair,
    biot_savart_square_wire,
    current_for_gradient,
    duty_cycle_power,
    field_per_amp,
    gradient_per_amp,
    joule_power,
    prepolarization_field,
    wire_resistance,
)
from .hamiltonians import ChainParams, SingleSiteParams, TransitionKind, donor_register, h_single, transitions
from .pulses import hard_pulse_interval
from .readout import (
    ReadoutConfig,
    ber_monte_carlo,
    reconstruct,
    snr_averaging_time,
    snr_scaling_slope,
    synthesize,
    with_bin_snr,
)


@dataclass(frozen=True)
class Check:
    item: int
    name: str
    value: float
    target: float
    rule: str
    passed: bool


def _rel(item, name, value, target, tol) -> Check:
    ok = abs(value - target) <= tol * abs(target)
    return Check(item, name, float(value), float(target), f"within {tol:g} relative", bool(ok))


def _at_least(item, name, value, bound) -> Check:
    return Check(item, name, float(value), float(bound), f">= {bound:.12g}", bool(value >= bound))


def _at_most(item, name, value, bound) -> Check:
    return Check(item, name, float(value), float(bound), f"<= {bound:.12g}", bool(value <= bound))


def _equal(item, name, value, target) -> Check:
    return Check(item, name, float(value), float(target), "exact", bool(value == target))


def _between(item, name, value, lo, hi, target) -> Check:
    return Check(item, name, float(value), float(target), f"in [{lo:g}, {hi:g}]", bool(lo <= value <= hi))


def _factor(item, name, value, target, factor) -> Check:
    ok = target / factor <= value <= target * factor
    return Check(item, name, float(value), float(target), f"within factor {factor:g}", bool(ok))


# ---------------------------------------------------------------------------
# items


def _spectra(c: PhysicalConstants) -> list[Check]:
    lines = transitions(h_single(SingleSiteParams(3.3, c)), donor_register())
    esr = sorted(t.frequency for t in lines if t.kind is TransitionKind.ESR)
    nmr = sorted(t.frequency for t in lines if t.kind is TransitionKind.NMR)
    return [
        _rel(1, "ESR line splitting (Hz)", esr[1] - esr[0], 117.4e6, 1e-9),
        _rel(1, "ESR centre at 3.3 T (Hz)", np.mean(esr), 93e9, 0.01),
        _rel(1, "NMR lower line (Hz)", nmr[0], 1.82e6, 0.02),
        _rel(1, "NMR upper line (Hz)", nmr[1], 115.5e6, 0.02),
    ]


def _hyperfine_field(c: PhysicalConstants) -> list[Check]:
    return [_rel(2, "hyperfine splitting in field units (G)", c.hyperfine_field * 1e4, 41.9, 0.02)]


def _swap(c: PhysicalConstants) -> list[Check]:
    r = swap_report(3.3, c, n_states=20, seed=0)
    return [
        _at_least(3, "swap transfer fidelity n -> e (min over states)", r["fidelity"], 1 - 1e-9),
        _at_least(3, "swap applied twice returns the state", r["fidelity_double"], 1 - 1e-9),
    ]


def _cnot(c: PhysicalConstants) -> list[Check]:
    r = cnot_report(3.3, 2000.0, 5e-9, 100e3, c)
    return [
        _at_least(4, "c-NOT local-z fidelity (min over nuclear configs)", r["fidelity"], 1 - 1e-6),
        _rel(4, "c-NOT duration at D = 100 kHz (s)", r["duration_s"], 5e-6, 0.10),
        _at_most(4, "spectator electron at 100 nm: fidelity change", r["spectator_fidelity_change"], 1e-6),
    ]


def _timing(c: PhysicalConstants) -> list[Check]:
    return [_rel(5, "hard-pulse interval pi/(2A) (s)", hard_pulse_interval(c.A_hyperfine), 13.5e-9, 0.02)]


def _fields(_: PhysicalConstants) -> list[Check]:
    par = WirePair()
    anti = WirePair(polarity=Polarity.ANTIPARALLEL)
    g0, b0 = gradient_per_amp(0.0, par), field_per_amp(0.0, anti)
    og, ob = biot_savart_square_wire(0.0, par).gradient, biot_savart_square_wire(0.0, anti).field
    thin_par, thin_anti = WirePair(a=1e-9), WirePair(a=1e-9, polarity=Polarity.ANTIPARALLEL)
    tg = biot_savart_square_wire(0.0, thin_par).gradient
    tb = biot_savart_square_wire(0.0, thin_anti).field
    return [
        _rel(6, "gradient per amp at centre (T/(m A))", g0, 1.8e5, 0.02),
        _rel(6, "field per amp at centre (T/A)", b0, 0.27, 0.02),
        _rel(6, "quadrature vs thin-wire gradient at defaults", og, g0, 0.10),
        _rel(6, "quadrature vs thin-wire field at defaults", ob, b0, 0.10),
        _rel(6, "quadrature vs thin-wire gradient, a = 1 nm", tg, gradient_per_amp(0.0, thin_par), 1e-3),
        _rel(6, "quadrature vs thin-wire field, a = 1 nm", tb, field_per_amp(0.0, thin_anti), 1e-3),
    ]


def _currents(_: PhysicalConstants) -> list[Check]:
    w = WirePair()
    return [
        _rel(7, "current for 1000 T/m (A)", current_for_gradient(1e3, w), 5.5e-3, 0.05),
        _rel(7, "current for 1e6 T/m (A)", current_for_gradient(1e6, w), 5.5, 0.05),
        _rel(7, "wire resistance (ohm)", wire_resistance(w), 0.6e-3, 0.15),
        _rel(7, "Joule power at 1 A (W)", joule_power(w, 1.0), 0.6e-3, 0.15),
        _factor(7, "duty-cycle average power (W)", duty_cycle_power(w, ResonatorModel(), PulseSchedule()), 1e-3, 2),
    ]


def _prepolarization(c: PhysicalConstants) -> list[Check]:
    total = prepolarization_field(ResonatorModel(), 25.0, WirePair(), 25.0)
    return [
        _between(8, "prepolarization field, 25 A + 25 A (T)", total, 11, 13, 12),
        _rel(8, "alpha at 3.3 T, 4.2 K", thermal_alpha(ThermalParams(3.3, 4.2, c.g_e), c), 0.34, 0.05),
        _rel(8, "alpha at 12 T, 4.2 K", thermal_alpha(ThermalParams(12.0, 4.2, c.g_e), c), 0.02, 0.15),
    ]


def _decoherence(c: PhysicalConstants) -> list[Check]:
    return [
        _rel(9, "29Si dipolar T2 at 2.5 nm (s)", t2_si29(2.5), 1e-3, 0.10),
        _rel(9, "flip-flop time at 100 nm (s)", t_flipflop(100.0), 20e-3, 0.10),
        _rel(9, "electron dipolar coupling at 5 nm (Hz)", ee_dipolar(5.0), 400e3, 0.10),
        _rel(9, "spectral-diffusion T_m at 0.08 % 29Si (s)", brown_tm(0.0008, c), 85e-3, 1e-12),
        _rel(9, "T1 at 4 K (s)", t1_spin_lattice(4.0), 10.0, 1e-12),
        _rel(9, "T1 at 10 K (s)", t1_spin_lattice(10.0), 1e-3, 1e-12),
    ]


def _architecture(_: PhysicalConstants) -> list[Check]:
    size = architecture_size()
    chain = ChainParams(2, 5e-9, 3.3, 2000.0)
    report = build_budget(chain, 6.0, 0.0008, True, gate_time=1e-6, t_store_nuclear=1.0)
    return [
        _equal(10, "qubits per row, geometric limit", size.n_geom, 400),
        _between(10, "qubits per row, spectral limit", size.n_spectral, 417, 419, 418),
        _equal(10, "row copies", size.m_copies, 100),
        _rel(10, "gate-count capacity (1 s / 1 us)", report.gate_count_capacity, 1e6, 1e-12),
    ]


def _readout(c: PhysicalConstants) -> list[Check]:
    cfg = ReadoutConfig(sensitivity=0.0, gamma_e=c.gamma_e)
    states = np.random.default_rng([0, 11]).choice([-1.0, 1.0], size=cfg.n_qubits)
    errors = int(np.count_nonzero(reconstruct(synthesize(states, cfg), cfg).decoded != states))
    small = ReadoutConfig(n_qubits=8, gamma_e=c.gamma_e)
    slope, _ = snr_scaling_slope(with_bin_snr(small, 1.0))
    ber = ber_monte_carlo(with_bin_snr(small, 6.0), 10_000)
    return [
        _equal(11, "noiseless round trip, bit errors in 400", errors, 0),
        _rel(11, "SNR vs averages log-log slope", slope, 0.5, 0.1),
        _rel(11, "averaging time, S = 1000 (s)", snr_averaging_time(1, 100, 1000)[0], 100.0, 1e-12),
        _rel(11, "averaging time, S = 1e4 (s)", snr_averaging_time(1, 100, 1e4)[0], 1e4, 1e-12),
        _at_most(11, "bit-error rate at per-bin SNR 6, 1e4 trials", ber.ber, 1e-3),
    ]


# item -> (builder, runtime budget in s)
ITEMS = {
    1: (_spectra, 1.0),
    2: (_hyperfine_field, 1.0),
    3: (_swap, 1.0),
    4: (_cnot, 10.0),
    5: (_timing, 1.0),
    6: (_fields, 5.0),
    7: (_currents, 1.0),
    8: (_prepolarization, 1.0),
    9: (_decoherence, 1.0),
    10: (_architecture, 1.0),
    11: (_readout, 60.0),
}


def run_checks(constants: PhysicalConstants = DEFAULT_CONSTANTS, items=None) -> list[Check]:
    rows = []
    for item in items or ITEMS:
        build, budget = ITEMS[item]
        t0 = time.perf_counter()
        rows += build(constants)
        elapsed = time.perf_counter() - t0
        rows.append(_at_most(item, f"item {item} runtime (s)", elapsed, budget))
    return rows


def summary(rows: list[Check]) -> dict:
    failed = [r for r in rows if not r.passed]
    return {"total": len(rows), "passed": len(rows) - len(failed), "failed": len(failed)}


def to_json(rows: list[Check]) -> dict:
    return {"checks": [asdict(r) for r in rows], "summary": summary(rows)}


def format_table(rows: list[Check]) -> str:
    head = f"{'item':>4}  {'check':<52} {'value':>16} {'target':>14}  {'rule':<22} status"
    out = [head, "-" * len(head)]
    for r in rows:
        out.append(f"{r.item:>4}  {r.name:<52} {r.value:>16.6g} {r.target:>14.6g}  {r.rule:<22} "
                   f"{'PASS' if r.passed else 'FAIL'}")
    s = summary(rows)
    out.append(f"{s['passed']}/{s['total']} checks passed")
    return "\n".join(out)


def perturbed(constants: PhysicalConstants = DEFAULT_CONSTANTS, **scales: float) -> PhysicalConstants:
    """Constants with named fields multiplied by the given factors (e.g. A_hyperfine=0.95)."""
    unknown = sorted(set(scales) - {f.name for f in fields(constants)})
    if unknown:
        raise ValueError(f"unknown constants {unknown}")
    return replace(constants, **{k: getattr(constants, k) * v for k, v in scales.items()})


__all__ = ["Check", "ITEMS", "format_table", "perturbed", "run_checks", "summary", "to_json"]
