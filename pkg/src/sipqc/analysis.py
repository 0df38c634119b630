"""Gate verification reports shared by the CLI and the numeric check table."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .constants import DEFAULT_CONSTANTS, PhysicalConstants, ee_dipolar
from .hamiltonians import (
    ChainParams,
    SingleSiteParams,
    TwoSiteParams,
    chain_register,
    donor_register,
    h_chain,
    h_single,
    h_two_site,
    two_site_register,
)
from .pulses import (
    DriveStrengths,
    Sequence,
    cnot_ee_sequence,
    compile_sequence,
    cpmg_sequence,
    element_to_json,
    evolve,
    swap_en_sequence,
    transfer_fidelity,
)
from .spin import (
    SpinKind,
    SpinRegister,
    SpinSite,
    basis_state,
    fidelity_up_to_local_z,
    is_unitary,
    reduced_density,
    restrict,
    sz_diagonal,
)

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

SPECTATOR_DISTANCE_NM = 100.0


def random_qubits(n: int, rng: np.random.Generator) -> np.ndarray:
    q = rng.standard_normal((n, 2)) + 1j * rng.standard_normal((n, 2))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def _step_metadata(seq: Sequence) -> list[dict]:
    return [element_to_json(e) for e in seq.elements]


def swap_report(
    B0: float = 3.3,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    drive: DriveStrengths | None = None,
    n_states: int = 20,
    seed: int = 0,
) -> dict:
    """Transfer fidelities of the three-pulse swap in both directions and after two applications."""
    reg = donor_register()
    drift = h_single(SingleSiteParams(B0, constants))
    seq = swap_en_sequence(drift, reg, drive=drive)
    u = compile_sequence(seq)
    states = np.vstack([[0.6, 0.8j], [1, 0], [0, 1], random_qubits(n_states, np.random.default_rng([seed, 3]))])
    fwd = [transfer_fidelity(u, reg, q, "n", "e") for q in states]
    back = [transfer_fidelity(u, reg, q, "e", "n") for q in states]
    twice = [transfer_fidelity(u @ u, reg, q, "n", "n") for q in states]
    return {
        "gate": "swap",
        "model": "ideal" if drive is None else "finite",
        "fidelity": min(fwd),
        "fidelity_reverse": min(back),
        "fidelity_double": min(twice),
        "n_states": len(states),
        "duration_s": seq.duration,
        "unitary": is_unitary(u),
        "metadata": seq.metadata,
        "steps": _step_metadata(seq),
    }


def cnot_register_with_spectator(spacing_nm: float, spectator_nm: float = SPECTATOR_DISTANCE_NM) -> SpinRegister:
    a, b = -spacing_nm / 2, spacing_nm / 2
    return SpinRegister((
        SpinSite(SpinKind.ELECTRON, "eA", (a, 0.0, 0.0)),
        SpinSite(SpinKind.ELECTRON, "eB", (b, 0.0, 0.0)),
        SpinSite(SpinKind.ELECTRON, "eC", (b + spectator_nm, 0.0, 0.0)),
    ))


def h_spectator(B0: float, gradient: float, spacing: float, D: float, D_spectator: float,
                constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Three electrons (nuclei frozen up): the c-NOT pair plus a spectator coupled to eB only."""
    reg = cnot_register_with_spectator(spacing * 1e9)
    xs = [s.position[0] * 1e-9 for s in reg.sites]
    sz = [sz_diagonal(reg, k) for k in range(3)]
    diag = sum((constants.gamma_e * (B0 + gradient * x) + constants.A_hyperfine / 2) * s for x, s in zip(xs, sz))
    diag = diag + D * sz[0] * sz[1] + D_spectator * sz[1] * sz[2]
    return np.diag(diag).astype(complex)


def cnot_report(
    B0: float = 3.3,
    gradient: float = 2000.0,
    spacing: float = 5e-9,
    D: float = 100e3,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    drive: DriveStrengths | None = None,
) -> dict:
    """Local-z fidelity to CNOT for every frozen nuclear configuration and with a spectator electron."""
    reg = two_site_register(spacing * 1e9)
    drift = h_two_site(TwoSiteParams.from_gradient(B0, gradient, spacing, D, constants))
    seq = cnot_ee_sequence(drift, reg, D, "eA", "eB", drive)
    u = compile_sequence(seq)
    per_config = {}
    for bits in itertools.product((0, 1), repeat=2):
        v = restrict(u, reg, {"nA": bits[0], "nB": bits[1]})
        per_config["".join("ud"[b] for b in bits)] = fidelity_up_to_local_z(v, CNOT)

    reg3 = cnot_register_with_spectator(spacing * 1e9)
    d_spec = ee_dipolar(SPECTATOR_DISTANCE_NM)
    fids = {}
    blocks = {}
    for label, dd in (("without", 0.0), ("with", d_spec)):
        drift3 = h_spectator(B0, gradient, spacing, D, dd, constants)
        u3 = compile_sequence(cnot_ee_sequence(drift3, reg3, D, "eA", "eB", drive))
        blocks[label] = restrict(u3, reg3, {"eC": 1})  # spectator in its ground state
        fids[label] = fidelity_up_to_local_z(blocks[label], CNOT)
    return {
        "gate": "cnot",
        "model": "ideal" if drive is None else "finite",
        "fidelity": min(per_config.values()),
        "fidelity_by_nuclear_config": per_config,
        "spectator_coupling_Hz": d_spec,
        "spectator_fidelity_change": abs(fids["with"] - fids["without"]),
        "spectator_block_fidelity": fidelity_up_to_local_z(blocks["with"], blocks["without"]),
        "duration_s": seq.duration,
        "unitary": is_unitary(u),
        "metadata": seq.metadata,
        "steps": _step_metadata(seq),
    }


def transverse(psi: np.ndarray, reg: SpinRegister, site: int) -> complex:
    """<S+> scaled so a fully transverse spin has modulus 1."""
    rho = reduced_density(psi, reg, [site])
    return complex(2 * rho[1, 0])


def _phase_spread(rows: list[dict], n_echoes: int) -> float:
    # largest wrapped phase difference from the first site, over echoes
    spread = 0.0
    for k in range(1, n_echoes + 1):
        ph = np.array([r["phase_rad"] for r in rows if r["echo"] == k])
        d = np.angle(np.exp(1j * (ph - ph[0])))
        spread = max(spread, float(np.abs(d).max()))
    return spread


def cpmg_report(
    B0: float = 3.3,
    gradient: float = 2000.0,
    spacing: float = 5e-9,
    n_sites: int = 2,
    n_echoes: int = 4,
    tau_echo: float = 2e-6,
    include_neighbors: bool = False,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    drive: DriveStrengths | None = None,
) -> dict:
    """Echo-centre transverse amplitude and phase of each electron of a chain."""
    p = ChainParams(n_sites, spacing, B0, gradient, include_neighbors, electrons_only=True)
    reg = chain_register(p)
    drift = h_chain(p, constants)
    seq = cpmg_sequence(drift, reg, n_echoes, tau_echo, drive)
    psi0 = basis_state(reg, [0] * reg.n)
    _, echoes = evolve(seq, psi0)
    rows = []
    for k, (t, psi) in enumerate(echoes):
        for site in range(reg.n):
            m = transverse(psi, reg, site)
            rows.append({"echo": k + 1, "t_s": t, "site": reg.labels[site],
                         "amplitude": abs(m), "phase_rad": math.atan2(m.imag, m.real)})
    offsets = (p.fields() - B0) * constants.gamma_e
    return {
        "gate": "cpmg",
        "model": "ideal" if drive is None else "finite",
        "offsets_Hz": offsets.tolist(),
        "echoes": rows,
        "min_amplitude": min(r["amplitude"] for r in rows),
        "max_phase_spread_rad": _phase_spread(rows, n_echoes),
        "duration_s": seq.duration,
        "metadata": seq.metadata,
        "steps": _step_metadata(seq),
    }


__all__ = [
    "CNOT",
    "cnot_report",
    "cpmg_report",
    "h_spectator",
    "random_qubits",
    "swap_report",
    "transverse",
]
