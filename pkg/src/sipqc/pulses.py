"""Pulse sequences on diagonal drift Hamiltonians.

Element order in a :class:`Sequence` is time order; :func:`compile_sequence`
multiplies right-to-left so the first element acts first.

Ideal pulses are instantaneous rotations inside the selected two-level
eigen-subspaces.  Finite pulses are simulated in the frame rotating at the
carrier for every spin of the driven kind (rotating-wave approximation), and
that rotating-frame propagator is what enters the sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .hamiltonians import TransitionKind, Transition, donor_register, transitions
from .spin import (
    SpinRegister,
    SpinSite,
    SpinKind,
    embed,
    propagator,
    spin_half_ops,
    sz_diagonal,
)

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class TransitionSelector:
    """Which drift transitions a pulse addresses.

    ``site`` is a label, a tuple of labels, or None for every site of
    ``flip_kind``.  ``window`` (Hz) is matched against the absolute
    transition frequency; None accepts every line.
    """

    flip_kind: TransitionKind
    site: str | tuple[str, ...] | None = None
    window: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "flip_kind", TransitionKind(self.flip_kind))
        if isinstance(self.site, list):
            object.__setattr__(self, "site", tuple(self.site))
        if self.window is not None:
            lo, hi = self.window
            if hi < lo:
                raise ValueError(f"empty frequency window {self.window}")
            object.__setattr__(self, "window", (float(lo), float(hi)))

    def site_labels(self) -> tuple[str, ...] | None:
        if self.site is None:
            return None
        return (self.site,) if isinstance(self.site, str) else tuple(self.site)


@dataclass(frozen=True)
class Ideal:
    pass


@dataclass(frozen=True)
class Finite:
    omega1: float  # Hz
    duration: float  # s
    carrier: float | None = None  # signed Hz; None -> mean of selected lines

    @classmethod
    def for_angle(cls, omega1: float, angle: float, carrier: float | None = None) -> "Finite":
        if omega1 <= 0:
            raise ValueError("omega1 must be positive")
        return cls(omega1, angle / (TWO_PI * omega1), carrier)


PulseModel = Union[Ideal, Finite]


@dataclass(frozen=True)
class Pulse:
    selector: TransitionSelector
    angle: float
    phase: float = 0.0
    model: PulseModel = Ideal()

    def __post_init__(self):
        if not 0 < self.angle <= TWO_PI + 1e-12:
            raise ValueError(f"pulse angle {self.angle} outside (0, 2pi]")
        m = self.model
        if isinstance(m, Finite):
            if m.omega1 <= 0:
                raise ValueError("omega1 must be positive")
            if m.duration < 0:
                raise ValueError("pulse duration must be non-negative")
            # a zero-length pulse is the degenerate null pulse
            target = self.angle / TWO_PI
            if m.duration > 0 and abs(m.omega1 * m.duration - target) > 0.01 * target:
                raise ValueError(
                    f"omega1*duration = {m.omega1 * m.duration:.6g} inconsistent with angle/2pi = {target:.6g}"
                )

    @property
    def duration(self) -> float:
        return self.model.duration if isinstance(self.model, Finite) else 0.0


@dataclass(frozen=True)
class Delay:
    t: float  # s

    def __post_init__(self):
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise ValueError(f"delay must be finite and non-negative, got {self.t}")

    @property
    def duration(self) -> float:
        return self.t


@dataclass(frozen=True)
class Echo:
    """Zero-length marker at which :func:`evolve` records the state."""

    duration = 0.0


Element = Union[Pulse, Delay, Echo]


@dataclass(frozen=True, eq=False)
class Sequence:
    elements: tuple[Element, ...]
    drift: np.ndarray
    register: SpinRegister
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        drift = np.asarray(self.drift, dtype=complex)
        if drift.shape != (self.register.dim, self.register.dim):
            raise ValueError(f"drift shape {drift.shape} does not match register dim {self.register.dim}")
        object.__setattr__(self, "drift", drift)

    @property
    def duration(self) -> float:
        return float(sum(e.duration for e in self.elements))

    def echo_times(self) -> list[float]:
        t, out = 0.0, []
        for e in self.elements:
            t += e.duration
            if isinstance(e, Echo):
                out.append(t)
        return out


# ---------------------------------------------------------------------------
# selection


def resolve(selector: TransitionSelector, drift: np.ndarray, register: SpinRegister) -> list[Transition]:
    labels = selector.site_labels()
    sites = None if labels is None else {register.index(s) for s in labels}
    lines = []
    for t in transitions(drift, register):
        if t.kind is not selector.flip_kind:
            continue
        if sites is not None and t.site not in sites:
            continue
        if selector.window is not None and not selector.window[0] <= t.frequency <= selector.window[1]:
            continue
        lines.append(t)
    if not lines:
        raise ValueError(f"selector {selector} matches no transition of the drift")
    return lines


def _site_rotation(register: SpinRegister, lines: list[Transition], angle: float, phase: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    # exp(-i angle (cos phi sx + sin phi sy) / 2) in the (up, down) pair basis
    r = np.array([[c, -1j * s * np.exp(-1j * phase)], [-1j * s * np.exp(1j * phase), c]])
    u = np.eye(register.dim, dtype=complex)
    for t in lines:
        i, j = t.levels
        u[np.ix_([i, j], [i, j])] = r
    return u


def ideal_pulse_unitary(drift: np.ndarray, pulse: Pulse, register: SpinRegister) -> np.ndarray:
    """Instantaneous rotation within every selected two-level eigen-subspace."""
    lines = resolve(pulse.selector, drift, register)
    by_site: dict[int, list[Transition]] = {}
    for t in lines:
        by_site.setdefault(t.site, []).append(t)
    flipped = set(by_site)
    if len(flipped) > 1:
        # simultaneous rotations are well defined only if no site's selection
        # is conditioned on another flipped site
        for k, ts in by_site.items():
            conds = {t.levels[0] for t in ts}
            for j in flipped - {k}:
                mask = 1 << (register.n - 1 - j)
                if any((lvl ^ mask) not in conds for lvl in conds):
                    raise ValueError(
                        f"selected transitions overlap: site {register.labels[k]} selection depends "
                        f"on simultaneously flipped site {register.labels[j]}"
                    )
    u = np.eye(register.dim, dtype=complex)
    for k in sorted(by_site):
        u = _site_rotation(register, by_site[k], pulse.angle, pulse.phase) @ u
    return u


def driven_sites(register: SpinRegister, kind: TransitionKind) -> list[int]:
    want_electron = kind is TransitionKind.ESR
    return [k for k, s in enumerate(register.sites) if s.is_electron == want_electron]


def finite_pulse_unitary(drift: np.ndarray, pulse: Pulse, register: SpinRegister) -> np.ndarray:
    """Rotating-frame propagator of a rectangular pulse of finite amplitude.

    Every site of the selector's kind is driven (MW drives electrons, RF
    nuclei); frequency selectivity comes only from the carrier detunings.
    """
    m = pulse.model
    if not isinstance(m, Finite):
        raise TypeError("finite_pulse_unitary needs a Finite pulse model")
    if m.omega1 <= 0:
        raise ValueError("omega1 must be positive")
    if m.duration == 0:
        return np.eye(register.dim, dtype=complex)
    carrier = m.carrier
    if carrier is None:
        carrier = float(np.mean([t.signed_frequency for t in resolve(pulse.selector, drift, register)]))
    sx, sy, _ = spin_half_ops()
    drive = math.cos(pulse.phase) * sx + math.sin(pulse.phase) * sy
    h = np.array(drift, dtype=complex)
    for k in driven_sites(register, pulse.selector.flip_kind):
        h -= np.diag(carrier * sz_diagonal(register, k))
        h += m.omega1 * embed(drive, k, register)
    return propagator(h, m.duration)


def element_unitary(seq: Sequence, element: Element) -> np.ndarray:
    if isinstance(element, Delay):
        return propagator(seq.drift, element.t)
    if isinstance(element, Echo):
        return np.eye(seq.register.dim, dtype=complex)
    if isinstance(element.model, Finite):
        return finite_pulse_unitary(seq.drift, element, seq.register)
    return ideal_pulse_unitary(seq.drift, element, seq.register)


def compile_sequence(seq: Sequence) -> np.ndarray:
    u = np.eye(seq.register.dim, dtype=complex)
    for e in seq.elements:
        u = element_unitary(seq, e) @ u
    return u


def evolve(seq: Sequence, psi0: np.ndarray) -> tuple[np.ndarray, list[tuple[float, np.ndarray]]]:
    """Propagate a state through ``seq``; returns the final state and (time, state) at each Echo."""
    psi = np.asarray(psi0, dtype=complex)
    t = 0.0
    echoes = []
    for e in seq.elements:
        psi = element_unitary(seq, e) @ psi
        t += e.duration
        if isinstance(e, Echo):
            echoes.append((t, psi.copy()))
    return psi, echoes


def inverse_sequence(seq: Sequence) -> Sequence:
    """Element-wise inverse (reversed order, each pulse phase-shifted by pi).

    Only ideal pulses and echo markers are invertible; free evolution cannot
    run backwards.
    """
    out = []
    for e in reversed(seq.elements):
        if isinstance(e, Echo):
            out.append(e)
        elif isinstance(e, Pulse) and isinstance(e.model, Ideal):
            out.append(Pulse(e.selector, e.angle, e.phase + math.pi, e.model))
        else:
            raise ValueError(f"element {e} has no positive-time inverse")
    return Sequence(tuple(out), seq.drift, seq.register, dict(seq.metadata))


# ---------------------------------------------------------------------------
# gate constructions


@dataclass(frozen=True)
class DriveStrengths:
    """Nutation frequencies used when sequences are built with finite pulses."""

    mw_omega1: float = 25e6  # Hz, electrons
    rf_omega1: float = 0.5e6  # Hz, nuclei

    def model(self, kind: TransitionKind, angle: float, carrier: float | None = None) -> Finite:
        w = self.mw_omega1 if kind is TransitionKind.ESR else self.rf_omega1
        return Finite.for_angle(w, angle, carrier)


def _pulse(selector: TransitionSelector, angle: float, phase: float, drive: DriveStrengths | None,
           carrier: float | None = None) -> Pulse:
    model = Ideal() if drive is None else drive.model(selector.flip_kind, angle, carrier)
    return Pulse(selector, angle, phase, model)


def _partner_nucleus(register: SpinRegister, electron: int) -> int:
    pos = register.sites[electron].position
    nuclei = [k for k, s in enumerate(register.sites) if not s.is_electron]
    if not nuclei:
        raise ValueError("register has no nuclear site")
    return min(nuclei, key=lambda k: np.linalg.norm(np.subtract(register.sites[k].position, pos)))


def _reference_line(lines: list[Transition], register: SpinRegister, site: int, cond_site: int,
                    cond_bit: int) -> tuple[Transition, Transition]:
    """Line of ``site`` with ``cond_site`` in ``cond_bit`` (all other spins up) and its hyperfine partner."""

    def pick(bit):
        for t in lines:
            if t.site != site:
                continue
            up = t.levels[0]
            others = [register.bit(up, j) for j in range(register.n) if j not in (site, cond_site)]
            if register.bit(up, cond_site) == bit and not any(others):
                return t
        raise ValueError(f"no resolvable transition for site {register.labels[site]}")

    return pick(cond_bit), pick(1 - cond_bit)


SWAP_PHASES = (0.0, math.pi, 0.0)


def swap_en_sequence(
    drift: np.ndarray,
    register: SpinRegister | None = None,
    selective: bool = True,
    electron: str | int | None = None,
    drive: DriveStrengths | None = None,
) -> Sequence:
    """Three conditional pi pulses exchanging a donor's nuclear and electron qubits.

    Pulse 1 flips the electron when its nucleus is down, pulse 2 flips the
    nucleus when the electron is down, pulse 3 repeats pulse 1.  Phases
    (0, pi, 0) make the transfer n -> e (electron starting up) and e -> n
    (nucleus starting up) exact; the full gate is SWAP times a controlled-Z.
    With ``selective=False`` every donor whose lines fall in the same windows
    is swapped at once.
    """
    if register is None:
        register = donor_register()
    lines = transitions(drift, register)
    e = register.index(electron) if electron is not None else next(
        k for k, s in enumerate(register.sites) if s.is_electron)
    if not register.sites[e].is_electron:
        raise ValueError(f"site {register.labels[e]} is not an electron")
    n = _partner_nucleus(register, e)

    esr, esr_other = _reference_line(lines, register, e, n, 1)
    nmr, nmr_other = _reference_line(lines, register, n, e, 1)

    def window(line, other):
        half = abs(line.frequency - other.frequency) / 4
        if half == 0:
            raise ValueError(f"transitions of {line.label} are not resolvable (degenerate hyperfine lines)")
        return (line.frequency - half, line.frequency + half)

    e_site = register.labels[e] if selective else None
    n_site = register.labels[n] if selective else None
    sel_e = TransitionSelector(TransitionKind.ESR, e_site, window(esr, esr_other))
    sel_n = TransitionSelector(TransitionKind.NMR, n_site, window(nmr, nmr_other))
    p1, p2, p3 = SWAP_PHASES
    elements = (
        _pulse(sel_e, math.pi, p1, drive, esr.signed_frequency if drive else None),
        _pulse(sel_n, math.pi, p2, drive, nmr.signed_frequency if drive else None),
        _pulse(sel_e, math.pi, p3, drive, esr.signed_frequency if drive else None),
    )
    meta = {
        "gate": "swap",
        "electron": register.labels[e],
        "nucleus": register.labels[n],
        "selective": selective,
        "assignment": [
            {"pulse": 1, "kind": "ESR", "flips": register.labels[e], "condition": f"{register.labels[n]}=down",
             "frequency_Hz": esr.frequency, "phase_rad": p1},
            {"pulse": 2, "kind": "NMR", "flips": register.labels[n], "condition": f"{register.labels[e]}=down",
             "frequency_Hz": nmr.frequency, "phase_rad": p2},
            {"pulse": 3, "kind": "ESR", "flips": register.labels[e], "condition": f"{register.labels[n]}=down",
             "frequency_Hz": esr.frequency, "phase_rad": p3},
        ],
    }
    return Sequence(elements, drift, register, meta)


def hard_pulse_interval(A: float) -> float:
    """Interpulse delay pi/(2A) of the hard-pulse swap, A read as a cyclic frequency in Hz."""
    return math.pi / (2 * A)


def cnot_ee_sequence(
    drift: np.ndarray,
    register: SpinRegister,
    D: float,
    control: str,
    target: str,
    drive: DriveStrengths | None = None,
) -> Sequence:
    """c-NOT between two Sz-Sz coupled electrons.

    target (pi/2)_y, free evolution tau/2, pi on both, tau/2, pi on both,
    target (pi/2)_x with tau = 1/(2D).  The refocusing pair cancels Zeeman
    offsets, hyperfine shifts and couplings to static neighbours; the result
    equals CNOT up to z rotations on each qubit.
    """
    if D == 0:
        raise ValueError("D = 0: the c-NOT gate time diverges")
    for lab in (control, target):
        if not register.sites[register.index(lab)].is_electron:
            raise ValueError(f"site {lab} is not an electron")
    tau = 1 / (2 * abs(D))
    tgt = TransitionSelector(TransitionKind.ESR, target)
    both = TransitionSelector(TransitionKind.ESR, (control, target))
    elements = (
        _pulse(tgt, math.pi / 2, math.pi / 2, drive),
        Delay(tau / 2),
        _pulse(both, math.pi, 0.0, drive),
        Delay(tau / 2),
        _pulse(both, math.pi, 0.0, drive),
        _pulse(tgt, math.pi / 2, 0.0, drive),
    )
    meta = {"gate": "cnot", "control": control, "target": target, "D_Hz": D, "tau_s": tau}
    return Sequence(elements, drift, register, meta)


def cpmg_sequence(
    drift: np.ndarray,
    register: SpinRegister,
    n_echoes: int,
    tau_echo: float,
    drive: DriveStrengths | None = None,
) -> Sequence:
    """(pi/2)_x then n x [tau/2, (pi)_y, tau/2, echo] on every electron."""
    if n_echoes < 1:
        raise ValueError("n_echoes must be >= 1")
    if tau_echo <= 0:
        raise ValueError("tau_echo must be positive")
    allx = TransitionSelector(TransitionKind.ESR)
    elements: list[Element] = [_pulse(allx, math.pi / 2, 0.0, drive)]
    for _ in range(n_echoes):
        elements += [Delay(tau_echo / 2), _pulse(allx, math.pi, math.pi / 2, drive), Delay(tau_echo / 2), Echo()]
    seq = Sequence(tuple(elements), drift, register, {"gate": "cpmg", "n_echoes": n_echoes, "tau_echo_s": tau_echo})
    seq.metadata["echo_times_s"] = seq.echo_times()
    return seq


# ---------------------------------------------------------------------------
# state-transfer analysis


def transfer_phases(u: np.ndarray, register: SpinRegister, src: int | str, dst: int | str) -> np.ndarray:
    """Phases acquired by |src=b, dst=up> -> |src=up, dst=b>, b = 0, 1 (all other spins up)."""
    s, d = register.index(src), register.index(dst)
    ms, md = 1 << (register.n - 1 - s), 1 << (register.n - 1 - d)
    amps = np.array([u[0, 0], u[md, ms]])
    return np.angle(amps)


def transfer_fidelity(
    u: np.ndarray,
    register: SpinRegister,
    qubit: np.ndarray,
    src: int | str,
    dst: int | str,
    compensate: bool = True,
) -> float:
    """Fidelity of moving a single-qubit state from ``src`` to ``dst`` (other spins up).

    With ``compensate`` the fixed relative phase between the two transferred
    basis states is removed from the output before comparing.
    """
    s, d = register.index(src), register.index(dst)
    qubit = np.asarray(qubit, dtype=complex)
    qubit = qubit / np.linalg.norm(qubit)
    ms = 1 << (register.n - 1 - s)
    psi = np.zeros(register.dim, dtype=complex)
    psi[0], psi[ms] = qubit
    out = u @ psi
    t = out.reshape([2] * register.n)
    t = np.moveaxis(t, d, 0).reshape(2, -1)
    rho = t @ t.conj().T
    if compensate:
        ph = transfer_phases(u, register, src, dst)
        z = np.diag(np.exp(-1j * (ph - ph[0])))
        rho = z @ rho @ z.conj().T
    return float(np.real(qubit.conj() @ rho @ qubit))


# ---------------------------------------------------------------------------
# JSON


def _selector_json(s: TransitionSelector) -> dict:
    site = list(s.site) if isinstance(s.site, tuple) else s.site
    return {"flip_kind": s.flip_kind.value, "site": site,
            "window_Hz": None if s.window is None else list(s.window)}


def element_to_json(e: Element) -> dict:
    if isinstance(e, Delay):
        return {"type": "delay", "t_s": e.t}
    if isinstance(e, Echo):
        return {"type": "echo"}
    if isinstance(e.model, Finite):
        model = {"type": "finite", "omega1_Hz": e.model.omega1, "duration_s": e.model.duration,
                 "carrier_Hz": e.model.carrier}
    else:
        model = {"type": "ideal"}
    return {"type": "pulse", "selector": _selector_json(e.selector), "angle_rad": e.angle,
            "phase_rad": e.phase, "model": model}


def element_from_json(d: dict) -> Element:
    kind = d["type"]
    if kind == "delay":
        return Delay(float(d["t_s"]))
    if kind == "echo":
        return Echo()
    if kind != "pulse":
        raise ValueError(f"unknown element type {kind!r}")
    s = d["selector"]
    site = s.get("site")
    sel = TransitionSelector(TransitionKind(s["flip_kind"]), tuple(site) if isinstance(site, list) else site,
                             None if s.get("window_Hz") is None else tuple(s["window_Hz"]))
    m = d["model"]
    if m["type"] == "finite":
        model: PulseModel = Finite(float(m["omega1_Hz"]), float(m["duration_s"]), m.get("carrier_Hz"))
    elif m["type"] == "ideal":
        model = Ideal()
    else:
        raise ValueError(f"unknown pulse model {m['type']!r}")
    return Pulse(sel, float(d["angle_rad"]), float(d["phase_rad"]), model)


def register_to_json(reg: SpinRegister) -> list[dict]:
    return [{"kind": s.kind.value, "label": s.label, "position_nm": list(s.position)} for s in reg.sites]


def register_from_json(items: Iterable[dict]) -> SpinRegister:
    return SpinRegister(tuple(SpinSite(SpinKind(i["kind"]), i["label"], tuple(i["position_nm"])) for i in items))


def sequence_to_json(seq: Sequence) -> dict:
    return {
        "register": register_to_json(seq.register),
        "elements": [element_to_json(e) for e in seq.elements],
        "metadata": seq.metadata,
    }


def sequence_from_json(data: dict, drift: np.ndarray) -> Sequence:
    reg = register_from_json(data["register"])
    return Sequence(tuple(element_from_json(e) for e in data["elements"]), drift, reg, dict(data.get("metadata", {})))
