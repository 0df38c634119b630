"""JSON device configuration with unit-suffixed keys, schema validation and run records.

Each section is a dataclass whose field names are the JSON keys, so the
effective configuration is just ``asdict``.  Domain objects (in SI units)
are built on demand by the ``*_params`` methods.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from jsonschema import Draft202012Validator

from . import __version__
from .budget import ArchitectureParams, ThermalParams
from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .fields import Polarity, PulseSchedule, ResonatorModel, WirePair
from .hamiltonians import ChainParams
from .pulses import DriveStrengths
from .readout import ReadoutConfig


class ConfigError(ValueError):
    """Configuration failed schema or semantic validation."""


@dataclass(frozen=True)
class ConstantsSection:
    g_e: float = DEFAULT_CONSTANTS.g_e
    mu_B_over_h_Hz_per_T: float = DEFAULT_CONSTANTS.mu_B_over_h
    gamma_n_31P_Hz_per_T: float = DEFAULT_CONSTANTS.gamma_n_31P
    A_hyperfine_Hz: float = DEFAULT_CONSTANTS.A_hyperfine


@dataclass(frozen=True)
class ChainSection:
    n_sites: int = 2
    spacing_nm: float = 5.0
    B0_T: float = 3.3
    gradient_T_per_m: float = 2000.0
    include_neighbors: bool = True
    electrons_only: bool = False


@dataclass(frozen=True)
class WiresSection:
    a_um: float = 1.0
    delta_um: float = 2.0
    length_um: float = 10.0
    conductivity_S_per_m: float = 1.5e10
    current_A: float = 1.0
    polarity: str = "parallel"


@dataclass(frozen=True)
class ResonatorSection:
    field_per_amp_T_per_A: float = 0.24
    loop_resistance_ohm: float | None = None


@dataclass(frozen=True)
class ScheduleSection:
    pulse_current_A: float = 25.0
    pulse_duration_s: float = 10e-6
    period_s: float = 10e-3


@dataclass(frozen=True)
class ThermalSection:
    B_T: float = 3.3
    T_K: float = 4.2
    prepolarization_B_T: float = 12.0


@dataclass(frozen=True)
class BudgetSection:
    T_K: float = 6.0
    fraction_si29: float = 0.0008
    gradient_on: bool = True
    gate_time_s: float = 1e-6
    t_store_nuclear_s: float = 1.0
    r_typical_si29_nm: float = 2.5
    resonator_inner_um: tuple[float, float] = (2.0, 10.0)
    spacing_sparse_nm: float = 100.0
    hyperfine_sep_G: float = 41.9
    domain_G: float = 0.1
    acceptable_power_W: float = 1e-3


@dataclass(frozen=True)
class GateSection:
    D_Hz: float = 100e3
    model: str = "ideal"
    mw_omega1_Hz: float = 25e6
    rf_omega1_Hz: float = 0.5e6
    threshold: float = 0.999999
    n_echoes: int = 4
    tau_echo_s: float = 2e-6
    n_random_states: int = 20


@dataclass(frozen=True)
class ReadoutSection:
    n_qubits: int = 400
    spacing_nm: float = 5.0
    gradient_T_per_m: float = 1000.0
    m_copies: int = 100
    t2_star_s: float = 20e-3
    sensitivity_spins_per_rtHz: float = 1000.0
    acquisition_time_s: float | None = None
    dwell_s: float | None = None
    n_averages: int = 1
    receiver_phase_rad: float = 0.0
    apodize: bool = False
    snr_target: float = 1.0
    states: str = "random"  # "random" | "ones" | explicit string of '+'/'-'


@dataclass(frozen=True)
class FieldsSection:
    x_min_um: float = -0.45
    x_max_um: float = 0.45
    samples: int = 19
    grid_n: int = 64


SECTIONS = {
    "constants": ConstantsSection,
    "chain": ChainSection,
    "wires": WiresSection,
    "resonator": ResonatorSection,
    "schedule": ScheduleSection,
    "thermal": ThermalSection,
    "budget": BudgetSection,
    "gate": GateSection,
    "readout": ReadoutSection,
    "fields": FieldsSection,
}


# ---------------------------------------------------------------------------
# schema

_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_NUM = {"type": "number"}
_BOOL = {"type": "boolean"}


def _int(minimum: int) -> dict:
    return {"type": "integer", "minimum": minimum}


def _opt(s: dict) -> dict:
    return {"anyOf": [s, {"type": "null"}]}


_SECTION_PROPS = {
    "constants": {
        "g_e": _POS, "mu_B_over_h_Hz_per_T": _POS, "gamma_n_31P_Hz_per_T": _POS, "A_hyperfine_Hz": _NONNEG,
    },
    "chain": {
        "n_sites": _int(1), "spacing_nm": _POS, "B0_T": _NONNEG, "gradient_T_per_m": _NUM,
        "include_neighbors": _BOOL, "electrons_only": _BOOL,
    },
    "wires": {
        "a_um": _POS, "delta_um": _POS, "length_um": _POS, "conductivity_S_per_m": _POS,
        "current_A": _NUM, "polarity": {"enum": [p.value for p in Polarity]},
    },
    "resonator": {"field_per_amp_T_per_A": _POS, "loop_resistance_ohm": _opt(_NONNEG)},
    "schedule": {"pulse_current_A": _NUM, "pulse_duration_s": _NONNEG, "period_s": _POS},
    "thermal": {"B_T": _POS, "T_K": _POS, "prepolarization_B_T": _POS},
    "budget": {
        "T_K": _POS, "fraction_si29": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "gradient_on": _BOOL, "gate_time_s": _POS, "t_store_nuclear_s": _POS, "r_typical_si29_nm": _POS,
        "resonator_inner_um": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
        "spacing_sparse_nm": _POS, "hyperfine_sep_G": _POS, "domain_G": _POS, "acceptable_power_W": _POS,
    },
    "gate": {
        "D_Hz": _NUM, "model": {"enum": ["ideal", "finite"]}, "mw_omega1_Hz": _POS, "rf_omega1_Hz": _POS,
        "threshold": {"type": "number", "minimum": 0, "maximum": 1}, "n_echoes": _int(0),
        "tau_echo_s": _POS, "n_random_states": _int(1),
    },
    "readout": {
        "n_qubits": _int(1), "spacing_nm": _POS, "gradient_T_per_m": _POS, "m_copies": _int(0),
        "t2_star_s": _POS, "sensitivity_spins_per_rtHz": _NONNEG, "acquisition_time_s": _opt(_POS),
        "dwell_s": _opt(_POS), "n_averages": _int(1), "receiver_phase_rad": _NUM, "apodize": _BOOL,
        "snr_target": _POS, "states": {"type": "string", "pattern": r"^(random|ones|[+-]+)$"},
    },
    "fields": {"x_min_um": _NUM, "x_max_um": _NUM, "samples": _int(1), "grid_n": _int(16)},
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        **{
            name: {"type": "object", "additionalProperties": False, "properties": props}
            for name, props in _SECTION_PROPS.items()
        },
    },
}

_VALIDATOR = Draft202012Validator(SCHEMA)


def _path(err) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def validate(data: dict) -> None:
    """Raise ConfigError listing every schema violation with its JSON path."""
    errors = sorted(_VALIDATOR.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise ConfigError("; ".join(f"{_path(e)}: {e.message}" for e in errors))


# ---------------------------------------------------------------------------
# DeviceConfig


@dataclass(frozen=True)
class DeviceConfig:
    constants: ConstantsSection = field(default_factory=ConstantsSection)
    chain: ChainSection = field(default_factory=ChainSection)
    wires: WiresSection = field(default_factory=WiresSection)
    resonator: ResonatorSection = field(default_factory=ResonatorSection)
    schedule: ScheduleSection = field(default_factory=ScheduleSection)
    thermal: ThermalSection = field(default_factory=ThermalSection)
    budget: BudgetSection = field(default_factory=BudgetSection)
    gate: GateSection = field(default_factory=GateSection)
    readout: ReadoutSection = field(default_factory=ReadoutSection)
    fields: FieldsSection = field(default_factory=FieldsSection)
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "DeviceConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>: configuration must be a JSON object")
        validate(data)
        kwargs = {}
        for name, section in SECTIONS.items():
            raw = dict(data.get(name, {}))
            if "resonator_inner_um" in raw:
                raw["resonator_inner_um"] = tuple(raw["resonator_inner_um"])
            kwargs[name] = section(**raw)
        cfg = cls(**kwargs, seed=data.get("seed", 0))
        cfg.check()
        return cfg

    def to_dict(self) -> dict:
        """Effective configuration with every key present."""
        d = {name: asdict(getattr(self, name)) for name in SECTIONS}
        d["budget"]["resonator_inner_um"] = list(d["budget"]["resonator_inner_um"])
        d["seed"] = self.seed
        return d

    def with_seed(self, seed: int) -> "DeviceConfig":
        return replace(self, seed=seed)

    def check(self) -> None:
        """Build every domain object so semantic errors surface as ConfigError."""
        builders = {
            "constants": self.physical_constants,
            "chain": self.chain_params,
            "wires": self.wire_pair,
            "resonator": self.resonator_model,
            "schedule": self.pulse_schedule,
            "thermal": self.thermal_params,
            "budget": self.architecture_params,
            "gate": self.drive_strengths,
            "readout": self.readout_config,
        }
        for name, build in builders.items():
            try:
                build()
            except ValueError as exc:
                raise ConfigError(f"{name}: {exc}") from exc
        st = self.readout.states
        if st not in ("random", "ones") and len(st) != self.readout.n_qubits:
            raise ConfigError(f"readout.states: {len(st)} explicit states for {self.readout.n_qubits} qubits")
        if self.fields.x_min_um > self.fields.x_max_um:
            raise ConfigError("fields: x_min_um must not exceed x_max_um")

    # domain objects -------------------------------------------------------

    def physical_constants(self) -> PhysicalConstants:
        c = self.constants
        return PhysicalConstants(c.g_e, c.mu_B_over_h_Hz_per_T, c.gamma_n_31P_Hz_per_T, c.A_hyperfine_Hz)

    def chain_params(self) -> ChainParams:
        c = self.chain
        return ChainParams(c.n_sites, c.spacing_nm * 1e-9, c.B0_T, c.gradient_T_per_m,
                           c.include_neighbors, c.electrons_only)

    def wire_pair(self) -> WirePair:
        w = self.wires
        return WirePair(w.a_um * 1e-6, w.delta_um * 1e-6, w.length_um * 1e-6, w.conductivity_S_per_m,
                        w.current_A, Polarity(w.polarity))

    def resonator_model(self) -> ResonatorModel:
        return ResonatorModel(self.resonator.field_per_amp_T_per_A, self.resonator.loop_resistance_ohm)

    def pulse_schedule(self) -> PulseSchedule:
        s = self.schedule
        return PulseSchedule(s.pulse_current_A, s.pulse_duration_s, s.period_s)

    def thermal_params(self) -> ThermalParams:
        return ThermalParams(self.thermal.B_T, self.thermal.T_K, self.constants.g_e)

    def architecture_params(self) -> ArchitectureParams:
        b = self.budget
        return ArchitectureParams(tuple(x * 1e-6 for x in b.resonator_inner_um), b.spacing_sparse_nm * 1e-9,
                                  b.hyperfine_sep_G, b.domain_G)

    def drive_strengths(self) -> DriveStrengths:
        return DriveStrengths(self.gate.mw_omega1_Hz, self.gate.rf_omega1_Hz)

    def readout_config(self) -> ReadoutConfig:
        r = self.readout
        return ReadoutConfig(
            n_qubits=r.n_qubits,
            spacing=r.spacing_nm * 1e-9,
            gradient=r.gradient_T_per_m,
            m_copies=r.m_copies,
            t2_star=r.t2_star_s,
            sensitivity=r.sensitivity_spins_per_rtHz,
            acquisition_time=r.acquisition_time_s,
            dwell=r.dwell_s,
            n_averages=r.n_averages,
            seed=self.seed,
            receiver_phase=r.receiver_phase_rad,
            apodize=r.apodize,
            gamma_e=self.physical_constants().gamma_e,
        )


def load_config(path: str | Path | None) -> DeviceConfig:
    """Read and validate a JSON config; ``None`` gives the defaults."""
    if path is None:
        return DeviceConfig()
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return DeviceConfig.from_dict(data)


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(cfg: DeviceConfig) -> str:
    return hashlib.sha256(canonical_json(cfg.to_dict()).encode()).hexdigest()


# ---------------------------------------------------------------------------
# run record


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunRecord:
    command: str
    config_sha256: str
    seed: int
    version: str = __version__
    started: str = field(default_factory=_now)
    finished: str | None = None
    outputs: dict[str, str] = field(default_factory=dict)  # file name -> sha256

    @classmethod
    def start(cls, command: str, cfg: DeviceConfig) -> "RunRecord":
        return cls(command, config_hash(cfg), cfg.seed)

    def add_output(self, path: Path) -> None:
        self.outputs[path.name] = hashlib.sha256(path.read_bytes()).hexdigest()

    def finish(self) -> dict:
        self.finished = _now()
        return asdict(self)

