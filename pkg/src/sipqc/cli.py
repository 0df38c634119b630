"""Command-line entry point: budget | gate | fields | readout | paper-check.

Exit codes: 0 success, 1 paper-check reported failures, 2 invalid input
(config, flags, missing file), 3 physics precondition failed (evaluation
point inside a conductor, fidelity below threshold under ``--check``).
In ``--json`` mode stdout carries only the JSON document; diagnostics go
to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import cnot_report, cpmg_report, swap_report
from .budget import build_budget, t1_spin_lattice, thermal_alpha
from .config import ConfigError, DeviceConfig, RunRecord, load_config
from .fields import ConductorError, duty_cycle_power, field_profile, prepolarization_field
from .readout import (
    STATES_STREAM,
    calibration_shot,
    estimate_phase,
    predicted_bin_snr,
    reconstruct,
    snr_averaging_time,
    spectrum,
    synthesize,
)

EXIT_OK, EXIT_CHECKS_FAILED, EXIT_INVALID, EXIT_PHYSICS = 0, 1, 2, 3


class PhysicsError(RuntimeError):
    """A physics precondition or --check threshold was not met."""


# ---------------------------------------------------------------------------
# output helpers


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if hasattr(x, "value"):  # enums
        return x.value
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12e}"
    return str(x)


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


class Output:
    """Collects artifacts for one run and writes them (plus the run record) to --out."""

    def __init__(self, args, cfg: DeviceConfig, command: str):
        self.dir = Path(args.out) if args.out else None
        self.json_mode = args.json
        self.record = RunRecord.start(command, cfg)
        self.cfg = cfg
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> Path | None:
        if self.dir is None:
            return None
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            fh.write(text)
        self.record.add_output(path)
        return path

    def add_file(self, path: Path | None) -> None:
        if path is not None:
            self.record.add_output(path)

    def close(self) -> None:
        if self.dir is None:
            return
        self.write("config.effective.json", dumps(self.cfg.to_dict()))
        (self.dir / "run.json").write_text(dumps(self.record.finish()))
        diag(f"wrote {len(self.record.outputs)} files and run.json to {self.dir}")


def diag(msg: str) -> None:
    print(msg, file=sys.stderr)


def emit(args, data: dict, text: str) -> None:
    """JSON document in --json mode, human-readable text otherwise."""
    sys.stdout.write(dumps(data) if args.json else text.rstrip("\n") + "\n")


def _want_plot(args, out: Output) -> bool:
    if not getattr(args, "plot", False):
        return False
    if out.dir is None:
        diag("--plot needs --out; no figure written")
        return False
    return True


# ---------------------------------------------------------------------------
# budget


def _row(quantity, value, target, rule, ok) -> dict:
    return {"quantity": quantity, "value": value, "target": target, "rule": rule, "status": "PASS" if ok else "FAIL"}


def cmd_budget(args, cfg: DeviceConfig) -> int:
    b = cfg.budget
    c = cfg.physical_constants()
    report = build_budget(cfg.chain_params(), b.T_K, b.fraction_si29, b.gradient_on, b.gate_time_s,
                          b.t_store_nuclear_s, cfg.architecture_params(), b.r_typical_si29_nm, c)
    th = cfg.thermal_params()
    alpha = thermal_alpha(th, c)
    alpha_pre = thermal_alpha(replace(th, B=cfg.thermal.prepolarization_B_T), c)
    power = duty_cycle_power(cfg.wire_pair(), cfg.resonator_model(), cfg.pulse_schedule())
    s = cfg.schedule
    b_pre = prepolarization_field(cfg.resonator_model(), s.pulse_current_A, cfg.wire_pair(), s.pulse_current_A)
    t2, ratio = report.t2_effective, report.coherence_gate_ratio
    dom = report.dominant()
    table = [
        _row("t2_effective_s", t2, 20e-3, "within factor 2", 10e-3 <= t2 <= 40e-3),
        _row("dominant_mechanism", f"{dom.name.value}/{dom.parameters.get('axis', '-')}", "ElectronFlipFlop/sparse",
             "equal", dom.name.value == "ElectronFlipFlop" and dom.parameters.get("axis") == "sparse"),
        _row("coherence_gate_ratio", ratio, 1e4, "in [1e4, 1e5]", 1e4 <= ratio <= 1e5),
        _row("divincenzo_ratio_ok", report.divincenzo_ratio_ok, True, "true", report.divincenzo_ratio_ok),
        _row("gate_count_capacity", report.gate_count_capacity, 1e6, "within 5%",
             abs(report.gate_count_capacity / 1e6 - 1) <= 0.05),
        _row("n_qubits_geom", report.n_qubits_geom, 420, "within 10%", abs(report.n_qubits_geom / 420 - 1) <= 0.1),
        _row("n_qubits_spectral", report.n_qubits_spectral, 420, "within 10%",
             abs(report.n_qubits_spectral / 420 - 1) <= 0.1),
        _row("m_copies", report.m_copies, 100, "within 10%", abs(report.m_copies / 100 - 1) <= 0.1),
        _row("domain_ok", report.domain_ok, True, "linewidth < domain", report.domain_ok),
        _row("alpha", alpha, 0.34, "within 5%", abs(alpha / 0.34 - 1) <= 0.05),
        _row("alpha_prepolarized", alpha_pre, 0.02, "within 15%", abs(alpha_pre / 0.02 - 1) <= 0.15),
        _row("prepolarization_field_T", b_pre, 12.0, "in [11, 13]", 11 <= b_pre <= 13),
        _row("duty_cycle_power_W", power, b.acceptable_power_W, "within factor 2",
             b.acceptable_power_W / 2 <= power <= 2 * b.acceptable_power_W),
    ]
    data = {
        "report": report.to_dict(),
        "t1_s": t1_spin_lattice(b.T_K),
        "thermal": {"alpha": alpha, "alpha_prepolarized": alpha_pre, "B_T": th.B, "T_K": th.T,
                    "prepolarization_B_T": cfg.thermal.prepolarization_B_T},
        "power": {"duty_cycle_W": power, "acceptable_W": b.acceptable_power_W, "prepolarization_field_T": b_pre},
        "checks": table,
    }
    out = Output(args, cfg, "budget")
    out.write("budget.json", dumps(data))
    out.write("budget_checks.csv", csv_text(["quantity", "value", "target", "rule", "status"],
                                            [list(r.values()) for r in table]))
    lines = [f"{'quantity':<24} {'value':>22} {'target':>14}  {'rule':<20} status"]
    for r in table:
        v = r["value"] if isinstance(r["value"], str) else fmt(r["value"])
        lines.append(f"{r['quantity']:<24} {v:>22} {fmt(r['target']):>14}  {r['rule']:<20} {r['status']}")
    emit(args, data, "\n".join(lines))
    out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# gate


def cmd_gate(args, cfg: DeviceConfig) -> int:
    g, ch = cfg.gate, cfg.chain
    model = args.model or g.model
    drive = cfg.drive_strengths() if model == "finite" else None
    c = cfg.physical_constants()
    threshold = g.threshold if args.threshold is None else args.threshold
    if args.gate == "swap":
        report = swap_report(ch.B0_T, c, drive, g.n_random_states, cfg.seed)
        fidelity = min(report["fidelity"], report["fidelity_reverse"], report["fidelity_double"])
    elif args.gate == "cnot":
        report = cnot_report(ch.B0_T, ch.gradient_T_per_m, ch.spacing_nm * 1e-9, g.D_Hz, c, drive)
        fidelity = report["fidelity"]
    else:
        n_echoes = g.n_echoes if args.echoes is None else args.echoes
        if n_echoes < 1:
            raise ValueError("cpmg needs at least one echo (--echoes >= 1)")
        report = cpmg_report(ch.B0_T, ch.gradient_T_per_m, ch.spacing_nm * 1e-9, ch.n_sites, n_echoes,
                             g.tau_echo_s, ch.include_neighbors, c, drive)
        fidelity = report["min_amplitude"]
    report["figure_of_merit"] = fidelity
    report["threshold"] = threshold
    report["passed"] = fidelity >= threshold

    out = Output(args, cfg, f"gate {args.gate}")
    out.write(f"gate_{args.gate}.json", dumps(report))
    if args.gate == "cpmg":
        rows = [[r["echo"], r["t_s"], r["site"], r["amplitude"], r["phase_rad"]] for r in report["echoes"]]
        out.write("cpmg_echoes.csv", csv_text(["echo", "t_s", "site", "amplitude", "phase_rad"], rows))
        if _want_plot(args, out):
            from . import plotting

            out.add_file(plotting.echoes(report, out.dir / "cpmg_echoes.png"))
    text = (f"gate {args.gate} ({model}): figure of merit {fidelity:.12f}, "
            f"duration {report['duration_s']:.6e} s, threshold {threshold}")
    emit(args, report, text)
    out.close()
    if args.check and not report["passed"]:
        raise PhysicsError(f"{args.gate} figure of merit {fidelity:.9f} below threshold {threshold}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fields


FIELD_COLUMNS = ["x_m", "B_per_A", "G_per_A", "B_oracle", "G_oracle", "rel_err"]


def field_positions(x_min_um: float, x_max_um: float, samples: int) -> np.ndarray:
    xs = np.linspace(x_min_um, x_max_um, samples) * 1e-6
    span = max(abs(x_min_um), abs(x_max_um)) * 1e-6
    xs[np.abs(xs) < 1e-12 * span] = 0.0  # land exactly on the midline
    return xs


def cmd_fields(args, cfg: DeviceConfig) -> int:
    f = cfg.fields
    x_min = f.x_min_um if args.x_min_um is None else args.x_min_um
    x_max = f.x_max_um if args.x_max_um is None else args.x_max_um
    samples = f.samples if args.samples is None else args.samples
    grid_n = f.grid_n if args.grid_n is None else args.grid_n
    if samples < 1 or x_min > x_max or grid_n < 16:
        raise ValueError("need samples >= 1, x_min <= x_max and grid_n >= 16")
    cfg = replace(cfg, fields=replace(f, x_min_um=x_min, x_max_um=x_max, samples=samples, grid_n=grid_n))
    try:
        rows = field_profile(field_positions(x_min, x_max, samples), cfg.wire_pair(), grid_n)
    except ConductorError as exc:
        raise PhysicsError(str(exc)) from exc
    text = csv_text(FIELD_COLUMNS, [[r[k] for k in FIELD_COLUMNS] for r in rows])
    out = Output(args, cfg, "fields")
    out.write("fields.csv", text)
    if _want_plot(args, out):
        from . import plotting

        out.add_file(plotting.field_profile(rows, out.dir / "fields.png"))
    if args.json:
        emit(args, {"columns": FIELD_COLUMNS, "rows": rows}, "")
    else:
        sys.stdout.write(text)
    out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# readout


READOUT_FLAGS = {
    # flag dest -> (section key, type)
    "n_qubits": ("n_qubits", int),
    "spacing_nm": ("spacing_nm", float),
    "gradient": ("gradient_T_per_m", float),
    "m_copies": ("m_copies", int),
    "t2_star": ("t2_star_s", float),
    "sensitivity": ("sensitivity_spins_per_rtHz", float),
    "acquisition_time": ("acquisition_time_s", float),
    "dwell": ("dwell_s", float),
    "n_averages": ("n_averages", int),
    "receiver_phase": ("receiver_phase_rad", float),
    "snr_target": ("snr_target", float),
    "states": ("states", str),
}


def readout_states(cfg: DeviceConfig) -> np.ndarray:
    r = cfg.readout
    if r.states == "ones":
        return np.ones(r.n_qubits)
    if r.states == "random":
        rng = np.random.default_rng([cfg.seed, STATES_STREAM])
        return rng.choice([-1.0, 1.0], size=r.n_qubits)
    return np.array([1.0 if ch == "+" else -1.0 for ch in r.states])


def cmd_readout(args, cfg: DeviceConfig) -> int:
    overrides = {key: getattr(args, dest) for dest, (key, _) in READOUT_FLAGS.items()
                 if getattr(args, dest) is not None}
    if args.apodize:
        overrides["apodize"] = True
    if overrides:
        data = cfg.to_dict()
        data["readout"].update(overrides)
        cfg = DeviceConfig.from_dict(data)
    rc = cfg.readout_config()
    states = readout_states(cfg)
    sig = synthesize(states, rc)
    phase = estimate_phase(calibration_shot(rc), rc)
    img = reconstruct(sig, rc, phase=phase)
    freqs, spec = spectrum(sig, rc.apodize)
    spec = spec * np.exp(-1j * phase)
    errors = int(np.count_nonzero(img.decoded != states))

    r = cfg.readout
    if r.m_copies > 0 and r.sensitivity_spins_per_rtHz > 0:
        t_avg, t_wall = snr_averaging_time(r.snr_target, r.m_copies, r.sensitivity_spins_per_rtHz)
    else:
        t_avg = t_wall = math.nan  # noiseless or empty: no averaging budget
    bin_snr = predicted_bin_snr(rc)
    snr = {
        "snr_target": r.snr_target,
        "m_copies": r.m_copies,
        "sensitivity_spins_per_rtHz": r.sensitivity_spins_per_rtHz,
        "averaging_time_s": t_avg,
        "wall_time_s": t_wall,
        "per_bin_snr_this_run": bin_snr,
        "shots_for_target_per_bin": (r.snr_target / bin_snr) ** 2 / rc.n_averages if bin_snr > 0 else None,
        "acquisition_time_s": rc.acquisition_time,
        "dwell_s": rc.dwell,
        "samples": rc.samples,
        "qubit_spacing_Hz": rc.qubit_spacing_hz,
        "receiver_phase_estimate_rad": phase,
    }
    bits = {
        "input": states.astype(int),
        "decoded": img.decoded,
        "errors": errors,
        "bins": [{"frequency_Hz": b.frequency, "position_m": b.position, "amplitude": b.amplitude,
                  "decoded": b.decoded, "snr": b.snr, "confidence": b.confidence} for b in img.bins],
    }
    out = Output(args, cfg, "readout")
    t = rc.times()
    out.write("signal.csv", csv_text(["t_s", "re", "im"], zip(t, sig.samples.real, sig.samples.imag)))
    out.write("spectrum.csv", csv_text(["f_Hz", "amplitude"], zip(freqs, spec.real)))
    out.write("bits.json", dumps(bits))
    out.write("snr_report.json", dumps(snr))
    if _want_plot(args, out):
        from . import plotting

        out.add_file(plotting.readout(t, sig.samples, freqs, spec, img.amplitudes, out.dir / "readout.png"))
    text = (f"readout: {rc.n_qubits} qubits, {errors} bit errors, per-bin SNR {bin_snr:.4g}; "
            f"SNR {r.snr_target:g} needs {t_avg:.6g} s averaging ({t_wall:.6g} s wall)")
    if not math.isfinite(t_avg):
        text = text[:text.index("; SNR")] + "; no averaging budget (zero sensitivity or no copies)"
    emit(args, {"snr_report": snr, "errors": errors, "decoded": img.decoded}, text)
    out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# paper-check


def _parse_scale(text: str) -> tuple[str, float]:
    name, _, val = text.partition("=")
    if not val:
        raise argparse.ArgumentTypeError(f"expected NAME=FACTOR, got {text!r}")
    try:
        return name, float(val)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad factor in {text!r}") from exc


def cmd_paper_check(args, cfg: DeviceConfig) -> int:
    from .paper_check import ITEMS, format_table, perturbed, run_checks, to_json

    constants = cfg.physical_constants()
    if args.scale:
        constants = perturbed(constants, **dict(args.scale))
    items = args.items or list(ITEMS)
    bad = [i for i in items if i not in ITEMS]
    if bad:
        raise ValueError(f"unknown check items {bad}; valid items are {list(ITEMS)}")
    rows = run_checks(constants, items)
    data = to_json(rows)
    out = Output(args, cfg, "paper-check")
    out.write("paper_check.json", dumps(data))
    emit(args, data, format_table(rows))
    out.close()
    return EXIT_OK if data["summary"]["failed"] == 0 else EXIT_CHECKS_FAILED


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON device config (unit-suffixed keys)")
    common.add_argument("--out", metavar="DIR", help="directory for artifacts and the run record")
    common.add_argument("--seed", type=int, help="seed for randomized steps (default 0 or config)")
    common.add_argument("--json", action="store_true", help="machine-readable stdout")

    p = argparse.ArgumentParser(prog="sipqc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("budget", parents=[common], help="coherence, polarization and size budget")

    g = sub.add_parser("gate", parents=[common], help="compile and verify a gate sequence")
    g.add_argument("gate", choices=["swap", "cnot", "cpmg"])
    g.add_argument("--model", choices=["ideal", "finite"])
    g.add_argument("--check", action="store_true", help="exit 3 if the figure of merit is below threshold")
    g.add_argument("--threshold", type=float)
    g.add_argument("--echoes", type=int, help="CPMG echo count")
    g.add_argument("--plot", action="store_true", help="write PNG figures next to the CSVs")

    f = sub.add_parser("fields", parents=[common], help="wire field and gradient profile (CSV)")
    f.add_argument("--x-min-um", type=float)
    f.add_argument("--x-max-um", type=float)
    f.add_argument("--samples", type=int)
    f.add_argument("--grid-n", type=int)
    f.add_argument("--plot", action="store_true", help="write PNG figures next to the CSVs")

    r = sub.add_parser("readout", parents=[common], help="synthesize and decode a frequency-encoded readout")
    for dest, (key, typ) in READOUT_FLAGS.items():
        r.add_argument("--" + dest.replace("_", "-"), dest=dest, type=typ, help=f"override readout.{key}")
    r.add_argument("--apodize", action="store_true")
    r.add_argument("--plot", action="store_true", help="write PNG figures next to the CSVs")

    pc = sub.add_parser("paper-check", parents=[common], help="table of published design numbers")
    pc.add_argument("--items", type=int, nargs="+", help="subset of item numbers")
    pc.add_argument("--scale", type=_parse_scale, action="append", metavar="NAME=FACTOR",
                    help="multiply a physical constant, e.g. A_hyperfine=0.95")
    return p


COMMANDS = {
    "budget": cmd_budget,
    "gate": cmd_gate,
    "fields": cmd_fields,
    "readout": cmd_readout,
    "paper-check": cmd_paper_check,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(f"seed must be non-negative, got {args.seed}")
            cfg = cfg.with_seed(args.seed)
        diag(f"seed = {cfg.seed}")
        return COMMANDS[args.command](args, cfg)
    except ConductorError as exc:
        diag(f"error: {exc}")
        return EXIT_PHYSICS
    except PhysicsError as exc:
        diag(f"error: {exc}")
        return EXIT_PHYSICS
    except ValueError as exc:  # includes ConfigError
        diag(f"error: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
