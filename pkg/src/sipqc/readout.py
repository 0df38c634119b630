"""Frequency-encoded 1-D readout of a qubit row.

Under a static gradient each qubit position maps to its own precession
frequency.  The CPMG echo train is collapsed to one acquisition window; the
image is the phase-corrected Fourier transform of that window, integrated
over each qubit's frequency bin.

Noise model: each quadrature carries white Gaussian noise whose one-sided
amplitude spectral density is the spin sensitivity (spins/sqrt(Hz)), so the
per-sample standard deviation per quadrature is
``sensitivity * sqrt(1 / (2 * dwell * n_averages))``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.special import erf
from scipy.stats import norm

from .constants import DEFAULT_CONSTANTS


POINTS_PER_BIN = 16


def matched_grid(n_qubits: int, qubit_spacing_hz: float, points_per_bin: int = POINTS_PER_BIN) -> tuple[float, float]:
    """Acquisition time and dwell that put every qubit frequency on an FFT point.

    The window holds ``points_per_bin`` (even) spectral points per qubit and
    the sample count is the next power of two above the occupied bandwidth.
    """
    if points_per_bin < 2 or points_per_bin % 2:
        raise ValueError("points_per_bin must be an even integer >= 2")
    acq = points_per_bin / qubit_spacing_hz
    samples = 1 << math.ceil(math.log2(n_qubits * points_per_bin + 1))
    return acq, acq / samples


@dataclass(frozen=True)
class ReadoutConfig:
    n_qubits: int = 400
    spacing: float = 5e-9  # m
    gradient: float = 1000.0  # T/m
    m_copies: int = 100
    t2_star: float = 20e-3  # s
    sensitivity: float = 1000.0  # spins/sqrt(Hz)
    acquisition_time: float | None = None  # s; None -> grid-matched window
    dwell: float | None = None  # s; None -> grid-matched sampling
    n_averages: int = 1
    seed: int = 0
    receiver_phase: float = 0.0  # rad, applied to every acquired shot
    apodize: bool = False
    gamma_e: float = DEFAULT_CONSTANTS.gamma_e  # Hz/T

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.m_copies < 0 or self.n_averages < 1:
            raise ValueError("m_copies must be >= 0 and n_averages >= 1")
        if min(self.spacing, self.gradient, self.gamma_e) <= 0:
            raise ValueError("spacing, gradient and gamma_e must be positive")
        if self.acquisition_time is None or self.dwell is None:
            acq, dwell = matched_grid(self.n_qubits, self.qubit_spacing_hz)
            if self.acquisition_time is None:
                object.__setattr__(self, "acquisition_time", acq)
            if self.dwell is None:
                object.__setattr__(self, "dwell", dwell)
        if min(self.t2_star, self.acquisition_time, self.dwell) <= 0:
            raise ValueError("spacing, gradient, t2_star, acquisition_time and dwell must be positive")
        if self.sensitivity < 0:
            raise ValueError("sensitivity must be non-negative")
        ratio = self.acquisition_time / self.dwell
        if abs(ratio - round(ratio)) > 1e-6 * ratio:
            raise ValueError("acquisition_time must be an integer number of dwell times")
        if 1 / self.acquisition_time >= self.qubit_spacing_hz:
            raise ValueError(
                f"spectral resolution {1 / self.acquisition_time:.4g} Hz does not resolve the "
                f"qubit spacing {self.qubit_spacing_hz:.4g} Hz"
            )
        if 1 / self.dwell <= self.n_qubits * self.qubit_spacing_hz:
            raise ValueError(
                f"sampling rate {1 / self.dwell:.4g} Hz below the occupied bandwidth "
                f"{self.n_qubits * self.qubit_spacing_hz:.4g} Hz"
            )

    @property
    def samples(self) -> int:
        return int(round(self.acquisition_time / self.dwell))

    @property
    def qubit_spacing_hz(self) -> float:
        return self.gamma_e * self.gradient * self.spacing

    @property
    def noise_sigma(self) -> float:
        """Per-sample, per-quadrature noise standard deviation (spin units)."""
        return self.sensitivity * math.sqrt(1 / (2 * self.dwell * self.n_averages))

    def positions(self) -> np.ndarray:
        return (np.arange(self.n_qubits) - (self.n_qubits - 1) / 2) * self.spacing

    def frequencies(self) -> np.ndarray:
        return self.gamma_e * self.gradient * self.positions()

    def times(self) -> np.ndarray:
        return np.arange(self.samples) * self.dwell


@dataclass(frozen=True, eq=False)
class EchoSignal:
    samples: np.ndarray
    dwell: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("signal contains non-finite samples")


@dataclass(frozen=True)
class ImageBin:
    frequency: float
    position: float
    amplitude: float
    decoded: int
    snr: float  # |amplitude| / per-bin noise sigma
    confidence: float  # probability the sign is right given snr, in [0, 1]


@dataclass(frozen=True, eq=False)
class Image1D:
    bins: list[ImageBin]
    frequencies: np.ndarray  # spectrum axis, Hz
    spectrum: np.ndarray  # phase-corrected complex spectrum
    phase: float
    noise_sigma: float

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([b.amplitude for b in self.bins])

    @property
    def decoded(self) -> np.ndarray:
        return np.array([b.decoded for b in self.bins])


def _rng(cfg: ReadoutConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, stream])


DATA_STREAM, CALIBRATION_STREAM, STATES_STREAM = 0, 1, 2


def synthesize(states, cfg: ReadoutConfig, rng: np.random.Generator | None = None) -> EchoSignal:
    """Noisy echo signal of ``m_copies`` identical rows holding ``states`` (+-1)."""
    states = np.asarray(states, dtype=float)
    if states.shape != (cfg.n_qubits,):
        raise ValueError(f"need {cfg.n_qubits} states, got shape {states.shape}")
    if rng is None:
        rng = _rng(cfg, DATA_STREAM)
    t = cfg.times()
    f = cfg.frequencies()
    basis = np.exp(2j * np.pi * np.outer(t, f))
    s = basis @ (cfg.m_copies * states)
    s *= np.exp(-t / cfg.t2_star + 1j * cfg.receiver_phase)
    if cfg.sensitivity > 0:
        sigma = cfg.noise_sigma
        s = s + sigma * (rng.standard_normal(t.size) + 1j * rng.standard_normal(t.size))
    return EchoSignal(s, cfg.dwell, {"config": asdict(cfg)})


def calibration_shot(cfg: ReadoutConfig, rng: np.random.Generator | None = None) -> EchoSignal:
    """All qubits in the +1 state; fixes the receiver phase."""
    if rng is None:
        rng = _rng(cfg, CALIBRATION_STREAM)
    return synthesize(np.ones(cfg.n_qubits), cfg, rng)


def _window(n: int, apodize: bool) -> np.ndarray:
    if not apodize:
        return np.ones(n)
    return np.cos(0.5 * np.pi * np.arange(n) / n)


def spectrum(sig: EchoSignal, apodize: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Centred frequency axis and spectrum normalised so a unit tone on grid has height 1."""
    n = sig.samples.size
    spec = np.fft.fftshift(np.fft.fft(_window(n, apodize) * sig.samples)) / n
    freqs = np.fft.fftshift(np.fft.fftfreq(n, sig.dwell))
    return freqs, spec


def bin_slices(cfg: ReadoutConfig, freqs: np.ndarray) -> list[slice]:
    """Contiguous spectrum index ranges [f_i - df/2, f_i + df/2) for each qubit."""
    df = cfg.qubit_spacing_hz
    centres = cfg.frequencies()
    lo = np.searchsorted(freqs, centres - df / 2, side="left")
    hi = np.searchsorted(freqs, centres + df / 2, side="left")
    return [slice(int(a), int(b)) for a, b in zip(lo, hi)]


@lru_cache(maxsize=64)
def _bin_noise_gain(n: int, width: int, apodize: bool) -> float:
    # Var(Re sum_{k in bin} S_k) / sigma^2 = sum_n |w_n D_n|^2 / n^2, D the Dirichlet sum
    k = np.arange(width)[:, None]
    d = np.exp(-2j * np.pi * k * np.arange(n)[None, :] / n).sum(axis=0)
    w = _window(n, apodize)
    return float(np.sum(np.abs(w * d) ** 2)) / n**2


def predicted_bin_noise(cfg: ReadoutConfig, width: int | None = None) -> float:
    """Standard deviation of a bin amplitude due to receiver noise."""
    if width is None:
        freqs = np.fft.fftshift(np.fft.fftfreq(cfg.samples, cfg.dwell))
        widths = [s.stop - s.start for s in bin_slices(cfg, freqs)]
        width = int(np.median(widths))
    return cfg.noise_sigma * math.sqrt(_bin_noise_gain(cfg.samples, width, cfg.apodize))


def estimate_phase(calibration: EchoSignal, cfg: ReadoutConfig) -> float:
    freqs, spec = spectrum(calibration, cfg.apodize)
    total = sum(spec[s].sum() for s in bin_slices(cfg, freqs))
    return float(np.angle(total))


def reconstruct(
    sig: EchoSignal,
    cfg: ReadoutConfig,
    calibration: EchoSignal | None = None,
    phase: float | None = None,
) -> Image1D:
    """Phase-corrected spectrum integrated per qubit bin and sign-decoded.

    The zero-order phase comes from ``phase`` if given, else from the
    ``calibration`` shot, else it is taken as zero.
    """
    if sig.samples.size != cfg.samples or not math.isclose(sig.dwell, cfg.dwell, rel_tol=1e-9):
        raise ValueError(
            f"signal grid ({sig.samples.size} samples, dwell {sig.dwell}) does not match the configuration "
            f"({cfg.samples} samples, dwell {cfg.dwell})"
        )
    if phase is None:
        phase = estimate_phase(calibration, cfg) if calibration is not None else 0.0
    freqs, spec = spectrum(sig, cfg.apodize)
    spec = spec * np.exp(-1j * phase)
    slices = bin_slices(cfg, freqs)
    widths = np.array([s.stop - s.start for s in slices])
    if np.any(widths <= 0):
        f_bad = cfg.frequencies()[np.argmax(widths <= 0)]
        raise ValueError(f"qubit bin at {f_bad:.6g} Hz contains no spectral points")
    csum = np.concatenate([[0.0], np.cumsum(spec.real)])
    amps = csum[[s.stop for s in slices]] - csum[[s.start for s in slices]]
    sigmas = {int(w): predicted_bin_noise(cfg, int(w)) for w in np.unique(widths)}
    bins = []
    for f, x, amp, w in zip(cfg.frequencies(), cfg.positions(), amps, widths):
        sigma = sigmas[int(w)]
        snr = abs(amp) / sigma if sigma > 0 else math.inf
        conf = float(erf(snr / math.sqrt(2))) if math.isfinite(snr) else 1.0
        bins.append(ImageBin(float(f), float(x), float(amp), 1 if amp >= 0 else -1, snr, conf))
    return Image1D(bins, freqs, spec, float(phase), predicted_bin_noise(cfg))


def signal_amplitude(cfg: ReadoutConfig) -> float:
    """Mean bin amplitude of a noiseless all-ones row (close to m_copies)."""
    quiet = replace(cfg, sensitivity=0.0)
    sig = synthesize(np.ones(cfg.n_qubits), quiet)
    return float(np.mean(reconstruct(sig, quiet, phase=cfg.receiver_phase).amplitudes))


def predicted_bin_snr(cfg: ReadoutConfig) -> float:
    sigma = predicted_bin_noise(cfg)
    return math.inf if sigma == 0 else signal_amplitude(cfg) / sigma


def snr_averaging_time(snr_target: float, m_copies: int, sensitivity: float) -> tuple[float, float]:
    """Signal-averaging time and wall time for a target per-qubit SNR.

    SNR = m sqrt(T) / sensitivity; half of every run is spent acquiring, so
    the wall time is twice the averaging time.
    """
    if snr_target <= 0 or m_copies <= 0 or sensitivity <= 0:
        raise ValueError("snr_target, m_copies and sensitivity must be positive")
    t = (snr_target * sensitivity / m_copies) ** 2
    return t, 2 * t


def wilson_interval(errors: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("need at least one trial")
    z = norm.ppf(0.5 + confidence / 2)
    p = errors / n
    denom = 1 + z**2 / n
    centre = (p + z**2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    # the bounds are exact at the edges; rounding would leave ~1e-19 there
    lo = 0.0 if errors == 0 else max(0.0, centre - half)
    hi = 1.0 if errors == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class BerResult:
    ber: float
    errors: int
    bits: int
    trials: int
    ci_low: float
    ci_high: float
    bin_snr: float


def ber_monte_carlo(cfg: ReadoutConfig, trials: int) -> BerResult:
    """Bit-error rate of synthesize -> reconstruct over random rows.

    Trial ``k`` draws from the stream seeded by ``(seed, 1000 + k)``, so
    results do not depend on execution order.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    phase = estimate_phase(calibration_shot(cfg), cfg)
    errors = 0
    for k in range(trials):
        rng = np.random.default_rng([cfg.seed, 1000 + k])
        states = rng.choice([-1.0, 1.0], size=cfg.n_qubits)
        img = reconstruct(synthesize(states, cfg, rng), cfg, phase=phase)
        errors += int(np.count_nonzero(img.decoded != states))
    bits = trials * cfg.n_qubits
    lo, hi = wilson_interval(errors, bits)
    return BerResult(errors / bits, errors, bits, trials, lo, hi, predicted_bin_snr(cfg))


def with_bin_snr(cfg: ReadoutConfig, snr: float) -> ReadoutConfig:
    """Copy of ``cfg`` with the sensitivity set so the predicted per-bin SNR equals ``snr``."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    unit = predicted_bin_noise(replace(cfg, sensitivity=1.0))
    return replace(cfg, sensitivity=signal_amplitude(cfg) / (snr * unit))


def measured_snr(cfg: ReadoutConfig, trials: int = 200) -> float:
    """Mean over standard deviation of bin amplitudes for an all-ones row, pooled over bins."""
    if trials < 2:
        raise ValueError("need at least two trials")
    ones = np.ones(cfg.n_qubits)
    amps = np.array([
        reconstruct(synthesize(ones, cfg, np.random.default_rng([cfg.seed, 2000 + k])), cfg,
                    phase=cfg.receiver_phase).amplitudes
        for k in range(trials)
    ])
    return float(amps.mean() / amps.std(axis=0, ddof=1).mean())


def snr_scaling_slope(cfg: ReadoutConfig, averages=(1, 4, 16, 64), trials: int = 200) -> tuple[float, list[float]]:
    """Log-log regression slope of measured SNR against the number of averages."""
    snrs = [measured_snr(replace(cfg, n_averages=n), trials) for n in averages]
    slope = float(np.polyfit(np.log(averages), np.log(snrs), 1)[0])
    return slope, snrs
