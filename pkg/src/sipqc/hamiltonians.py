"""Secular drift Hamiltonians of P donors in silicon and their transition lines.

All Hamiltonians here contain only z operators, so they are real diagonal
in the product basis and mutually commuting.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .constants import DEFAULT_CONSTANTS, PhysicalConstants, ee_dipolar
from .spin import MAX_SITES, SpinKind, SpinRegister, SpinSite, sz_diagonal


class TransitionKind(str, enum.Enum):
    ESR = "ESR"
    NMR = "NMR"


@dataclass(frozen=True)
class SingleSiteParams:
    B0: float  # T
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    def __post_init__(self):
        if self.B0 < 0:
            raise ValueError("B0 must be non-negative")


@dataclass(frozen=True)
class TwoSiteParams:
    B0_A: float  # T
    B0_B: float  # T
    D: float = 0.0  # Hz
    constants: PhysicalConstants = DEFAULT_CONSTANTS

    def __post_init__(self):
        if self.B0_A <= 0 or self.B0_B <= 0:
            raise ValueError("site fields must be positive")

    @classmethod
    def from_gradient(cls, B0: float, gradient: float, spacing: float, D: float = 0.0,
                      constants: PhysicalConstants = DEFAULT_CONSTANTS) -> "TwoSiteParams":
        """Sites at -spacing/2 and +spacing/2 around a mean field ``B0``."""
        return cls(B0 - gradient * spacing / 2, B0 + gradient * spacing / 2, D, constants)

    @property
    def B0_mean(self) -> float:
        return 0.5 * (self.B0_A + self.B0_B)


@dataclass(frozen=True)
class ChainParams:
    n_sites: int
    spacing: float  # m
    B0: float  # T
    gradient: float = 0.0  # T/m
    include_neighbors: bool = True
    electrons_only: bool = False
    nuclear_spins: tuple[float, ...] | None = None  # fixed Iz (+-1/2) in electrons-only mode

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be >= 1")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        spins = (2 if not self.electrons_only else 1) * self.n_sites
        if spins > MAX_SITES:
            raise ValueError(f"chain needs {spins} spins, over the cap of {MAX_SITES}")
        if self.nuclear_spins is not None:
            if len(self.nuclear_spins) != self.n_sites:
                raise ValueError("nuclear_spins needs one entry per site")
            if any(abs(abs(m) - 0.5) > 1e-12 for m in self.nuclear_spins):
                raise ValueError("nuclear_spins entries must be +-1/2")

    def positions(self) -> np.ndarray:
        """Site x coordinates in metres, centred on the chain midpoint."""
        return (np.arange(self.n_sites) - (self.n_sites - 1) / 2) * self.spacing

    def fields(self) -> np.ndarray:
        return self.B0 + self.gradient * self.positions()


@dataclass(frozen=True)
class Transition:
    frequency: float  # |E_up - E_down|, Hz
    kind: TransitionKind
    site: int
    label: str
    levels: tuple[int, int]  # (flipped site up, flipped site down)
    signed_frequency: float = field(default=0.0)
    condition: tuple[int, ...] = ()  # bits of the other sites


def donor_register(position_nm: float = 0.0) -> SpinRegister:
    pos = (position_nm, 0.0, 0.0)
    return SpinRegister((SpinSite(SpinKind.ELECTRON, "e", pos), SpinSite(SpinKind.P31, "n", pos)))


def two_site_register(spacing_nm: float = 5.0) -> SpinRegister:
    a, b = (-spacing_nm / 2, 0.0, 0.0), (spacing_nm / 2, 0.0, 0.0)
    return SpinRegister((
        SpinSite(SpinKind.ELECTRON, "eA", a),
        SpinSite(SpinKind.ELECTRON, "eB", b),
        SpinSite(SpinKind.P31, "nA", a),
        SpinSite(SpinKind.P31, "nB", b),
    ))


def chain_register(p: ChainParams) -> SpinRegister:
    xs = p.positions() * 1e9
    sites = [SpinSite(SpinKind.ELECTRON, f"e{i}", (x, 0.0, 0.0)) for i, x in enumerate(xs)]
    if not p.electrons_only:
        sites += [SpinSite(SpinKind.P31, f"n{i}", (x, 0.0, 0.0)) for i, x in enumerate(xs)]
    return SpinRegister(tuple(sites))


def h_single(p: SingleSiteParams) -> np.ndarray:
    """Single donor (e, n): gamma_e B0 Sz - gamma_n B0 Iz + A Sz Iz, in Hz."""
    c = p.constants
    reg = donor_register()
    sz = sz_diagonal(reg, 0)
    iz = sz_diagonal(reg, 1)
    diag = c.gamma_e * p.B0 * sz - c.gamma_n_31P * p.B0 * iz + c.A_hyperfine * sz * iz
    return np.diag(diag).astype(complex)


def h_two_site(p: TwoSiteParams) -> np.ndarray:
    """Two donors (eA, eB, nA, nB) with distinct electron fields and Sz-Sz dipolar coupling D.

    Nuclear Zeeman terms use the mean field; the gradient is negligible there.
    """
    c = p.constants
    reg = two_site_register()
    sa, sb, ia, ib = (sz_diagonal(reg, k) for k in range(4))
    diag = (
        c.gamma_e * (p.B0_A * sa + p.B0_B * sb)
        - c.gamma_n_31P * p.B0_mean * (ia + ib)
        + c.A_hyperfine * (sa * ia + sb * ib)
        + p.D * sa * sb
    )
    return np.diag(diag).astype(complex)


def chain_couplings(p: ChainParams) -> dict[tuple[int, int], float]:
    """Electron-electron Sz-Sz couplings (Hz) for every pair in the chain."""
    if not p.include_neighbors:
        return {}
    xs = p.positions()
    return {(i, j): ee_dipolar(abs(xs[j] - xs[i]) * 1e9) for i, j in combinations(range(p.n_sites), 2)}


def h_chain(p: ChainParams, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Linear donor chain under a field gradient.

    Each site gets single-donor terms at its local field.  In electrons-only
    mode each nucleus is a fixed Iz, i.e. a +-A/2 shift of its electron line.
    """
    c = constants
    reg = chain_register(p)
    fields = p.fields()
    n = p.n_sites
    diag = np.zeros(reg.dim)
    nuclear = p.nuclear_spins if p.nuclear_spins is not None else (0.5,) * n
    for i in range(n):
        sz = sz_diagonal(reg, i)
        diag += c.gamma_e * fields[i] * sz
        if p.electrons_only:
            diag += c.A_hyperfine * nuclear[i] * sz
        else:
            iz = sz_diagonal(reg, n + i)
            diag += -c.gamma_n_31P * fields[i] * iz + c.A_hyperfine * sz * iz
    for (i, j), d in chain_couplings(p).items():
        diag += d * sz_diagonal(reg, i) * sz_diagonal(reg, j)
    return np.diag(diag).astype(complex)


def _require_diagonal(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h)
    off = h - np.diag(np.diag(h))
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(off)) > 1e-12 * scale:
        raise ValueError("drift Hamiltonian must be diagonal in the product basis")
    return np.diag(h).real


def transitions(h: np.ndarray, reg: SpinRegister) -> list[Transition]:
    """All single-spin-flip transitions of a diagonal Hamiltonian, sorted by frequency.

    A flip of an electron site is ESR, of a nuclear site NMR.  The signed
    frequency is E(site up) - E(site down).
    """
    energies = _require_diagonal(h)
    if energies.size != reg.dim:
        raise ValueError(f"Hamiltonian dim {energies.size} does not match register dim {reg.dim}")
    bits = reg.bits()
    out = []
    for k, site in enumerate(reg.sites):
        kind = TransitionKind.ESR if site.is_electron else TransitionKind.NMR
        mask = 1 << (reg.n - 1 - k)
        for up in np.flatnonzero(bits[:, k] == 0):
            down = int(up) | mask
            f = energies[up] - energies[down]
            cond = tuple(int(b) for j, b in enumerate(bits[up]) if j != k)
            out.append(Transition(abs(f), kind, k, site.label, (int(up), down), f, cond))
    out.sort(key=lambda t: (t.frequency, t.site, t.levels))
    return out


def transition_table(h: np.ndarray, reg: SpinRegister | None = None) -> list[Transition]:
    """Labelled ESR/NMR lines of a single donor (dim 4) or any diagonal register Hamiltonian."""
    if reg is None:
        if np.asarray(h).shape != (4, 4):
            raise ValueError("register required for Hamiltonians other than a single donor")
        reg = donor_register()
    return transitions(h, reg)
