"""Dense linear algebra on small registers of spin-1/2 sites.

Conventions used throughout the package:

* Operators are plain ``numpy`` complex arrays.  Hamiltonians are in cyclic
  frequency units (Hz); :func:`propagator` absorbs the factor 2*pi.
* Basis index 0 of every site is spin-up (``Sz = +1/2``).  Site 0 of a
  register is the most significant tensor factor.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

MAX_SITES = 12
HERMITIAN_RTOL = 1e-12
UNITARY_TOL = 1e-10


class SpinKind(enum.Enum):
    ELECTRON = "electron"
    P31 = "P31"


@dataclass(frozen=True)
class SpinSite:
    kind: SpinKind
    label: str
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)  # nm

    @property
    def is_electron(self) -> bool:
        return self.kind is SpinKind.ELECTRON


@dataclass(frozen=True)
class SpinRegister:
    sites: tuple[SpinSite, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sites = tuple(self.sites)
        object.__setattr__(self, "sites", sites)
        if not sites:
            raise ValueError("register needs at least one site")
        if len(sites) > MAX_SITES:
            raise ValueError(f"{len(sites)} sites exceeds the dense-matrix cap of {MAX_SITES}")
        labels = [s.label for s in sites]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate site labels in {labels}")
        object.__setattr__(self, "_index", {s.label: i for i, s in enumerate(sites)})

    @property
    def n(self) -> int:
        return len(self.sites)

    @property
    def dim(self) -> int:
        return 2 ** len(self.sites)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.sites]

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            if not 0 <= label < self.n:
                raise IndexError(f"site index {label} out of range for {self.n} sites")
            return int(label)
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"no site labelled {label!r}; have {self.labels}") from None

    def bit(self, basis_index: int, site: int) -> int:
        """0 (up) or 1 (down) for ``site`` in computational basis state ``basis_index``."""
        return (basis_index >> (self.n - 1 - site)) & 1

    def bits(self) -> np.ndarray:
        """Array of shape (dim, n) with the bit of every site in every basis state."""
        idx = np.arange(self.dim)[:, None]
        shifts = self.n - 1 - np.arange(self.n)[None, :]
        return (idx >> shifts) & 1


def spin_half_ops() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-1/2 operators (Sx, Sy, Sz) with eigenvalues +-1/2."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
    sz = np.array([[1, 0], [0, -1]], dtype=complex) / 2
    return sx, sy, sz


def embed(op: np.ndarray, site_index: int, reg: SpinRegister) -> np.ndarray:
    """Lift a single-site 2x2 operator onto the full register."""
    k = reg.index(site_index)
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got {op.shape}")
    left = np.eye(2**k)
    right = np.eye(2 ** (reg.n - k - 1))
    return np.kron(np.kron(left, op), right)


def sz_diagonal(reg: SpinRegister, site: int | str) -> np.ndarray:
    """Diagonal of the embedded Sz for one site (real, +-1/2)."""
    return 0.5 - reg.bits()[:, reg.index(site)]


def is_hermitian(h: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    h = np.asarray(h)
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= rtol * scale)


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    d = u.shape[0]
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(d)) <= tol * d)


def expm_hermitian(h: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i * angle * h) for Hermitian ``h`` via eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("matrix is not Hermitian")
    if np.count_nonzero(h - np.diag(np.diag(h))) == 0:
        return np.diag(np.exp(-1j * angle * np.diag(h).real))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """U = exp(-2*pi*i*H*t) for a Hamiltonian ``h`` in Hz and time ``t`` in s."""
    if t < 0:
        raise ValueError(f"evolution time must be non-negative, got {t}")
    return expm_hermitian(h, 2 * np.pi * t)


def gate_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """|tr(U^dag V)| / d; 1 iff U and V agree up to a global phase."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    return float(min(1.0, abs(np.vdot(u, v)) / d))


def _z_weights(n_qubits: int, partition: Sequence[Sequence[int]]) -> np.ndarray:
    # weights[j, g] = total Sz of group g in basis state j
    bits = ((np.arange(2**n_qubits)[:, None] >> (n_qubits - 1 - np.arange(n_qubits))) & 1)
    sz = 0.5 - bits
    return np.stack([sz[:, list(g)].sum(axis=1) for g in partition], axis=1)


def fidelity_up_to_local_z(
    u: np.ndarray,
    v: np.ndarray,
    qubit_partition: Sequence[Sequence[int]] | None = None,
    grid: int = 16,
    xtol: float = 1e-6,
) -> float:
    """Best gate fidelity between ``u`` and ``Z(theta) @ v`` over per-qubit z rotations.

    ``qubit_partition`` lists, for each independent z angle, the tensor
    factors it rotates; by default every factor gets its own angle.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    n = int(round(np.log2(d)))
    if 2**n != d:
        raise ValueError(f"dimension {d} is not a power of two")
    if qubit_partition is None:
        qubit_partition = [[k] for k in range(n)]
    weights = _z_weights(n, qubit_partition)
    # tr(U^dag Z V) = sum_j z_j (V U^dag)_jj
    m = np.einsum("ij,ij->i", v, u.conj())
    n_ang = weights.shape[1]

    def overlap(theta: np.ndarray) -> np.ndarray:
        phases = np.exp(-1j * (theta @ weights.T))
        return np.abs(phases @ m) / d

    axis = np.linspace(0, 2 * np.pi, grid, endpoint=False)
    pts = np.array(list(itertools.product(axis, repeat=n_ang)))
    vals = overlap(pts)
    start = pts[int(np.argmax(vals))]
    res = minimize(
        lambda th: -overlap(th[None, :])[0],
        start,
        method="Nelder-Mead",
        options={"xatol": xtol, "fatol": 1e-15, "maxiter": 4000 * n_ang,
                 "initial_simplex": start + np.vstack([np.zeros(n_ang), np.eye(n_ang) * (np.pi / grid)])},
    )
    return float(min(1.0, max(vals.max(), -res.fun)))


def basis_state(reg: SpinRegister, bits: Sequence[int]) -> np.ndarray:
    if len(bits) != reg.n:
        raise ValueError(f"need {reg.n} bits, got {len(bits)}")
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    psi = np.zeros(reg.dim, dtype=complex)
    psi[idx] = 1.0
    return psi


def product_state(*kets: np.ndarray) -> np.ndarray:
    """Tensor product of single-site kets, normalised."""
    psi = np.array([1.0 + 0j])
    for k in kets:
        psi = np.kron(psi, np.asarray(k, dtype=complex))
    return psi / np.linalg.norm(psi)


def check_state(psi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1) > tol:
        raise ValueError(f"state norm {np.linalg.norm(psi)} deviates from 1")
    return psi


def reduced_density(psi: np.ndarray, reg: SpinRegister, keep: Sequence[int | str]) -> np.ndarray:
    """Partial trace of |psi><psi| onto the sites in ``keep`` (in register order)."""
    keep_idx = sorted(reg.index(k) for k in keep)
    t = np.asarray(psi).reshape([2] * reg.n)
    others = [i for i in range(reg.n) if i not in keep_idx]
    t = np.transpose(t, keep_idx + others).reshape(2 ** len(keep_idx), -1)
    return t @ t.conj().T


def restrict(u: np.ndarray, reg: SpinRegister, fixed: dict[int | str, int]) -> np.ndarray:
    """Block of ``u`` acting on the free sites with ``fixed`` sites held in given basis states.

    Row and column spaces are the same slice; the result is unitary only if
    ``u`` leaves the fixed sites' basis states invariant.
    """
    fixed_idx = {reg.index(k): b for k, b in fixed.items()}
    bits = reg.bits()
    mask = np.ones(reg.dim, dtype=bool)
    for k, b in fixed_idx.items():
        mask &= bits[:, k] == b
    sel = np.flatnonzero(mask)
    return np.asarray(u)[np.ix_(sel, sel)]
