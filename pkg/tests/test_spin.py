import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_hermitian, random_unitary
from sipqc.spin import (
    MAX_SITES,
    SpinKind,
    SpinRegister,
    SpinSite,
    basis_state,
    check_state,
    embed,
    expm_hermitian,
    fidelity_up_to_local_z,
    gate_fidelity,
    is_hermitian,
    is_unitary,
    product_state,
    propagator,
    reduced_density,
    restrict,
    spin_half_ops,
    sz_diagonal,
)

SX, SY, SZ = spin_half_ops()
I2 = np.eye(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def register(n: int) -> SpinRegister:
    return SpinRegister(tuple(SpinSite(SpinKind.ELECTRON, f"s{i}") for i in range(n)))


def z_layer(thetas) -> np.ndarray:
    u = np.array([[1.0 + 0j]])
    for th in thetas:
        u = np.kron(u, np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)]))
    return u


# -- spin-1/2 algebra ------------------------------------------------------


def test_sz_eigenvalues():
    assert sorted(np.linalg.eigvalsh(SZ)) == [-0.5, 0.5]


def test_commutator():
    assert np.allclose(SX @ SY - SY @ SX, 1j * SZ, atol=1e-15)


def test_casimir():
    assert np.allclose(SX @ SX + SY @ SY + SZ @ SZ, 0.75 * I2, atol=1e-15)


# -- register --------------------------------------------------------------


def test_register_dim_and_cap():
    assert register(3).dim == 8
    with pytest.raises(ValueError, match="cap"):
        register(MAX_SITES + 1)


def test_register_rejects_duplicate_labels():
    s = SpinSite(SpinKind.ELECTRON, "e")
    with pytest.raises(ValueError, match="duplicate"):
        SpinRegister((s, s))


def test_site_zero_is_most_significant():
    reg = register(2)
    assert np.allclose(embed(SZ, 0, reg), np.kron(SZ, I2))
    assert reg.bit(2, 0) == 1 and reg.bit(2, 1) == 0


# -- embed -----------------------------------------------------------------


def test_embed_identity():
    reg = register(3)
    for k in range(3):
        assert np.allclose(embed(I2, k, reg), np.eye(8))


def test_embed_sz_spectrum():
    assert sorted(np.linalg.eigvalsh(embed(SZ, 0, register(2)))) == [-0.5, -0.5, 0.5, 0.5]


def test_embed_traceless():
    reg = register(4)
    for k in range(4):
        assert abs(np.trace(embed(SZ, k, reg))) < 1e-15


def test_embed_out_of_range():
    with pytest.raises(IndexError):
        embed(SZ, 2, register(2))


def test_sz_diagonal_matches_embed():
    reg = register(3)
    for k in range(3):
        assert np.allclose(np.diag(embed(SZ, k, reg)), sz_diagonal(reg, k))


@pytest.mark.property
@given(st.integers(0, 3), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**31))
def test_embed_is_linear(k, a, b, seed):
    rng = np.random.default_rng(seed)
    reg = register(4)
    x, y = random_hermitian(2, rng), random_hermitian(2, rng)
    assert np.allclose(embed(a * x + b * y, k, reg), a * embed(x, k, reg) + b * embed(y, k, reg), atol=1e-12)


# -- propagator -----------------------------------------------------------


def test_propagator_at_zero_is_identity(rng):
    h = random_hermitian(4, rng, 1e6)
    assert np.allclose(propagator(h, 0.0), np.eye(4))


def test_propagator_half_period_z_rotation():
    f = 3.7e6
    u = propagator(f * SZ, 1 / (2 * f))
    assert np.allclose(u, np.diag([np.exp(-0.5j * np.pi), np.exp(0.5j * np.pi)]), atol=1e-12)


def test_propagator_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        propagator(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)


def test_propagator_rejects_negative_time():
    with pytest.raises(ValueError):
        propagator(SZ, -1e-9)


@pytest.mark.property
@given(st.integers(1, 3), st.floats(0, 1e-6), st.integers(0, 2**31))
def test_propagator_matches_pade_oracle(n, t, seed):
    # independent route: scipy's scaling-and-squaring Pade exponential
    rng = np.random.default_rng(seed)
    h = random_hermitian(2**n, rng, 1e6)
    assert np.allclose(propagator(h, t), scipy.linalg.expm(-2j * np.pi * h * t), atol=1e-9)


@pytest.mark.property
@given(st.integers(1, 3), st.floats(0, 1e-6), st.floats(0, 1e-6), st.integers(0, 2**31))
def test_propagator_semigroup(n, t1, t2, seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(2**n, rng, 1e6)
    assert np.allclose(propagator(h, t1) @ propagator(h, t2), propagator(h, t1 + t2), atol=1e-10)


@pytest.mark.property
@given(st.integers(1, 4), st.floats(0, 1e-5), st.integers(0, 2**31))
def test_propagator_is_unitary(n, t, seed):
    rng = np.random.default_rng(seed)
    assert is_unitary(propagator(random_hermitian(2**n, rng, 1e7), t))


@pytest.mark.property
@given(st.floats(0, 20), st.floats(-200e6, 200e6), st.floats(0, 1e-6))
def test_propagator_commuting_split(b0, a, t):
    # Zeeman and hyperfine terms of a donor commute, so their propagators factor
    reg = register(2)
    zeeman = np.diag(27.97e9 * b0 * sz_diagonal(reg, 0) - 17.235e6 * b0 * sz_diagonal(reg, 1)).astype(complex)
    hyper = np.diag(a * sz_diagonal(reg, 0) * sz_diagonal(reg, 1)).astype(complex)
    assert np.allclose(propagator(zeeman + hyper, t), propagator(zeeman, t) @ propagator(hyper, t), atol=1e-9)


def test_expm_dense_path(rng):
    h = random_hermitian(8, rng)
    assert np.allclose(expm_hermitian(h, 0.3), scipy.linalg.expm(-0.3j * h), atol=1e-12)


def test_hermitian_and_unitary_checks(rng):
    assert is_hermitian(random_hermitian(4, rng))
    assert not is_hermitian(np.array([[0, 1], [0, 0]]))
    assert is_unitary(random_unitary(4, rng))
    assert not is_unitary(2 * np.eye(2))


# -- fidelities ------------------------------------------------------------


def test_gate_fidelity_examples(rng):
    u = random_unitary(4, rng)
    assert gate_fidelity(u, u) == pytest.approx(1.0, abs=1e-14)
    assert gate_fidelity(u, np.exp(0.7j) * u) == pytest.approx(1.0, abs=1e-14)
    x_pi = scipy.linalg.expm(-1j * np.pi * 2 * SX / 2 * 1)  # pi rotation about x
    assert gate_fidelity(I2, x_pi) == pytest.approx(0.0, abs=1e-15)


def test_gate_fidelity_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        gate_fidelity(np.eye(2), np.eye(4))


@pytest.mark.property
@given(st.integers(1, 3), st.integers(0, 2**31))
def test_gate_fidelity_symmetric_and_left_invariant(n, seed):
    rng = np.random.default_rng(seed)
    d = 2**n
    u, v, w = (random_unitary(d, rng) for _ in range(3))
    f = gate_fidelity(u, v)
    assert 0 <= f <= 1
    assert f == pytest.approx(gate_fidelity(v, u), abs=1e-12)
    assert f == pytest.approx(gate_fidelity(w @ u, w @ v), abs=1e-12)


def test_local_z_examples():
    assert fidelity_up_to_local_z(CNOT, CNOT) == pytest.approx(1.0, abs=1e-12)
    assert fidelity_up_to_local_z(CNOT, SWAP) < 0.9


@pytest.mark.property
@given(st.lists(st.floats(0, 2 * np.pi), min_size=2, max_size=2), st.integers(0, 2**31))
def test_local_z_recovers_construction(thetas, seed):
    v = random_unitary(4, np.random.default_rng(seed))
    u = z_layer(thetas) @ v
    assert fidelity_up_to_local_z(u, v) == pytest.approx(1.0, abs=1e-9)


def test_local_z_partition_groups_factors():
    # one shared angle over both factors cannot undo independent rotations
    v = np.eye(4, dtype=complex)
    u = z_layer([0.0, 2.0])
    assert fidelity_up_to_local_z(u, v) == pytest.approx(1.0, abs=1e-9)
    assert fidelity_up_to_local_z(u, v, qubit_partition=[[0, 1]]) < 0.99


def test_local_z_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        fidelity_up_to_local_z(np.eye(3), np.eye(3))


# -- states ----------------------------------------------------------------


def test_basis_and_product_states():
    reg = register(2)
    assert np.allclose(basis_state(reg, [1, 0]), [0, 0, 1, 0])
    assert np.allclose(product_state([0, 1], [1, 0]), [0, 0, 1, 0])
    with pytest.raises(ValueError):
        check_state(np.array([1.0, 1.0]))


def test_reduced_density_of_product():
    reg = register(2)
    a = np.array([0.6, 0.8j])
    psi = product_state([1, 0], a)
    rho = reduced_density(psi, reg, [1])
    assert np.allclose(rho, np.outer(a, a.conj()))


def test_restrict_selects_block():
    reg = register(2)
    u = np.kron(np.diag([1, -1]), np.array([[0, 1], [1, 0]]))
    assert np.allclose(restrict(u, reg, {0: 1}), -np.array([[0, 1], [1, 0]]))
    assert math.isclose(abs(np.linalg.det(restrict(u, reg, {1: 0}))), 0.0)
