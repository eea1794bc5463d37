"""Generator chains against the free-matrix quadrature oracle."""

import numpy as np
import pytest

from metaplab.metaplectic import (
    apply,
    random_applicable_matrix,
    apply_free_quadrature,
    apply_quadrature,
    conv_chirp,
    dense_matrix,
    generator_decompose,
)
from metaplab.signals import (
    GridError,
    default_grid,
    fourier,
    gaussian,
    hermite,
    smooth_noise,
    tensor,
    conjugate,
)
from metaplab.symplectic import (
    D_L,
    QuadraticHamiltonian,
    SymplecticMatrix,
    V_C,
    hamiltonian_flow,
    random_generator_chain_matrix,
    standard_J,
    stft_matrix,
    tau_matrix,
)


def cosine(u, v) -> float:
    nu = np.linalg.norm(u.ravel())
    nv = np.linalg.norm(v.ravel())
    return abs(np.vdot(u.ravel(), v.ravel())) / (nu * nv)


def test_decompose_elementary():
    chain = generator_decompose(SymplecticMatrix(standard_J(1)))
    assert [g.tag for g in chain.generators] == ["fourier"]
    chain = generator_decompose(SymplecticMatrix(D_L(1.7)))
    assert [g.tag for g in chain.generators] == ["rescale"]
    chain = generator_decompose(SymplecticMatrix(V_C(0.6)))
    assert [g.tag for g in chain.generators] == ["chirp"]


def test_decompose_product_error_small(rng):
    for n in (1, 2):
        for _ in range(50):
            A = random_generator_chain_matrix(rng, n)
            chain = generator_decompose(A)
            assert len(chain) <= 6
            assert np.max(np.abs(chain.matrix() - A.mat)) <= 1e-10


def test_decompose_special_matrices():
    for A in (tau_matrix(0.0), tau_matrix(0.25), tau_matrix(0.5), stft_matrix()):
        chain = generator_decompose(A)
        assert np.max(np.abs(chain.matrix() - A.mat)) <= 1e-12


def test_free_quadrature_reduces_to_fourier(grid256, phi, rng):
    f = smooth_noise(grid256, rng)
    out = apply_free_quadrature(SymplecticMatrix(standard_J(1)), f)
    want = fourier(f)
    assert np.max(np.abs(out.values - want.values)) <= 1e-10


def test_apply_identity_and_J(grid256, phi):
    out = apply(SymplecticMatrix(np.eye(2)), phi)
    assert np.max(np.abs(out.values - phi.values)) == 0.0
    out = apply(SymplecticMatrix(standard_J(1)), phi)
    assert np.max(np.abs(out.values - phi.values)) <= 1e-12


def test_apply_vs_quadrature_free_matrices(grid256, rng):
    f = smooth_noise(grid256, rng)
    shear = SymplecticMatrix(np.array([[1.0, 1.0], [0.0, 1.0]]))
    tilted = SymplecticMatrix(np.array([[0.6, 1.0], [-1.0, 0.0]]))
    for A in (shear, tilted):
        u = apply(A, f).values
        v = apply_free_quadrature(A, f).values
        assert cosine(u, v) >= 1 - 1e-9
        assert abs(np.linalg.norm(u) - np.linalg.norm(v)) <= 1e-7 * np.linalg.norm(v)


def test_apply_vs_quadrature_random_chains(grid256, rng):
    f = smooth_noise(grid256, rng)
    for _ in range(10):
        A = random_applicable_matrix(rng, 1, grid256.axes)
        u = apply(A, f).values
        v = apply_quadrature(A, f).values
        assert cosine(u, v) >= 1 - 1e-7


def test_apply_unitary_on_corpus(grid256, rng):
    sigs = [gaussian(grid256), hermite(grid256, 4), smooth_noise(grid256, rng)]
    for _ in range(25):
        A = random_applicable_matrix(rng, 1, grid256.axes)
        for f in sigs:
            out = apply(A, f)
            assert abs(out.norm() - f.norm()) <= 1e-8 * f.norm()


def sample_product_pair(rng, axes):
    # the product of two representable matrices need not be representable:
    # resample until its own chain passes the guards
    from metaplab.metaplectic import _chain_stress, _support_stress

    while True:
        A1 = random_applicable_matrix(rng, 1, axes)
        A2 = random_applicable_matrix(rng, 1, axes)
        try:
            chain = generator_decompose(A1 @ A2, axes)
        except Exception:
            continue
        if _chain_stress(chain, axes) <= 1.0 and _support_stress(chain) <= 0.95:
            return A1, A2


def test_apply_homomorphism_up_to_phase(grid256, rng):
    f = smooth_noise(grid256, rng)
    for _ in range(10):
        A1, A2 = sample_product_pair(rng, grid256.axes)
        u = apply(A1 @ A2, f).values
        v = apply(A1, apply(A2, f)).values
        assert cosine(u, v) >= 1 - 1e-7


def test_apply_field_chain_unitary(grid256, rng):
    f = gaussian(grid256)
    g = smooth_noise(grid256, rng)
    F = tensor(f, conjugate(g))
    axes = (F.x_axis, F.xi_axis)
    for _ in range(5):
        A = random_applicable_matrix(rng, 2, axes)
        out = apply(A, F)
        assert abs(out.norm() - F.norm()) <= 1e-8 * F.norm()


def test_apply_field_vs_quadrature(rng):
    grid = default_grid(64)
    f = gaussian(grid)
    g = gaussian(grid)
    F = tensor(f, conjugate(g))
    axes = (F.x_axis, F.xi_axis)
    for _ in range(4):
        A = random_applicable_matrix(rng, 2, axes)
        u = apply(A, F).values
        v = apply_quadrature(A, F).values
        assert cosine(u, v) >= 1 - 1e-7


def test_conv_chirp_paths_agree(grid256, rng):
    f = smooth_noise(grid256, rng)
    out0 = conv_chirp(0.0, f)
    assert np.max(np.abs(out0.values - f.values)) <= 1e-12
    u = conv_chirp(1.0, f, path="multiplier").values
    v = conv_chirp(1.0, f, path="direct").values
    assert cosine(u, v) >= 1 - 1e-8
    assert abs(np.linalg.norm(v) - np.linalg.norm(f.values)) <= 1e-8 * np.linalg.norm(f.values)


def test_conv_chirp_matches_shear_matrix(grid256, rng):
    # mu(V_C^{-T}) for C = -4 pi t is the free-particle propagator matrix
    f = smooth_noise(grid256, rng)
    t = 0.02
    A = SymplecticMatrix(np.array([[1.0, 4.0 * np.pi * t], [0.0, 1.0]]))
    u = apply(A, f).values
    v = conv_chirp(-4.0 * np.pi * t, f).values
    assert cosine(u, v) >= 1 - 1e-10


def test_small_and_quarter_rotations(grid256, phi):
    # small rotations go through the chirp sandwich without tripping guards
    h = QuadraticHamiltonian.harmonic()
    for t in (0.05, 0.3, np.pi / 2, 2.0):
        chi = hamiltonian_flow(h, t)
        out = apply(chi, phi)
        assert abs(out.norm() - phi.norm()) <= 1e-8
        # phi is rotation invariant up to phase
        assert cosine(out.values, phi.values) >= 1 - 1e-8


def test_dense_matrix_consistency(grid256, rng):
    f = smooth_noise(grid256, rng)
    A = random_applicable_matrix(rng, 1, grid256.axes)
    M = dense_matrix(A, grid256.axes[0])
    direct = apply(A, f).values
    assert np.max(np.abs(M @ f.values - direct)) <= 1e-9


def test_dimension_mismatch_rejected(grid256, phi):
    with pytest.raises(GridError):
        apply(tau_matrix(0.5), phi)
