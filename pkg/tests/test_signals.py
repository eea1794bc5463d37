"""Grid transforms against brute-force quadrature of the defining integrals."""

import numpy as np
import pytest

from metaplab.signals import (
    Axis,
    GridError,
    GridSignal,
    PhaseSpaceField,
    SamplingError,
    chirp_multiply,
    conjugate,
    default_grid,
    eval_trig,
    fourier,
    gaussian,
    hermite,
    inverse_fourier,
    partial_fourier_2,
    rescale,
    self_dual_axis,
    smooth_noise,
    tensor,
    tf_shift,
    upsample2,
)


def dft_oracle(sig: GridSignal) -> np.ndarray:
    """O(N^2) Riemann sum of the transform integral f(t) e^{-2 pi i xi t} dt."""
    ax = sig.grid.axes[0]
    t = ax.points()
    xi = ax.freqs()
    return ax.step * np.exp(-2j * np.pi * np.outer(xi, t)) @ sig.values


def test_default_grid_is_self_dual(grid256):
    ax = grid256.axes[0]
    assert ax.n == 256 and ax.half_width == pytest.approx(8.0)
    assert ax.is_self_dual
    assert np.allclose(ax.points(), ax.freqs())


def test_fourier_matches_quadrature_oracle(grid256, rng):
    for sig in (gaussian(grid256), hermite(grid256, 3), smooth_noise(grid256, rng)):
        got = fourier(sig).values
        want = dft_oracle(sig)
        assert np.max(np.abs(got - want)) <= 1e-10 * np.max(np.abs(want))


def test_fourier_oracle_at_512():
    grid = default_grid(512)
    sig = hermite(grid, 3)
    got = fourier(sig).values
    want = dft_oracle(sig)
    assert np.max(np.abs(got - want)) <= 1e-10 * np.max(np.abs(want))


def test_gaussian_is_fourier_fixed_point(phi):
    assert np.max(np.abs(fourier(phi).values - phi.values)) <= 1e-12


def test_hermite_eigenvalues(grid256):
    for n in range(6):
        h = hermite(grid256, n)
        got = fourier(h).values
        assert np.max(np.abs(got - (-1j) ** n * h.values)) <= 1e-10


def test_impulse_transforms_to_constant(grid256):
    vals = np.zeros(256)
    vals[128] = 1.0
    f = GridSignal(grid256, vals)
    fh = fourier(f).values
    assert np.max(np.abs(fh - grid256.axes[0].step)) <= 1e-14


def test_parseval_and_inverse(grid256, rng):
    f = smooth_noise(grid256, rng)
    fh = fourier(f)
    assert abs(fh.norm() - f.norm()) <= 1e-12 * f.norm()
    back = inverse_fourier(fh)
    assert np.max(np.abs(back.values - f.values)) <= 1e-12


def test_fourier_quarter_period(grid256, rng):
    # fourier^2 is the reflection, fourier^4 the identity
    f = smooth_noise(grid256, rng)
    twice = fourier(fourier(f)).values
    refl = f.values[(-np.arange(256)) % 256]
    assert np.max(np.abs(twice - refl)) <= 1e-12
    four = fourier(fourier(fourier(fourier(f)))).values
    assert np.max(np.abs(four - f.values)) <= 1e-12


def test_translation_modulation_exchange(grid256, rng):
    f = smooth_noise(grid256, rng)
    x0 = 1.0
    shifted = tf_shift(f, (x0, 0.0))
    lhs = fourier(shifted).values
    xi = grid256.axes[0].freqs()
    rhs = np.exp(-2j * np.pi * xi * x0) * fourier(f).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_partial_fourier_on_tensor(grid256, rng):
    f = gaussian(grid256)
    g = smooth_noise(grid256, rng)
    F = tensor(f, g)
    got = partial_fourier_2(F).values
    want = np.outer(f.values, fourier(g).values)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_partial_fourier_direct_quadrature():
    grid = default_grid(64)
    ax = grid.axes[0]
    rng = np.random.default_rng(7)
    vals = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    F = PhaseSpaceField(ax, ax, vals)
    got = partial_fourier_2(F).values
    E = ax.step * np.exp(-2j * np.pi * np.outer(ax.points(), ax.freqs()))
    want = vals @ E
    assert np.max(np.abs(got - want)) <= 1e-10 * np.max(np.abs(want))


def test_chirp_multiply_basics(grid256, phi):
    same = chirp_multiply(phi, 0.0)
    assert np.array_equal(same.values, phi.values)
    out = chirp_multiply(phi, 1.0)
    t = grid256.axes[0].points()
    assert np.max(np.abs(out.values - np.exp(1j * np.pi * t ** 2) * phi.values)) == 0.0
    assert np.max(np.abs(np.abs(out.values) - np.abs(phi.values))) <= 1e-15


def test_chirp_guard_trips(grid256, phi):
    with pytest.raises(SamplingError):
        chirp_multiply(phi, 1.5)


def test_rescale_identity_and_reflection(grid256, phi):
    assert np.max(np.abs(rescale(phi, 1.0).values - phi.values)) == 0.0
    refl = rescale(phi, -1.0)
    assert np.max(np.abs(refl.values - phi.values)) <= 1e-12  # phi is even


def test_rescale_gaussian_closed_form(grid256, phi):
    out = rescale(phi, 2.0)
    t = grid256.axes[0].points()
    want = np.sqrt(2.0) * 2.0 ** 0.25 * np.exp(-np.pi * (2.0 * t) ** 2)
    assert np.max(np.abs(out.values - want)) <= 1e-10
    assert abs(out.norm() - phi.norm()) <= 1e-8


def test_rescale_2d_linear_map():
    ax = self_dual_axis(64)
    x = ax.points()
    X, Y = np.meshgrid(x, x, indexing="ij")
    F = PhaseSpaceField(ax, ax, np.exp(-np.pi * (X ** 2 + Y ** 2)) * (1 + 0.3 * X))
    L = np.array([[1.1, 0.4], [-0.3, 0.8]])
    out = rescale(F, L)
    Xp = L[0, 0] * X + L[0, 1] * Y
    Yp = L[1, 0] * X + L[1, 1] * Y
    want = np.sqrt(abs(np.linalg.det(L))) * np.exp(-np.pi * (Xp ** 2 + Yp ** 2)) * (
        1 + 0.3 * Xp
    )
    assert np.max(np.abs(out.values - want)) <= 1e-7


def test_tf_shift_unitary_and_commutation(grid256, rng):
    f = smooth_noise(grid256, rng)
    z = (1.0, 2.0)
    out = tf_shift(f, z)
    assert abs(out.norm() - f.norm()) <= 1e-13
    assert not out.off_grid_shift
    # pi(z) pi(w) = exp(-2 pi i x . xi') pi(z + w)
    w = (0.5, -1.5)
    lhs = tf_shift(tf_shift(f, w), z).values
    rhs = np.exp(-2j * np.pi * z[0] * w[1]) * tf_shift(f, (z[0] + w[0], z[1] + w[1])).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_tf_shift_off_grid_flag(grid256, phi):
    out = tf_shift(phi, (0.01, 0.0))
    assert out.off_grid_shift
    assert abs(out.norm() - phi.norm()) <= 1e-12


def test_tensor_norm_and_conjugate(grid256, rng):
    f = smooth_noise(grid256, rng)
    g = smooth_noise(grid256, rng)
    F = tensor(f, conjugate(g))
    assert abs(F.norm() - f.norm() * g.norm()) <= 1e-12
    i, j = 10, 200
    assert F.values[i, j] == pytest.approx(f.values[i] * np.conj(g.values[j]))


def test_eval_trig_and_upsample(grid256, phi):
    ax = grid256.axes[0]
    pts = np.array([0.123, -3.21, 5.05])
    got = eval_trig(phi.values, 0, ax, pts)
    want = 2.0 ** 0.25 * np.exp(-np.pi * pts ** 2)
    assert np.max(np.abs(got - want)) <= 1e-12
    fine = upsample2(phi.values, 0, ax)
    tfine = -ax.half_width + ax.step / 2 * np.arange(2 * ax.n)
    assert np.max(np.abs(fine - 2.0 ** 0.25 * np.exp(-np.pi * tfine ** 2))) <= 1e-12


def test_grid_validation():
    with pytest.raises(GridError):
        Axis(255, 8.0)
    with pytest.raises(GridError):
        Axis(256, -1.0)
    with pytest.raises(GridError):
        GridSignal(default_grid(64), np.zeros(65))
