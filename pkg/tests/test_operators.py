import numpy as np
import pytest

import varpro as vp
from varpro.linalg import adjoint_gap
from varpro.operators import (
    GaussianBlur1D,
    GaussianBlur2D,
    PeriodicGaussianBlur1D,
    RegOperator,
    bccb_eigenvalues,
    dgaussian_psf_2d,
    gaussian_column_1d,
    gaussian_psf_2d,
    laplacian_apply,
    toeplitz_blur_matrix,
)


# -- 1-D kernel column ----------------------------------------------------------

def test_column_sigma_zero_is_delta():
    np.testing.assert_array_equal(gaussian_column_1d(0.0, 4), [1.0, 0.0, 0.0, 0.0])


def test_column_n2_closed_form():
    sigma = 1.3
    a1 = np.exp(-1.0 / (2 * sigma**2))
    np.testing.assert_allclose(
        gaussian_column_1d(sigma, 2), [1 / (1 + a1), a1 / (1 + a1)], rtol=1e-15
    )


def test_column_wide_limit_uniform():
    col = gaussian_column_1d(1e6, 4)
    np.testing.assert_allclose(col, 0.25, atol=1e-9)


def test_column_even_in_sigma():
    for sigma in (0.3, 1.7, 4.0):
        np.testing.assert_array_equal(
            gaussian_column_1d(sigma, 12), gaussian_column_1d(-sigma, 12)
        )


def test_column_sums_to_one():
    for sigma in (0.0, 0.5, 2.0, 50.0):
        assert abs(gaussian_column_1d(sigma, 16).sum() - 1.0) < 1e-14


# -- Toeplitz apply --------------------------------------------------------------

def test_toeplitz_sigma_zero_identity():
    x = np.random.default_rng(0).standard_normal(8)
    np.testing.assert_array_equal(vp.toeplitz_apply_1d(0.0, x), x)


def test_toeplitz_n2_matches_display():
    sigma = 0.9
    a1 = np.exp(-1.0 / (2 * sigma**2))
    A = np.array([[1.0, a1], [a1, 1.0]]) / (1 + a1)
    x = np.array([0.7, -1.2])
    np.testing.assert_allclose(vp.toeplitz_apply_1d(sigma, x), A @ x, rtol=1e-15)


def test_toeplitz_matches_dense_assembly():
    rng = np.random.default_rng(1)
    sigma = rng.uniform(0.5, 3.0)
    x = rng.standard_normal(16)
    col = gaussian_column_1d(sigma, 16)
    dense = np.array([[col[abs(i - j)] for j in range(16)] for i in range(16)])
    np.testing.assert_allclose(vp.toeplitz_apply_1d(sigma, x), dense @ x, atol=1e-13)


# -- 2-D PSF and BCCB ------------------------------------------------------------

def test_psf_concentration_limit():
    psf = gaussian_psf_2d(1e-8, 8)
    assert psf[4, 4] > 1.0 - 1e-12


def test_psf_normalized():
    for y in (0.5, 3.0, 20.0):
        assert abs(gaussian_psf_2d(y, 16).sum() - 1.0) < 1e-14


def test_psf_rejects_nonpositive_width():
    with pytest.raises(ValueError):
        gaussian_psf_2d(0.0, 8)
    with pytest.raises(ValueError):
        gaussian_psf_2d(-1.0, 8)


def test_psf_symmetric_about_center():
    psf = gaussian_psf_2d(2.2, 9)
    k = 9 // 2
    for di in range(-3, 4):
        for dj in range(-3, 4):
            assert psf[k + di, k + dj] == pytest.approx(psf[k - di, k - dj], rel=1e-14)


def test_bccb_delta_psf_is_identity():
    n = 8
    psf = np.zeros((n, n))
    psf[n // 2, n // 2] = 1.0
    x = np.random.default_rng(2).standard_normal(n * n)
    np.testing.assert_allclose(vp.bccb_apply(psf, x), x, atol=1e-12)


def test_bccb_preserves_constants():
    psf = gaussian_psf_2d(2.0, 8)
    c = 3.7 * np.ones(64)
    np.testing.assert_allclose(vp.bccb_apply(psf, c), c, rtol=1e-12)


def test_bccb_matches_direct_convolution():
    # direct O(n^4) circular convolution with the centered kernel
    rng = np.random.default_rng(3)
    n = 8
    psf = rng.uniform(0.0, 1.0, size=(n, n))
    psf /= psf.sum()
    x = rng.standard_normal(n * n)
    X = x.reshape(n, n, order="F")
    h = np.roll(psf, (-(n // 2), -(n // 2)), axis=(0, 1))
    out = np.zeros((n, n))
    for u in range(n):
        for v in range(n):
            acc = 0.0
            for p in range(n):
                for q in range(n):
                    acc += X[p, q] * h[(u - p) % n, (v - q) % n]
            out[u, v] = acc
    np.testing.assert_allclose(vp.bccb_apply(psf, x), out.ravel(order="F"), atol=1e-11)


def test_bccb_size_mismatch():
    with pytest.raises(ValueError):
        vp.bccb_apply(np.ones((4, 4)) / 16, np.ones(9))


# -- width derivatives -----------------------------------------------------------

def test_dparam_1d_sigma_zero_is_zero():
    fam = GaussianBlur1D(8)
    x = np.random.default_rng(4).standard_normal(8)
    np.testing.assert_array_equal(fam.apply_dparam([0.0], 0, x), np.zeros(8))


def test_dparam_1d_n2_symbolic():
    sympy = pytest.importorskip("sympy")
    s = sympy.symbols("s", positive=True)
    a1 = sympy.exp(-1 / (2 * s**2))
    A = sympy.Matrix([[1, a1], [a1, 1]]) / (1 + a1)
    dA = A.diff(s)
    dA_fn = sympy.lambdify(s, dA, "numpy")
    fam = GaussianBlur1D(2)
    x = np.array([0.4, -1.1])
    for sigma in (0.7, 1.9):
        expected = np.asarray(dA_fn(sigma), dtype=float) @ x
        np.testing.assert_allclose(fam.apply_dparam([sigma], 0, x), expected, rtol=1e-12)


@pytest.mark.parametrize("family_cls,y0", [
    (GaussianBlur1D, 1.2),
    (PeriodicGaussianBlur1D, 1.2),
    (GaussianBlur2D, 3.0),
])
def test_dparam_matches_finite_differences(family_cls, y0):
    n = 16
    fam = family_cls(n)
    rng = np.random.default_rng(5)
    for _ in range(10):
        y = y0 * rng.uniform(0.5, 1.6)
        x = rng.standard_normal(fam.n)
        h = 1e-5 * max(1.0, abs(y))
        fd = (fam.apply([y + h], x) - fam.apply([y - h], x)) / (2 * h)
        an = fam.apply_dparam([y], 0, x)
        assert np.linalg.norm(an - fd) <= 1e-6 * max(np.linalg.norm(fd), 1e-12)


# -- symmetry / transpose --------------------------------------------------------

def test_toeplitz_symmetry():
    fam = GaussianBlur1D(12)
    rng = np.random.default_rng(6)
    x, z = rng.standard_normal(12), rng.standard_normal(12)
    lhs = fam.apply([1.7], x) @ z
    rhs = x @ fam.apply([1.7], z)
    assert abs(lhs - rhs) < 1e-12 * max(abs(lhs), 1.0)


def test_bccb_transpose_is_reflected_psf():
    n = 8
    rng = np.random.default_rng(7)
    psf = rng.uniform(0.0, 1.0, size=(n, n))
    psf /= psf.sum()
    # reflected PSF about the center: index i -> 2c - i (mod n)
    c = n // 2
    idx = (2 * c - np.arange(n)) % n
    reflected = psf[np.ix_(idx, idx)]
    fam = GaussianBlur2D(n)
    v = rng.standard_normal(n * n)
    lhs = vp.operators.bccb_apply_eigs(np.conj(bccb_eigenvalues(psf)), v)
    rhs = vp.bccb_apply(reflected, v)
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_family_adjoint_consistency():
    for fam, y in (
        (GaussianBlur1D(10), [1.4]),
        (PeriodicGaussianBlur1D(10), [1.4]),
        (GaussianBlur2D(8), [2.5]),
    ):
        op = vp.LinOp(fam.m, fam.n,
                      lambda x, f=fam, yy=y: f.apply(yy, x),
                      lambda v, f=fam, yy=y: f.apply_transpose(yy, v))
        assert adjoint_gap(op, probes=10, seed=1) < 1e-10


# -- constant preservation --------------------------------------------------------

def test_periodic_families_preserve_constants():
    ones1 = np.ones(16)
    fam = PeriodicGaussianBlur1D(16)
    np.testing.assert_allclose(fam.apply([2.3], ones1), ones1, rtol=1e-12)
    fam2 = GaussianBlur2D(16)
    np.testing.assert_allclose(fam2.apply([2.3], np.ones(256)), np.ones(256), rtol=1e-12)


def test_toeplitz_constant_preservation_asymptotic():
    # zero-boundary normalization preserves constants only in the narrow and
    # uniform limits
    ones = np.ones(16)
    near_delta = GaussianBlur1D(16).apply([0.15], ones)
    np.testing.assert_allclose(near_delta, ones, atol=1e-6)
    near_uniform = GaussianBlur1D(16).apply([1e5], ones)
    np.testing.assert_allclose(near_uniform, ones, atol=1e-6)


# -- Laplacian --------------------------------------------------------------------

def test_laplacian_kills_constants():
    np.testing.assert_allclose(laplacian_apply(2.5 * np.ones(64), 8), np.zeros(64), atol=1e-13)


def test_laplacian_unit_pixel_stencil():
    n = 4
    X = np.zeros((n, n))
    X[1, 2] = 1.0
    out = laplacian_apply(X.ravel(order="F"), n).reshape(n, n, order="F")
    assert out[1, 2] == -4.0
    assert out[0, 2] == out[2, 2] == out[1, 1] == out[1, 3] == 1.0
    assert abs(out).sum() == 8.0


def test_laplacian_matches_dense_assembly():
    n = 8
    rng = np.random.default_rng(8)
    x = rng.standard_normal(n * n)
    L = RegOperator.laplacian(n)
    dense = L.to_dense()
    np.testing.assert_allclose(L.apply(x), dense @ x, atol=1e-13)
    # row sums vanish under periodic boundary conditions
    np.testing.assert_allclose(dense.sum(axis=1), 0.0, atol=1e-13)


def test_laplacian_symbols_match_dense_eigs():
    n = 8
    L = RegOperator.laplacian(n)
    dense = L.to_dense()
    eigs = np.sort(np.linalg.eigvalsh(dense))
    sym = np.sort(L.symbols().ravel())
    np.testing.assert_allclose(sym, eigs, atol=1e-10)


def test_reg_operator_validation():
    with pytest.raises(ValueError):
        RegOperator("laplacian", (8,))
    with pytest.raises(ValueError):
        RegOperator("unknown", (8,))
