import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import btk
from btk.basis import (
    check_submeanvalue,
    kernel,
    kernel_at_points,
    kernel_norm_sq,
    kernel_norm_sq_many,
    log_normalized_kernel_sq_at,
    normalized_kernel,
)
from btk.errors import DomainError, TruncationError
from btk.quadrature import unit_disk_nodes


@pytest.fixture(scope="module")
def bt60(w1):
    return btk.build_basis_table(w1, 60)


def _kernel_value(bt, z, zeta):
    la, ph = kernel(bt, z, zeta)
    return np.exp(la) * np.exp(1j * ph)


def test_kernel_at_origin(bt400):
    la, ph = kernel(bt400, 0.0, 0.37 + 0.2j)
    assert la == pytest.approx(-float(bt400.log_h[0]))
    assert ph == 0.0


def test_kernel_hermitian_symmetry(bt400, rng):
    zs = 0.8 * (rng.random(8) * np.exp(2j * np.pi * rng.random(8)))
    ws = 0.8 * (rng.random(8) * np.exp(2j * np.pi * rng.random(8)))
    for z, zeta in zip(zs, ws):
        a = _kernel_value(bt400, z, zeta)
        b = _kernel_value(bt400, zeta, z)
        assert a == pytest.approx(np.conj(b), rel=1e-12)


def test_kernel_at_points_matches_scalar(bt400):
    z = 0.5 * np.exp(0.7j)
    pts = np.array([0.1, -0.3 + 0.4j, 0.0, 0.6j, 0.72 * np.exp(2.1j)])
    la, ph = kernel_at_points(bt400, z, pts)
    for k, p in enumerate(pts):
        la_s, ph_s = kernel(bt400, z, p)
        assert la[k] == pytest.approx(la_s, rel=1e-12, abs=1e-12)
        assert np.exp(1j * ph[k]) == pytest.approx(np.exp(1j * ph_s), rel=1e-10)


def test_kernel_norm_sq_many_matches_scalar(bt400):
    radii = np.array([0.0, 0.2, 0.55, 0.9])
    many = kernel_norm_sq_many(bt400, radii)
    for k, r in enumerate(radii):
        assert many[k] == pytest.approx(kernel_norm_sq(bt400, r), rel=1e-13)


def test_norm_sq_equals_diagonal_kernel_value(bt400):
    z = 0.61 * np.exp(1.3j)
    la, ph = kernel(bt400, z, z)
    assert la == pytest.approx(kernel_norm_sq(bt400, z), rel=1e-12)
    assert abs(ph) < 1e-10  # K_z(z) = ||K_z||^2 is real positive


def test_truncation_error_near_boundary(w1):
    bt = btk.build_basis_table(w1, 40)
    with pytest.raises(TruncationError):
        kernel_norm_sq(bt, 0.97)
    with pytest.raises(TruncationError):
        kernel(bt, 0.97, 0.97)
    with pytest.raises(TruncationError):
        kernel_at_points(bt, 0.97, np.array([0.9, 0.97]))


def test_domain_validation(bt400):
    with pytest.raises(DomainError):
        kernel(bt400, 1.0, 0.2)
    with pytest.raises(DomainError):
        kernel_norm_sq(bt400, 1.2)
    with pytest.raises(DomainError):
        kernel_at_points(bt400, 0.2, np.array([1.0]))


def test_reproducing_property_by_quadrature(bt60, w1):
    # <f, K_z>_omega = f(z) for f in the span; f = e_3 here.  The angular rule
    # in unit_disk_nodes (256 nodes) is exact for the phase factors of degree
    # <= 60 and the weight kills the truncation radius r_cap.
    z = 0.35 * np.exp(0.4j)
    f = lambda pts: pts**3 / np.exp(0.5 * bt60.log_h[3])
    pts, wts = unit_disk_nodes(0.9995, n_r=512, n_t=256)
    la, ph = kernel_at_points(bt60, z, pts)
    kz = np.exp(la) * np.exp(1j * ph)
    inner = np.sum(wts * f(pts) * np.conj(kz) * np.exp(w1.log_weight(np.abs(pts))))
    assert complex(inner) == pytest.approx(complex(f(np.array([z]))[0]), rel=1e-6)


def test_parseval_by_quadrature(bt60, w1):
    # int |K_z|^2 omega dA = K_z(z) for the truncated kernel
    z = 0.4 * np.exp(-0.9j)
    pts, wts = unit_disk_nodes(0.9995, n_r=512, n_t=256)
    la, _ = kernel_at_points(bt60, z, pts)
    integral = np.sum(wts * np.exp(2.0 * la + w1.log_weight(np.abs(pts))))
    assert float(integral) == pytest.approx(
        np.exp(kernel_norm_sq(bt60, z)), rel=1e-6
    )


def test_normalized_kernel_cauchy_schwarz(bt400, rng):
    for _ in range(20):
        z = 0.85 * rng.random() * np.exp(2j * np.pi * rng.random())
        zeta = 0.85 * rng.random() * np.exp(2j * np.pi * rng.random())
        la, _ = normalized_kernel(bt400, z, zeta)
        ratio = np.exp(la - 0.5 * kernel_norm_sq(bt400, zeta))
        assert ratio <= 1.0 + 1e-12


def test_log_normalized_kernel_sq_at_self(bt400):
    z = 0.44 * np.exp(2.2j)
    val = log_normalized_kernel_sq_at(bt400, z, np.array([z]))[0]
    assert val == pytest.approx(kernel_norm_sq(bt400, z), rel=1e-12)


def test_submeanvalue_constant_is_exact(bt400, delta1):
    r = check_submeanvalue(bt400, [1.0], 0.3 + 0.2j, p=2.0, beta=0.0, delta=delta1)
    assert r == pytest.approx(1.0, abs=1e-10)


def test_submeanvalue_subharmonic_below_one(bt400, delta1):
    # |f|^p is subharmonic for holomorphic f, so the center value cannot
    # exceed the areal average (beta = 0)
    for coeffs in ([1.0, 2.0, 0.0, -1.0], [0.5, -1j, 0.25]):
        for z in (0.1, 0.45 * np.exp(1j), 0.7 * np.exp(-2j)):
            r = check_submeanvalue(bt400, coeffs, z, p=2.0, beta=0.0, delta=delta1)
            assert r <= 1.0 + 1e-9


def test_submeanvalue_weighted_family_capped(bt400, delta1):
    # z^k family with beta = 1: the ratio stays near 1 at this small delta
    worst = 0.0
    for k in range(0, 21, 5):
        coeffs = [0.0] * k + [1.0]
        for z in (0.3, 0.6 * np.exp(0.5j)):
            r = check_submeanvalue(bt400, coeffs, z, p=2.0, beta=1.0, delta=delta1)
            worst = max(worst, r)
    assert 0.0 < worst < 2.0


@settings(max_examples=30, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=0.8),
    st.floats(min_value=0.0, max_value=2 * np.pi),
    st.floats(min_value=0.0, max_value=0.8),
    st.floats(min_value=0.0, max_value=2 * np.pi),
)
def test_kernel_symmetry_property(r1, t1, r2, t2):
    w = btk.make_exponential_weight(1.0)
    bt = _shared_table(w)
    z = r1 * np.exp(1j * t1)
    zeta = r2 * np.exp(1j * t2)
    a = _kernel_value(bt, z, zeta)
    b = _kernel_value(bt, zeta, z)
    assert a == pytest.approx(np.conj(b), rel=1e-10)


_TABLE_CACHE = {}


def _shared_table(w):
    key = w.fingerprint()
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = btk.build_basis_table(w, 200)
    return _TABLE_CACHE[key]
