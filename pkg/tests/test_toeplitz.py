import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import btk
from btk.basis import kernel_norm_sq
from btk.errors import DomainError, ParameterError, PSDViolationError
from btk.jacobi import jacobi_eigvalsh
from btk.measures import (
    AtomicMeasure,
    GridDensityMeasure,
    indicator_density,
    power_density,
    zero_measure,
)
from btk.quadrature import simpson_doubling
from btk.toeplitz import (
    SpectrumReport,
    ToeplitzMatrix,
    assemble_toeplitz,
    berezin_operator,
    schatten_norm,
    spectrum,
    spectrum_to_json,
)


def _random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


# --- Jacobi eigenvalue solver ----------------------------------------------


def test_jacobi_matches_lapack_oracle(rng):
    for n in (1, 2, 3, 8, 16, 33):
        a = _random_hermitian(rng, n)
        got = jacobi_eigvalsh(a)
        want = np.linalg.eigvalsh(a)
        np.testing.assert_allclose(got, want, atol=1e-11 * max(np.abs(want)))


def test_jacobi_trivial_matrices():
    assert jacobi_eigvalsh(np.zeros((3, 3), dtype=complex)).tolist() == [0, 0, 0]
    np.testing.assert_allclose(
        jacobi_eigvalsh(np.diag([3.0, 1.0, 2.0]).astype(complex)), [1, 2, 3]
    )
    np.testing.assert_allclose(jacobi_eigvalsh(np.array([[5.0 + 0j]])), [5.0])


def test_jacobi_real_symmetric(rng):
    a = _random_hermitian(rng, 12).real.astype(complex)
    np.testing.assert_allclose(
        jacobi_eigvalsh(a), np.linalg.eigvalsh(a), atol=1e-11
    )


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_jacobi_property_random_seeds(seed):
    rng = np.random.default_rng(seed)
    a = _random_hermitian(rng, 5)
    got = jacobi_eigvalsh(a)
    want = np.linalg.eigvalsh(a)
    np.testing.assert_allclose(got, want, atol=1e-10 * max(1.0, np.max(np.abs(want))))


# --- assembly ---------------------------------------------------------------


def test_area_measure_gives_identity(bt400):
    tm = assemble_toeplitz(bt400, indicator_density(0.0, 1.0), 128)
    assert tm.structure == "diagonal"
    np.testing.assert_allclose(tm.diag, np.ones(128), rtol=1e-8)


def test_radial_dense_oracle_matches_diagonal(bt400):
    mu = indicator_density(0.2, 0.6)
    dim = 48
    fast = assemble_toeplitz(bt400, mu, dim)
    dense = assemble_toeplitz(bt400, mu, dim, structure="dense")
    m = dense.dense
    off = m - np.diag(np.diag(m))
    assert np.max(np.abs(off)) < 1e-10 * np.max(np.abs(np.diag(m)))
    np.testing.assert_allclose(np.diag(m).real, fast.diag, rtol=1e-8)


def test_rank_one_atom_exact_eigenvalue(bt400, w1):
    xi, mass = 0.4 * np.exp(1j * np.pi / 7), 0.7
    tm = assemble_toeplitz(bt400, AtomicMeasure([xi], [mass]), 64)
    assert tm.structure == "finite_rank"
    rep = spectrum(tm)
    expect = mass * np.exp(
        float(w1.log_weight(abs(xi))) + kernel_norm_sq(bt400, xi)
    )
    assert rep.eigenvalues[0] == pytest.approx(expect, rel=1e-10)
    assert np.all(rep.eigenvalues[1:] == 0.0)


def test_atomic_dense_truncation_converges(bt400):
    # truncated dense eigenvalues approach the exact finite-rank spectrum
    mu = AtomicMeasure([0.3, -0.2 + 0.25j, 0.1j], [1.0, 0.5, 0.25])
    exact = spectrum(assemble_toeplitz(bt400, mu, 64)).eigenvalues[:3]
    gaps = []
    for dim in (16, 32, 64):
        tm = assemble_toeplitz(bt400, mu, dim, structure="dense")
        ev = spectrum(tm).eigenvalues[:3]
        gaps.append(np.max(np.abs(ev - exact) / exact))
    assert gaps[-1] <= gaps[0]
    assert gaps[-1] < 1e-8


def test_linearity_for_atomic_measures(bt400):
    a = AtomicMeasure([0.3], [1.0])
    b = AtomicMeasure([-0.4j], [0.5])
    ab = AtomicMeasure([0.3, -0.4j], [1.0, 0.5])
    da = assemble_toeplitz(bt400, a, 32, structure="dense").dense
    db = assemble_toeplitz(bt400, b, 32, structure="dense").dense
    dab = assemble_toeplitz(bt400, ab, 32, structure="dense").dense
    np.testing.assert_allclose(dab, da + db, atol=1e-14 * np.max(np.abs(dab)))


def test_entries_hermitian(bt400):
    mu = GridDensityMeasure.area_measure(nr=10, ntheta=12, r_outer=0.6)
    m = assemble_toeplitz(bt400, mu, 24).entries()
    np.testing.assert_allclose(m, m.conj().T, atol=1e-15)


def test_trace_identity_radial(bt400, w1):
    # trace = int sum_{n<dim} |e_n|^2 omega d mu, by linear-space quadrature
    mu = indicator_density(0.2, 0.6)
    dim = 32
    tm = assemble_toeplitz(bt400, mu, dim)
    h = np.exp(bt400.log_h[:dim])

    def integrand(r):
        core = np.sum(
            r[:, None] ** (2 * np.arange(dim))[None, :] / h[None, :], axis=1
        )
        return 2.0 * r * np.exp(w1.log_weight(r)) * core

    oracle = simpson_doubling(integrand, 0.2, 0.6, tol=1e-10)
    assert tm.matrix_trace() == pytest.approx(oracle, rel=1e-6)
    assert spectrum(tm).trace == pytest.approx(oracle, rel=1e-6)


def test_zero_measure_assembles_to_zero(bt400):
    tm = assemble_toeplitz(bt400, zero_measure(), 16)
    assert np.all(tm.diag == 0.0)
    rep = spectrum(tm)
    assert rep.operator_norm == 0.0
    assert schatten_norm(rep, 1.0) == 0.0


def test_assembly_validation(bt400):
    with pytest.raises(DomainError):
        assemble_toeplitz(bt400, indicator_density(0.0, 1.0), 402)
    with pytest.raises(DomainError):
        assemble_toeplitz(bt400, indicator_density(0.0, 1.0), 0)
    with pytest.raises(ParameterError):
        assemble_toeplitz(bt400, indicator_density(0.0, 1.0), 8, structure="bogus")


# --- spectra and Schatten norms --------------------------------------------


def _report(evs):
    evs = np.sort(np.asarray(evs, dtype=float))[::-1]
    return SpectrumReport(
        eigenvalues=evs, dim=len(evs), structure="diagonal",
        clip_magnitude=0.0, tail_estimate=0.0,
    )


def test_schatten_flat_spectrum():
    rep = _report(np.ones(100))
    for p in (0.5, 1.0, 2.0):
        assert schatten_norm(rep, p) == pytest.approx(100.0 ** (1.0 / p))


def test_schatten_geometric_spectrum():
    d = 30
    rep = _report(2.0 ** -np.arange(d))
    assert schatten_norm(rep, 1.0) == pytest.approx(2.0 * (1.0 - 2.0**-d))
    # p -> infinity proxy: large p approaches the operator norm
    assert schatten_norm(rep, 64.0) == pytest.approx(rep.operator_norm, rel=0.05)


def test_schatten_three_four_five():
    rep = _report([3.0, 4.0])
    assert schatten_norm(rep, 2.0) == pytest.approx(5.0)


def test_schatten_monotone_in_p(rng):
    rep = _report(rng.random(20))
    ps = (0.5, 1.0, 2.0, 4.0, 16.0)
    vals = [schatten_norm(rep, p) for p in ps]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] >= rep.operator_norm


def test_schatten_validation():
    with pytest.raises(ParameterError):
        schatten_norm(_report([1.0]), 0.0)


def test_spectrum_clips_roundoff_negatives(bt400):
    tm = ToeplitzMatrix(bt400, 2, "dense",
                        dense=np.diag([1.0, -1e-12]).astype(complex))
    rep = spectrum(tm)
    assert rep.clip_magnitude == pytest.approx(1e-12)
    assert np.all(rep.eigenvalues >= 0.0)


def test_spectrum_rejects_indefinite(bt400):
    tm = ToeplitzMatrix(bt400, 2, "dense",
                        dense=np.diag([1.0, -1e-3]).astype(complex))
    with pytest.raises(PSDViolationError):
        spectrum(tm)


def test_tail_flag_behavior():
    flat = _report(np.ones(10))
    assert flat.tail_flag(1.0) is False  # tail_estimate = 0 here
    heavy = SpectrumReport(
        eigenvalues=np.ones(10), dim=10, structure="diagonal",
        clip_magnitude=0.0, tail_estimate=10.0,
    )
    assert heavy.tail_flag(1.0) is True


def test_spectrum_to_json_schema(bt400):
    rep = spectrum(assemble_toeplitz(bt400, indicator_density(0.0, 0.5), 8))
    payload = spectrum_to_json(rep)
    assert payload["dim"] == 8
    assert set(payload["schatten_norms"]) == {"0.5", "1.0", "2.0"}
    assert len(payload["eigenvalues"]) == 8


# --- Berezin of the operator ------------------------------------------------


def test_berezin_operator_identity(bt400):
    tm = assemble_toeplitz(bt400, indicator_density(0.0, 1.0), 256)
    for z in (0.0, 0.3, 0.5 * np.exp(2.0j)):
        assert berezin_operator(bt400, tm, z) == pytest.approx(1.0, rel=1e-8)


def test_berezin_operator_matches_measure_for_atoms(bt400):
    from btk.measures import berezin_measure

    mu = AtomicMeasure([0.3, -0.15 + 0.2j], [1.0, 0.6])
    tm = assemble_toeplitz(bt400, mu, 256)
    for z in (0.1, 0.4 * np.exp(0.9j), -0.5j):
        assert berezin_operator(bt400, tm, z) == pytest.approx(
            berezin_measure(bt400, mu, z), rel=1e-10
        )


def test_berezin_operator_bounded_by_norm(bt400):
    mu = power_density(2.0, (0.0, 0.7))
    tm = assemble_toeplitz(bt400, mu, 128)
    lam1 = spectrum(tm).operator_norm
    for z in (0.0, 0.25, 0.6 * np.exp(1j)):
        val = berezin_operator(bt400, tm, z)
        assert 0.0 <= val <= lam1 * (1.0 + 1e-12)


def test_berezin_operator_domain(bt400):
    tm = assemble_toeplitz(bt400, indicator_density(0.0, 0.5), 8)
    with pytest.raises(DomainError):
        berezin_operator(bt400, tm, 1.0)
