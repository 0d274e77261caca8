import numpy as np
import pytest

import btk
from btk.errors import DomainError, ParameterError, ResourceError
from btk.lattice import (
    build_lattice,
    certify_lattice,
    count_in_ball,
    lattice_from_json,
    load_lattice,
    partition_separated,
    quasi_distance,
    save_lattice,
)


@pytest.fixture(scope="module")
def lat_tiny(w1, delta1):
    return build_lattice(w1, delta1, 0.3, probe_count=20_000)


def test_quasi_distance_basics(w1):
    z, zeta = 0.3 + 0.1j, -0.2 + 0.4j
    d = quasi_distance(w1, z, zeta)
    assert d > 0.0
    assert d == quasi_distance(w1, zeta, z)
    assert quasi_distance(w1, z, z) == 0.0
    # dividing by the smaller tau makes d_tau >= euclidean/tau at either end
    assert d >= abs(z - zeta) / float(w1.tau(abs(z)))
    with pytest.raises(DomainError):
        quasi_distance(w1, 1.0, 0.0)


def test_lattice_starts_at_origin(lat_tiny):
    assert lat_tiny.points[0] == 0.0
    assert len(lat_tiny) > 100
    np.testing.assert_allclose(
        lat_tiny.taus, lat_tiny.weight.tau(np.abs(lat_tiny.points)), rtol=1e-14
    )


def test_separation_brute_force(lat_tiny, delta1):
    pts = lat_tiny.points
    taus = lat_tiny.taus
    d = np.abs(pts[:, None] - pts[None, :])
    lim = delta1 * np.maximum(taus[:, None], taus[None, :])
    np.fill_diagonal(d, np.inf)
    assert np.all(d >= lim * (1.0 - 1e-12))


def test_covering_brute_force(lat_tiny, delta1, rng):
    # the probe grid used during construction is fully covered (exact check,
    # no KD-tree shortcuts)
    from btk.lattice import _probe_points

    probes = _probe_points(0.3, 20_000)[::7]
    d = np.abs(probes[:, None] - lat_tiny.points[None, :])
    covered = np.any(d < delta1 * lat_tiny.taus[None, :], axis=1)
    assert covered.all()
    # covering of fresh random points may miss only hairline slivers
    fresh = 0.3 * np.sqrt(rng.random(5_000)) * np.exp(
        2j * np.pi * rng.random(5_000)
    )
    d = np.abs(fresh[:, None] - lat_tiny.points[None, :])
    ratio = np.min(d / (delta1 * lat_tiny.taus[None, :]), axis=1)
    assert np.all(ratio < 1.1)


def test_certification_passes(lat_tiny):
    # idempotent: re-checking with the same probe density always passes
    cert = certify_lattice(lat_tiny, probe_count=20_000)
    assert cert.separation_ok
    assert cert.min_separation_ratio >= 1.0 - 1e-12
    assert cert.covering_misses == 0
    assert cert.multiplicity_observed <= 256
    assert cert.passed


def test_count_in_ball_matches_brute_force(lat_tiny, delta1, w1):
    for zeta in (0.1 + 0.05j, -0.2j, 0.25):
        tau_z = float(w1.tau(abs(zeta)))
        for m in range(1, 5):
            lim = (2.0**m) * delta1 * np.minimum(lat_tiny.taus, tau_z)
            expect = int(np.sum(np.abs(lat_tiny.points - zeta) < lim))
            assert count_in_ball(lat_tiny, zeta, m) == expect
    with pytest.raises(DomainError):
        count_in_ball(lat_tiny, 1.0 + 0j, 2)


def test_count_in_ball_monotone_in_m(lat_tiny):
    zeta = 0.15 * np.exp(0.8j)
    counts = [count_in_ball(lat_tiny, zeta, m) for m in range(1, 6)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))
    assert counts[0] >= 1


def test_partition_separated(lat_half, delta1, w1):
    m = 2
    parts = partition_separated(lat_half, m)
    # partition property
    assert sum(len(p) for p in parts) == len(lat_half)
    thresh = (2.0**m) * delta1
    for part in parts:
        taus = w1.tau(np.abs(part))
        d = np.abs(part[:, None] - part[None, :])
        lim = thresh * np.minimum(taus[:, None], taus[None, :])
        np.fill_diagonal(d, np.inf)
        assert np.all(d >= lim)
    # the part count is controlled by the ball-counting bound
    max_count = max(count_in_ball(lat_half, z, m) for z in lat_half.points[::25])
    assert len(parts) <= max_count + 1


def test_partition_m_validation(lat_half):
    with pytest.raises(ParameterError):
        partition_separated(lat_half, 1)


def test_build_validation(w1, delta1):
    with pytest.raises(DomainError):
        build_lattice(w1, delta1, 1.2)
    with pytest.raises(ParameterError):
        build_lattice(w1, w1.m_tau * 2, 0.5)
    with pytest.raises(ResourceError):
        build_lattice(w1, delta1, 0.5, probe_count=1_000, max_points=10)


def test_json_round_trip(lat_tiny, w1, tmp_path):
    path = str(tmp_path / "lat.json")
    save_lattice(lat_tiny, path)
    again = load_lattice(path, w1)
    np.testing.assert_allclose(again.points, lat_tiny.points, rtol=0, atol=1e-15)
    assert again.delta == lat_tiny.delta
    assert again.r_max == lat_tiny.r_max
    assert again.multiplicity_observed == lat_tiny.multiplicity_observed


def test_from_json_recomputes_taus(lat_tiny, w1):
    again = lattice_from_json(lat_tiny.to_json(), w1)
    np.testing.assert_allclose(again.taus, lat_tiny.taus, rtol=1e-14)


def test_build_is_deterministic(w1, delta1):
    a = build_lattice(w1, delta1, 0.25, probe_count=2_000)
    b = build_lattice(w1, delta1, 0.25, probe_count=2_000)
    np.testing.assert_array_equal(a.points, b.points)
