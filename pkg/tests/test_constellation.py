"""Constellation tables, CIR geometry, detection, and bit mapping."""

import numpy as np
import pytest

from slp.constellation import (
    CirBoundary,
    ConfigurationError,
    Constellation,
)

from oracles import cir_margin_contains

RT2 = np.sqrt(2.0)
RT10 = np.sqrt(10.0)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def test_qpsk_table_points_and_energy():
    c = Constellation.from_name("qpsk")
    expected = {(1 + 1j) / RT2, (1 - 1j) / RT2, (-1 + 1j) / RT2, (-1 - 1j) / RT2}
    got = {complex(np.round(p, 12)) for p in c.points}
    assert got == {complex(np.round(p, 12)) for p in expected}
    assert abs(np.mean(np.abs(c.points) ** 2) - 1.0) <= 1e-12


def test_16qam_table_grid_and_energy():
    c = Constellation.from_name("16qam")
    grid = {(a + 1j * b) / RT10 for a in (-3, -1, 1, 3) for b in (-3, -1, 1, 3)}
    got = {complex(np.round(p, 12)) for p in c.points}
    assert got == {complex(np.round(p, 12)) for p in grid}
    assert abs(np.mean(np.abs(c.points) ** 2) - 1.0) <= 1e-12


def test_8psk_unit_modulus_with_default_offset():
    c = Constellation.from_name("8psk")
    assert np.allclose(np.abs(c.points), 1.0, atol=1e-14)
    phases = sorted(np.angle(c.points) % (2 * np.pi))
    assert np.allclose(phases, np.pi / 8 + np.arange(8) * np.pi / 4, atol=1e-12)


@pytest.mark.parametrize("name", ["qpsk", "8psk", "16qam", "64qam"])
def test_unit_average_energy(name):
    c = Constellation.from_name(name)
    assert abs(np.mean(np.abs(c.points) ** 2) - 1.0) <= 1e-12


def test_table_entries_are_consistent():
    c = Constellation.from_name("16qam")
    for entry in c.table():
        assert entry.value == complex(c.points[entry.index])
        assert int(entry.bit_label, 2) == entry.index
        assert len(entry.bit_label) == 4


def test_gray_labels_of_neighbors_differ_in_one_bit():
    for name in ("qpsk", "8psk", "16qam", "64qam"):
        c = Constellation.from_name(name)
        pts = c.points
        # nearest neighbors in the plane are the adjacent decision regions
        dists = np.abs(pts[:, None] - pts[None, :])
        np.fill_diagonal(dists, np.inf)
        min_d = dists.min()
        for i in range(c.order):
            for j in np.flatnonzero(dists[i] <= min_d * 1.0 + 1e-9):
                assert bin(i ^ j).count("1") == 1, (name, i, j)


def test_unsupported_orders_rejected():
    with pytest.raises(ConfigurationError):
        Constellation.psk(6)
    with pytest.raises(ConfigurationError):
        Constellation.qam(32)
    with pytest.raises(ConfigurationError):
        Constellation.from_name("novel-qam")


# ---------------------------------------------------------------------------
# boundary directions
# ---------------------------------------------------------------------------

def test_qpsk_boundary_directions():
    c = Constellation.from_name("qpsk")
    idx = int(c.index_of(np.array([(1 + 1j) / RT2]))[0])
    b = c.boundary(idx)
    assert b == CirBoundary(mu=b.mu, nu=b.nu, free_count=2)
    assert abs(b.mu - 1j) <= 1e-12
    assert abs(b.nu - 1.0) <= 1e-12


def test_16qam_boundary_classes():
    c = Constellation.from_name("16qam")
    inner = int(c.index_of(np.array([(1 + 1j) / RT10]))[0])
    corner = int(c.index_of(np.array([(3 + 3j) / RT10]))[0])
    edge = int(c.index_of(np.array([(3 + 1j) / RT10]))[0])
    assert c.boundary(inner) == CirBoundary(0j, 0j, 0)
    bc = c.boundary(corner)
    assert (bc.mu, bc.nu, bc.free_count) == (1 + 0j, 1j, 2)
    be = c.boundary(edge)
    assert be.free_count == 1 and be.mu == 1 + 0j and be.nu == 0


def test_psk_boundary_angle_between_directions():
    for order in (4, 8, 16):
        c = Constellation.psk(order)
        for i in range(order):
            b = c.boundary(i)
            assert abs(abs(b.mu) - 1.0) <= 1e-12
            assert abs(abs(b.nu) - 1.0) <= 1e-12
            angle = np.angle(b.mu * np.conj(b.nu))
            assert abs(angle - 2 * np.pi / order) <= 1e-12


def test_boundary_cone_matches_margin_oracle_on_grid():
    # the generated cone must equal point-by-point membership decided
    # from ML decision margins, for every point of small constellations
    rng = np.random.default_rng(42)
    for name in ("qpsk", "8psk", "16qam"):
        c = Constellation.from_name(name)
        for idx in range(c.order):
            s = complex(c.points[idx])
            for _ in range(60):
                z = s + (rng.standard_normal() + 1j * rng.standard_normal()) * 0.8
                ours = c.cir_contains(idx, z, tol=1e-9)
                ref = cir_margin_contains(c.points, idx, z, tol=1e-9)
                if ours != ref:
                    # disagreements are only tolerated on the exact boundary
                    assert cir_margin_contains(c.points, idx, z, tol=1e-7) != \
                        cir_margin_contains(c.points, idx, z, tol=-1e-7)


def test_bpsk_cir_not_parameterizable():
    c = Constellation.psk(2)
    assert c.order == 2
    with pytest.raises(ConfigurationError):
        c.boundary(0)
    with pytest.raises(ConfigurationError):
        c.build_lambda(np.array([0]))


# ---------------------------------------------------------------------------
# stacked direction matrix
# ---------------------------------------------------------------------------

def test_lambda_qpsk_single_symbol():
    c = Constellation.from_name("qpsk")
    idx = c.index_of(np.array([(1 + 1j) / RT2]))
    lam = c.build_lambda(idx)
    assert np.allclose(lam.matrix, [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)
    assert lam.k_t == 2
    assert np.array_equal(lam.support, [0, 1])


def test_lambda_16qam_inner_is_zero():
    c = Constellation.from_name("16qam")
    idx = c.index_of(np.array([(1 + 1j) / RT10]))
    lam = c.build_lambda(idx)
    assert np.array_equal(lam.matrix, np.zeros((2, 2)))
    assert lam.k_t == 0 and lam.support.size == 0


def test_lambda_mixed_corner_and_inner():
    c = Constellation.from_name("16qam")
    idx = c.index_of(np.array([(3 + 3j) / RT10, (1 - 1j) / RT10]))
    lam = c.build_lambda(idx)
    assert lam.k_t == 2
    # corner occupies its mu column (0) and nu column (K + 0 = 2)
    assert np.array_equal(lam.support, [0, 2])
    assert lam.matrix.shape == (4, 4)


def test_lambda_block_structure_matches_directions():
    rng = np.random.default_rng(9)
    for name in ("qpsk", "16qam", "64qam"):
        c = Constellation.from_name(name)
        k = 5
        idx = rng.integers(0, c.order, size=k)
        lam = c.build_lambda(idx)
        mu, nu = c.mu[idx], c.nu[idx]
        assert np.allclose(np.diag(lam.matrix[:k, :k]), mu.real)
        assert np.allclose(np.diag(lam.matrix[:k, k:]), nu.real)
        assert np.allclose(np.diag(lam.matrix[k:, :k]), mu.imag)
        assert np.allclose(np.diag(lam.matrix[k:, k:]), nu.imag)
        assert lam.k_t == int(c.free_count[idx].sum())


def test_stacked_offsets_stay_inside_cir():
    # equivalence of the per-user cone and the stacked form: random
    # nonnegative offsets through Lambda decompose into member points
    rng = np.random.default_rng(77)
    for name in ("qpsk", "16qam", "64qam"):
        c = Constellation.from_name(name)
        k = 4
        for _ in range(25):
            idx = rng.integers(0, c.order, size=k)
            lam = c.build_lambda(idx)
            delta = np.zeros(2 * k)
            delta[lam.support] = rng.exponential(1.0, size=lam.k_t)
            stacked = np.concatenate([c.points[idx].real, c.points[idx].imag])
            target = stacked + lam.matrix @ delta
            for user in range(k):
                z = target[user] + 1j * target[k + user]
                assert c.cir_contains(int(idx[user]), z, tol=1e-9)
                assert cir_margin_contains(c.points, int(idx[user]), z, tol=1e-9)


# ---------------------------------------------------------------------------
# cir_contains specifics
# ---------------------------------------------------------------------------

def test_cir_contains_symbol_itself():
    for name in ("qpsk", "16qam", "64qam"):
        c = Constellation.from_name(name)
        for idx in range(c.order):
            assert c.cir_contains(idx, complex(c.points[idx]), tol=1e-12)


def test_cir_contains_scaled_psk_symbol():
    c = Constellation.from_name("qpsk")
    s = (1 + 1j) / RT2
    idx = int(c.index_of(np.array([s]))[0])
    assert c.cir_contains(idx, 2 * s, tol=1e-12)
    # 2s - s = s = (mu + nu)/sqrt(2): both coefficients 1/sqrt(2) > 0
    b = c.boundary(idx)
    assert abs((b.mu + b.nu) / RT2 - s) <= 1e-12


def test_cir_inner_point_is_singleton():
    c = Constellation.from_name("16qam")
    idx = int(c.index_of(np.array([(1 + 1j) / RT10]))[0])
    assert not c.cir_contains(idx, (1 + 1j) / RT10 + 0.1, tol=1e-9)


# ---------------------------------------------------------------------------
# detection
# ---------------------------------------------------------------------------

def test_detect_fixed_points_and_quadrant():
    for name in ("qpsk", "8psk", "16qam", "64qam"):
        c = Constellation.from_name(name)
        assert np.array_equal(c.detect(c.points), np.arange(c.order))
    c = Constellation.from_name("qpsk")
    idx = int(c.detect(np.array([3 + 0.5j]))[0])
    assert complex(c.points[idx]) == pytest.approx((1 + 1j) / RT2)


def test_detect_cir_points_return_their_symbol():
    rng = np.random.default_rng(123)
    for name in ("qpsk", "16qam", "64qam"):
        c = Constellation.from_name(name)
        for _ in range(200):
            idx = int(rng.integers(0, c.order))
            b = c.boundary(idx)
            z = c.points[idx] + rng.exponential(0.7) * b.mu + rng.exponential(0.7) * b.nu
            assert int(c.detect(np.array([z]))[0]) == idx


# ---------------------------------------------------------------------------
# bit mapping
# ---------------------------------------------------------------------------

def test_map_empty_bits():
    c = Constellation.from_name("qpsk")
    assert c.map_bits([]).size == 0


def test_qpsk_bits_00_documented_point():
    c = Constellation.from_name("qpsk")
    assert complex(c.map_bits([0, 0])[0]) == pytest.approx((1 + 1j) / RT2)


@pytest.mark.parametrize("name", ["qpsk", "8psk", "16qam", "64qam"])
def test_bit_roundtrip(name):
    rng = np.random.default_rng(31)
    c = Constellation.from_name(name)
    bits = rng.integers(0, 2, size=c.bits_per_symbol * 40)
    symbols = c.map_bits(bits)
    assert symbols.shape[0] == 40
    assert np.array_equal(c.demap_symbols(symbols), bits)


def test_map_bits_rejects_bad_input():
    c = Constellation.from_name("16qam")
    with pytest.raises(ValueError):
        c.map_bits([0, 1, 1])  # not a multiple of 4
    with pytest.raises(ValueError):
        c.map_bits([0, 2, 1, 1])


# ---------------------------------------------------------------------------
# support statistics
# ---------------------------------------------------------------------------

def test_expected_support_share():
    rng = np.random.default_rng(2024)
    draws = 200_000
    for name, expect in (("16qam", 1.0), ("64qam", 0.5)):
        c = Constellation.from_name(name)
        idx = rng.integers(0, c.order, size=draws)
        mean = c.free_count[idx].mean()
        assert abs(mean - expect) <= 0.02 * expect
    psk = Constellation.from_name("8psk")
    assert np.all(psk.free_count == 2)
