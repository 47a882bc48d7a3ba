import numpy as np
import pytest

from conftest import cos2_quadrature, zero_potential_model

from rovib import units
from rovib.errors import ConfigError, ShapeMismatchError
from rovib.grid import (ChannelSet, HamiltonianTerms, RadialGrid, Wavepacket,
                        apply_centrifugal, apply_interaction,
                        apply_radial_kinetic, cos2_bands, cos2_coupling,
                        kinetic_matrix)

MU = units.amu_to_au(0.5 * units.MASS_RB87_AMU)


def make_wp(grid, channels, fill):
    coeff = np.zeros((grid.n_points, channels.size), dtype=complex)
    fill(coeff, grid.points)
    return Wavepacket(coeff, 0.0, grid, channels)


def random_wp(grid, channels, seed):
    rng = np.random.default_rng(seed)
    coeff = rng.normal(size=(grid.n_points, channels.size)) \
        + 1j * rng.normal(size=(grid.n_points, channels.size))
    wp = Wavepacket(coeff, 0.0, grid, channels)
    return wp.normalized()


def inner(a: Wavepacket, b: Wavepacket):
    return np.sum(np.conj(a.coefficients) * b.coefficients) * a.grid.spacing


def test_grid_point_layout():
    grid = RadialGrid(6.0, 60.0, 128)
    assert grid.spacing == (60.0 - 6.0) / 128
    assert np.allclose(grid.points,
                       6.0 + grid.spacing * np.arange(128))
    with pytest.raises(ConfigError):
        RadialGrid(0.0, 60.0, 128)
    with pytest.raises(ConfigError):
        RadialGrid(6.0, 60.0, 8)


def test_channel_set_even_and_above_m():
    assert ChannelSet(m=0, n_max=8).n_list == (0, 2, 4, 6, 8)
    assert ChannelSet(m=1, n_max=8).n_list == (2, 4, 6, 8)
    assert ChannelSet(m=3, n_max=9).n_list == (4, 6, 8)
    assert ChannelSet(m=2, n_max=8).n_list == (2, 4, 6, 8)
    with pytest.raises(ConfigError):
        ChannelSet(m=5, n_max=3)


def test_wavepacket_shape_check_and_norm():
    grid = RadialGrid(6.0, 60.0, 64)
    channels = ChannelSet(m=0, n_max=4)
    with pytest.raises(ShapeMismatchError):
        Wavepacket(np.zeros((64, 2), dtype=complex), 0.0, grid, channels)
    wp = random_wp(grid, channels, 1)
    assert abs(wp.norm() - 1.0) < 1e-12


def test_kinetic_on_commensurate_sine():
    grid = RadialGrid(6.0, 60.0, 128)
    channels = ChannelSet(m=0, n_max=0)
    j = 9
    k = 2.0 * np.pi * j / (grid.r_max - grid.r_min)

    wp = make_wp(grid, channels, lambda c, r: c.__setitem__(
        (slice(None), 0), np.sin(k * (r - grid.r_min))))
    out = apply_radial_kinetic(wp, grid, MU)
    expected = k**2 / (2.0 * MU)
    assert np.max(np.abs(out.coefficients - expected * wp.coefficients)) \
        < 1e-11 * expected


def test_kinetic_of_zero_is_zero():
    grid = RadialGrid(6.0, 60.0, 64)
    channels = ChannelSet(m=0, n_max=2)
    wp = make_wp(grid, channels, lambda c, r: None)
    out = apply_radial_kinetic(wp, grid, MU)
    assert np.all(out.coefficients == 0)


def test_kinetic_matches_finite_difference_on_gaussian():
    # 4th-order finite differences converge as h^4; the refinement study
    # pins the discretization bound for the comparison
    def deviation(n):
        grid = RadialGrid(6.0, 60.0, n)
        channels = ChannelSet(m=0, n_max=0)
        r0, w = 30.0, 2.5
        wp = make_wp(grid, channels, lambda c, r: c.__setitem__(
            (slice(None), 0), np.exp(-((r - r0) ** 2) / (2 * w * w))))
        out = apply_radial_kinetic(wp, grid, MU).coefficients[:, 0].real
        f = wp.coefficients[:, 0].real
        h = grid.spacing
        d2 = np.zeros_like(f)
        d2[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1]
                    - f[4:]) / (12 * h * h)
        fd = -d2 / (2.0 * MU)
        interior = slice(10, n - 10)
        return np.max(np.abs(out[interior] - fd[interior]))

    dev128, dev256 = deviation(128), deviation(256)
    assert dev128 < 1.8 * 16.0 * dev256
    assert dev128 < 1e-8


def test_centrifugal_n0_zero_and_closed_form():
    grid = RadialGrid(6.0, 60.0, 64)
    channels = ChannelSet(m=0, n_max=2)
    wp = make_wp(grid, channels, lambda c, r: c.__setitem__(
        (slice(None), slice(None)), 1.0))
    out = apply_centrifugal(wp, grid, MU)
    assert np.all(out.coefficients[:, 0] == 0)
    expected = 6.0 / (2.0 * MU * grid.points**2)
    assert np.allclose(out.coefficients[:, 1].real, expected, rtol=1e-14)


def test_centrifugal_hermitian_on_random_states():
    grid = RadialGrid(6.0, 60.0, 64)
    channels = ChannelSet(m=0, n_max=10)
    phi, psi = random_wp(grid, channels, 2), random_wp(grid, channels, 3)
    lhs = inner(phi, apply_centrifugal(psi, grid, MU))
    rhs = inner(apply_centrifugal(phi, grid, MU), psi)
    assert abs(lhs - rhs) < 1e-12


def test_cos2_coupling_values():
    assert abs(cos2_coupling(0, 0, 0) - 1.0 / 3.0) < 1e-15
    assert abs(cos2_coupling(0, 2, 0) - 2.0 / (3.0 * np.sqrt(5.0))) < 1e-15
    assert cos2_coupling(0, 4, 0) == 0.0
    assert cos2_coupling(2, 8, 0) == 0.0
    with pytest.raises(ConfigError):
        cos2_coupling(0, 2, 1)


def test_cos2_coupling_against_quadrature():
    for m in (0, 1, 3):
        for n in range(abs(m), 21):
            for n_prime in (n, n + 2):
                if n_prime < abs(m):
                    continue
                closed = cos2_coupling(n, n_prime, m)
                quad = cos2_quadrature(n, n_prime, m)
                assert abs(closed - quad) < 1e-12, (n, n_prime, m)


def test_cos2_diagonal_formula_matches_quadrature_to_1e12():
    # M = 0 diagonal: 1/3 + (2/3) N(N+1)/((2N-1)(2N+3))
    for n in range(0, 21, 2):
        explicit = 1.0 / 3.0 + (2.0 / 3.0) * n * (n + 1) / ((2 * n - 1.0)
                                                            * (2 * n + 3.0))
        assert abs(explicit - cos2_quadrature(n, n, 0)) < 1e-12


def test_interaction_zero_intensity():
    grid = RadialGrid(6.0, 60.0, 64)
    channels = ChannelSet(m=0, n_max=6)
    model = zero_potential_model(alpha_atom=319.2)
    wp = random_wp(grid, channels, 4)
    out = apply_interaction(wp, model, 0.0)
    assert np.all(out.coefficients == 0)
    with pytest.raises(ConfigError):
        apply_interaction(wp, model, -1.0)


def test_interaction_isotropic_part_no_mixing():
    # single channel with dalpha = 0: pointwise -I/(2 c eps0) alpha_perp f
    from rovib.molecule import CurveSpec, MoleculeModel

    grid = RadialGrid(6.0, 60.0, 64)
    channels = ChannelSet(m=0, n_max=0)
    r = np.linspace(2.0, 80.0, 8)
    zero = CurveSpec(kind="tabulated", table_r=r, table_values=np.zeros(8))
    const = CurveSpec(kind="tabulated", table_r=r,
                      table_values=np.full(8, 25.0))
    model = MoleculeModel(reduced_mass=1.0, potential=zero, delta_alpha=zero,
                          alpha_perp=const)
    wp = random_wp(grid, channels, 5)
    out = apply_interaction(wp, model, 3.0e10)
    pref = units.interaction_prefactor_au(3.0e10)
    assert np.allclose(out.coefficients, pref * 25.0 * wp.coefficients,
                       rtol=1e-12)


def test_interaction_against_dense_matrix_oracle():
    # 8 radial points x 3 channels, dense Kronecker construction in-test
    grid = RadialGrid(6.0, 20.0, 16)
    channels = ChannelSet(m=0, n_max=4)
    model = zero_potential_model(r_lo=1.0, r_hi=30.0, alpha_atom=50.0)
    intensity = 2.0e11
    pref = units.interaction_prefactor_au(intensity)
    r = grid.points
    dal = 6.0 * 50.0**2 / r**3
    ape = 2.0 * 50.0 - 2.0 * 50.0**2 / r**3
    nch = channels.size
    cos2 = np.zeros((nch, nch))
    for i, n in enumerate(channels.n_list):
        for j, n_prime in enumerate(channels.n_list):
            cos2[i, j] = cos2_coupling(n, n_prime, 0)
    dense = np.zeros((16 * nch, 16 * nch))
    for i in range(16):
        block = pref * (dal[i] * cos2 + ape[i] * np.eye(nch))
        dense[i * nch:(i + 1) * nch, i * nch:(i + 1) * nch] = block

    wp = random_wp(grid, channels, 6)
    out = apply_interaction(wp, model, intensity)
    flat = dense @ wp.coefficients.reshape(-1)
    assert np.max(np.abs(out.coefficients.reshape(-1) - flat)) < 1e-12


def test_assembled_hamiltonian_hermitian(model_seed):
    grid = RadialGrid(6.0, 60.0, 64)
    channels = ChannelSet(m=0, n_max=12)
    terms = HamiltonianTerms(model_seed, grid, channels)
    pref = units.interaction_prefactor_au(5.0e10)
    rng = np.random.default_rng(9)
    for _ in range(4):
        a = rng.normal(size=(channels.size, 64)) + \
            1j * rng.normal(size=(channels.size, 64))
        b = rng.normal(size=(channels.size, 64)) + \
            1j * rng.normal(size=(channels.size, 64))
        lhs = np.sum(np.conj(a) * terms.apply(b, pref))
        rhs = np.sum(np.conj(terms.apply(a, pref)) * b)
        assert abs(lhs - rhs) < 1e-11 * max(1.0, abs(lhs))


def test_hamiltonian_terms_matches_operation_composition(model_seed):
    grid = RadialGrid(6.0, 60.0, 64)
    channels = ChannelSet(m=0, n_max=8)
    intensity = 7.0e10
    wp = random_wp(grid, channels, 10)
    composed = (
        apply_radial_kinetic(wp, grid, model_seed.reduced_mass_au).coefficients
        + apply_centrifugal(wp, grid, model_seed.reduced_mass_au).coefficients
        + apply_interaction(wp, model_seed, intensity).coefficients
        + model_seed.potential_au(grid.points)[:, None] * wp.coefficients)
    terms = HamiltonianTerms(model_seed, grid, channels)
    fast = terms.apply(np.ascontiguousarray(wp.coefficients.T),
                       units.interaction_prefactor_au(intensity)).T
    assert np.max(np.abs(fast - composed)) < 1e-13


def test_kinetic_plus_centrifugal_spectrum_nonnegative():
    grid = RadialGrid(6.0, 60.0, 64)
    t = kinetic_matrix(grid, MU)
    for n in (0, 2, 10):
        h = t + np.diag(n * (n + 1) / (2.0 * MU * grid.points**2))
        eigenvalues = np.linalg.eigvalsh(h)
        assert eigenvalues[0] > -1e-12


def test_kinetic_matrix_matches_fft_application():
    grid = RadialGrid(6.0, 60.0, 64)
    channels = ChannelSet(m=0, n_max=0)
    wp = random_wp(grid, channels, 11)
    out = apply_radial_kinetic(wp, grid, MU).coefficients[:, 0]
    dense = kinetic_matrix(grid, MU) @ wp.coefficients[:, 0]
    assert np.max(np.abs(out - dense)) < 1e-12
