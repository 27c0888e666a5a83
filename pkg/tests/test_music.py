import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onebit_music.array_model import SourceScenario, analytic_covariance, generate_snapshots, steering_vector
from onebit_music.covariance import (CovarianceMatrix, approx_onebit_covariance,
                                     sample_covariance)
from onebit_music.errors import DomainError
from onebit_music.experiments import trial_seed
from onebit_music.music import (EigenSystem, SpectrumGrid, eigendecompose, estimate_doas,
                                make_grid, music_spectrum, noise_subspace, pick_peaks,
                                principal_angle)
from onebit_music.quantization import quantize_snapshots

from conftest import TWO_SOURCE_DOAS, random_hermitian

STEP = 0.05


def test_make_grid():
    grid = make_grid()
    assert grid.size == 3601
    assert grid[0] == -90.0 and grid[-1] == 90.0
    assert -10.0 in grid and 3.5 in grid
    assert np.all(np.diff(grid) > 0)
    np.testing.assert_array_equal(make_grid(30.0), [-90, -60, -30, 0, 30, 60, 90])


def _check_eigensystem(R, eig):
    V, w = eig.eigenvectors, eig.eigenvalues
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(V.conj().T @ V - np.eye(len(w))) <= 1e-8
    for i in range(len(w)):
        assert np.linalg.norm(R @ V[:, i] - w[i] * V[:, i]) <= 1e-8 * np.linalg.norm(R)


def test_eigendecompose_identity_and_diagonal():
    eig = eigendecompose(np.eye(4))
    np.testing.assert_allclose(eig.eigenvalues, 1.0)
    _check_eigensystem(np.eye(4), eig)
    eig = eigendecompose(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(eig.eigenvalues, [1, 2, 3])
    np.testing.assert_allclose(np.abs(eig.eigenvectors), np.eye(3)[:, [1, 2, 0]])


def test_eigendecompose_random_reconstruction(rng):
    for _ in range(20):
        R = random_hermitian(rng, 4)
        eig = eigendecompose(R)
        _check_eigensystem(R, eig)
        V, w = eig.eigenvectors, eig.eigenvalues
        assert np.max(np.abs(V @ np.diag(w) @ V.conj().T - R)) <= 1e-10
        assert np.all(np.isreal(w))


def test_eigendecompose_rejects_non_hermitian():
    with pytest.raises(DomainError):
        eigendecompose(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_noise_subspace_small_axes():
    eig = eigendecompose(np.diag([0.1, 5.0, 0.1]))
    u_n = noise_subspace(eig, 1)
    assert u_n.basis.shape == (3, 2)
    P = u_n.projector
    np.testing.assert_allclose(P, np.diag([1.0, 0.0, 1.0]), atol=1e-14)
    with pytest.raises(DomainError):
        noise_subspace(eig, 3)
    with pytest.raises(DomainError):
        noise_subspace(eig, 0)


def test_noise_subspace_orthogonal_to_true_steering(ula10, two_source_scenario):
    u_n = noise_subspace(eigendecompose(analytic_covariance(ula10, two_source_scenario)), 2)
    for theta in TWO_SOURCE_DOAS:
        a = steering_vector(ula10, theta)
        assert np.linalg.norm(u_n.basis.conj().T @ a) <= 1e-8 * np.linalg.norm(a)
    V = u_n.basis
    assert np.linalg.norm(V.conj().T @ V - np.eye(8)) <= 1e-8


def test_noise_subspace_survives_affine_surrogate(ula10, two_source_scenario):
    R = analytic_covariance(ula10, two_source_scenario)
    R_app = approx_onebit_covariance(R, two_source_scenario.total_power)
    a = noise_subspace(eigendecompose(R), 2).basis
    b = noise_subspace(eigendecompose(R_app), 2).basis
    assert principal_angle(a, b) <= 1e-8


def test_principal_angle_known_value():
    U = np.array([[1.0], [0.0]])
    V = np.array([[np.cos(1e-9)], [np.sin(1e-9)]])
    assert principal_angle(U, V) == pytest.approx(1e-9, rel=1e-6)


def test_music_spectrum_peaks_at_truth(ula10, two_source_scenario):
    grid = make_grid(STEP)
    u_n = noise_subspace(eigendecompose(analytic_covariance(ula10, two_source_scenario)), 2)
    spec = music_spectrum(u_n, ula10, grid)
    assert np.all(np.isfinite(spec.values)) and np.all(spec.values > 0)
    top2 = np.sort(grid[np.argsort(spec.values)[-2:]])
    np.testing.assert_array_equal(top2, TWO_SOURCE_DOAS)


def test_music_spectrum_depends_only_on_subspace(ula10, two_source_scenario):
    grid = make_grid(0.5)
    R = analytic_covariance(ula10, SourceScenario.equal_power(TWO_SOURCE_DOAS, -3.0))
    base = music_spectrum(noise_subspace(eigendecompose(R), 2), ula10, grid).values
    shifted = CovarianceMatrix(7.5 * R.data - 2.0 * np.eye(10), R.tag)
    other = music_spectrum(noise_subspace(eigendecompose(shifted), 2), ula10, grid).values
    np.testing.assert_allclose(other, base, rtol=1e-9)


def test_music_spectrum_permutation_equivariant(ula10, two_source_scenario, rng):
    grid = make_grid(0.25)
    u_n = noise_subspace(eigendecompose(analytic_covariance(ula10, two_source_scenario)), 2)
    perm = rng.permutation(grid.size)
    a = music_spectrum(u_n, ula10, grid).values
    b = music_spectrum(u_n, ula10, grid[perm]).values
    np.testing.assert_allclose(b, a[perm], rtol=1e-12)


def _spectrum(values, step=1.0):
    values = np.asarray(values, dtype=float)
    return SpectrumGrid(np.arange(values.size) * step, values)


def test_pick_peaks_single_bump():
    assert pick_peaks(_spectrum([1, 2, 5, 2, 1]), 1) == [2.0]


def test_pick_peaks_two_bumps_ascending():
    assert pick_peaks(_spectrum([1, 9, 1, 1, 4, 1]), 2) == [1.0, 4.0]


def test_pick_peaks_fallback_and_ties():
    # one interior maximum; the second slot falls back to the largest remaining value
    assert pick_peaks(_spectrum([8, 2, 5, 1, 0]), 2) == [0.0, 2.0]
    # equal peaks: the smaller angle wins
    assert pick_peaks(_spectrum([0, 3, 0, 3, 0]), 1) == [1.0]
    # a plateau is not a strict local maximum, so the lower strict peak wins
    assert pick_peaks(_spectrum([0, 3, 3, 0, 1, 0]), 1) == [4.0]
    with pytest.raises(DomainError):
        pick_peaks(_spectrum([1, 2]), 1)
    with pytest.raises(DomainError):
        pick_peaks(_spectrum([1, 2, 1]), 4)


def test_pick_peaks_on_two_source_spectrum(ula10, two_source_scenario):
    grid = make_grid(STEP)
    u_n = noise_subspace(eigendecompose(analytic_covariance(ula10, two_source_scenario)), 2)
    est = pick_peaks(music_spectrum(u_n, ula10, grid), 2)
    np.testing.assert_allclose(est, TWO_SOURCE_DOAS, atol=STEP)


def test_estimate_doas_analytic_and_surrogate(ula10, two_source_scenario):
    R = analytic_covariance(ula10, two_source_scenario)
    est = estimate_doas(R, ula10, 2)
    np.testing.assert_allclose(est, TWO_SOURCE_DOAS, atol=STEP)
    assert estimate_doas(approx_onebit_covariance(R, two_source_scenario.total_power), ula10, 2) == est


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 100), st.floats(-50, 50), st.integers(0, 2 ** 32))
def test_affine_invariance_of_estimates(a, b, seed):
    from onebit_music.array_model import ArrayGeometry
    g = ArrayGeometry.ula(10)
    rng = np.random.default_rng(seed)
    doas = np.sort(rng.choice(np.arange(-70, 70.5, 0.5), 3, replace=False))
    R = analytic_covariance(g, SourceScenario(tuple(doas), tuple(rng.uniform(0.5, 5, 3))))
    grid = make_grid(0.1)
    base = estimate_doas(R, g, 3, grid)
    assert estimate_doas(CovarianceMatrix(a * R.data + b * np.eye(10), R.tag), g, 3, grid) == base


def test_one_bit_sample_covariance_low_snr(ula10):
    sc = SourceScenario.equal_power(TWO_SOURCE_DOAS, -10.0)
    grid = make_grid(STEP)
    trials = 50
    hits = 0
    for r in range(trials):
        y = quantize_snapshots(generate_snapshots(ula10, sc, 1000, trial_seed(5, r)))
        est = estimate_doas(sample_covariance(y), ula10, 2, grid)
        hits += np.all(np.abs(np.subtract(est, TWO_SOURCE_DOAS)) < 1.0)
    assert hits / trials >= 0.9


def test_estimate_doas_dimension_mismatch(ula3, two_source_scenario, ula10):
    with pytest.raises(DomainError):
        estimate_doas(analytic_covariance(ula10, two_source_scenario), ula3, 1)
