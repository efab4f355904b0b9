import numpy as np
import pytest

import tlscond as tc
from conftest import pipeline
from tlscond.errors import InvalidAlpha, ShapeError


def test_haar_one_by_one():
    values = {float(tc.haar_orthogonal(1, seed)[0, 0]) for seed in range(20)}
    assert values <= {1.0, -1.0}
    assert len(values) == 2  # both signs occur


def test_haar_deterministic():
    q1 = tc.haar_orthogonal(5, 42)
    q2 = tc.haar_orthogonal(5, 42)
    np.testing.assert_array_equal(q1, q2)
    assert not np.array_equal(q1, tc.haar_orthogonal(5, 43))


def test_haar_orthogonality():
    q = tc.haar_orthogonal(50, 7)
    assert np.linalg.norm(q.T @ q - np.eye(50)) <= 1e-12


def test_generate_v_two_by_two():
    v_tilde = np.array([[1.0]])
    v = tc.generate_v(1, v_tilde, 0.5, seed=0)
    assert v[1, 1] == -0.5
    assert abs(v[0, 0]) == pytest.approx(0.5, rel=1e-15)
    assert abs(v[0, 1]) == pytest.approx(np.sqrt(0.75), rel=1e-15)
    assert abs(v[1, 0]) == pytest.approx(np.sqrt(0.75), rel=1e-15)
    assert np.linalg.norm(v.T @ v - np.eye(2)) <= 1e-15


@pytest.mark.parametrize("n,alpha", [(1, 0.5), (4, 0.3), (9, 1e-6)])
def test_generate_v_orthogonal_with_exact_corner(n, alpha):
    v = tc.generate_v(n, tc.haar_orthogonal(n, 3), alpha, seed=4)
    assert v.shape == (n + 1, n + 1)
    assert v[-1, -1] == -alpha  # exact by construction
    assert np.linalg.norm(v.T @ v - np.eye(n + 1)) <= 1e-13 * (n + 1)
    sv = np.linalg.svd(v[:n, :n], compute_uv=False)
    np.testing.assert_allclose(sv[:-1], 1.0, atol=1e-12)
    assert sv[-1] == pytest.approx(alpha, abs=1e-12 + 1e-8 * alpha)


def test_generate_v_matches_block_structure():
    # border blocks must be sqrt(1-a^2) times the singular pair of V11 for its
    # smallest singular value
    n, alpha = 6, 0.37
    v = tc.generate_v(n, tc.haar_orthogonal(n, 11), alpha, seed=12)
    u, sv, vh = np.linalg.svd(v[:n, :n])
    border = np.sqrt(1.0 - alpha**2)
    u_n, v_n = u[:, -1], vh[-1, :]
    if np.sign(u_n @ v[:n, -1]) < 0:  # SVD pair sign is joint
        u_n, v_n = -u_n, -v_n
    np.testing.assert_allclose(v[:n, -1], border * u_n, atol=1e-14)
    np.testing.assert_allclose(v[-1, :n], border * v_n, atol=1e-14)
    assert sv[-1] == pytest.approx(alpha, abs=1e-14)


def test_generate_v_rejects_bad_alpha():
    v_tilde = tc.haar_orthogonal(3, 0)
    for alpha in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(InvalidAlpha):
            tc.generate_v(3, v_tilde, alpha, seed=1)


def test_generate_ab_alpha_recovers_alpha():
    problem = tc.generate_ab_alpha(20, 6, 0.9, seed=8)
    bundle, solution, _ = pipeline(problem)
    assert abs(bundle.v_aug[-1, -1]) == pytest.approx(0.9, abs=1e-10)
    assert solution.alpha == pytest.approx(0.9, rel=1e-10)


def test_generate_ab_alpha_tiny_alpha_v11_condition():
    problem = tc.generate_ab_alpha(15, 10, 1e-8, seed=0)
    bundle, solution, _ = pipeline(problem)
    analysis = tc.v11_spectrum(bundle, solution)
    assert analysis.kappa_v11 == pytest.approx(1e8, rel=1e-6)
    assert np.hypot(1.0, solution.norm_x) == pytest.approx(1e8, rel=1e-6)
    diag = tc.check_uniqueness(bundle)
    assert 1e-15 <= 1.0 - diag.ratio_sigma_hat_n <= 1e-8  # gap collapses


def test_generate_ab_alpha_deterministic():
    p1 = tc.generate_ab_alpha(12, 4, 0.42, seed=77)
    p2 = tc.generate_ab_alpha(12, 4, 0.42, seed=77)
    np.testing.assert_array_equal(p1.augmented(), p2.augmented())


def test_generate_ab_alpha_validation():
    with pytest.raises(ShapeError):
        tc.generate_ab_alpha(5, 5, 0.5, seed=0)
    with pytest.raises(InvalidAlpha):
        tc.generate_ab_alpha(10, 3, 0.0, seed=0)


def test_gap_shrinks_with_alpha():
    # median absolute gap decreases monotonically through the alpha ladder
    medians = []
    for alpha in (1e-2, 1e-3, 1e-5, 1e-7):
        gaps = []
        for seed in range(10):
            problem = tc.generate_ab_alpha(20, 6, alpha, seed=300 + seed)
            bundle = tc.svd_bundle(problem)
            gaps.append(float(bundle.sigma_hat[-1] - bundle.sigma[-1]))
        medians.append(float(np.median(gaps)))
    assert all(a > b for a, b in zip(medians, medians[1:]))


def test_kernel_column_shape_and_symmetry():
    m, omega, spread = 20, 8, 1.25
    col = tc.gaussian_kernel_column(m, omega, spread)
    peak = 1.0 / np.sqrt(2 * np.pi * spread**2)
    assert col[omega] == pytest.approx(peak, rel=1e-15)  # i = omega + 1
    assert col.argmax() == omega
    for i in range(1, 2 * omega + 2):  # entries i and 2*omega + 2 - i match
        assert col[i - 1] == pytest.approx(col[2 * omega + 1 - i], rel=1e-15)
    np.testing.assert_array_equal(col[2 * omega + 1:], 0.0)
    with pytest.raises(ShapeError):
        tc.gaussian_kernel_column(16, 8, spread)


def test_kamm_nagy_zero_noise_is_exact():
    config = tc.KammNagyConfig(m=40, omega=8, spread=1.25, gamma=0.0, seed=1)
    problem = tc.kamm_nagy_problem(config)
    kernel = tc.gaussian_kernel_column(40, 8, 1.25)
    assert problem.n == 24
    np.testing.assert_array_equal(problem.a_matrix[:, 0], kernel)
    np.testing.assert_array_equal(problem.b_vector, np.ones(40))
    # Toeplitz: constant diagonals, zero above the main diagonal
    for j in range(1, problem.n):
        np.testing.assert_array_equal(problem.a_matrix[j:, j], kernel[: 40 - j])
        np.testing.assert_array_equal(problem.a_matrix[:j, j], 0.0)


def test_kamm_nagy_noise_scaling_and_structure():
    import scipy.linalg

    config = tc.KammNagyConfig(m=60, omega=8, spread=1.25, gamma=1e-3, seed=5)
    problem = tc.kamm_nagy_problem(config)
    # independent reconstruction of the noiseless Toeplitz operator
    kernel = tc.gaussian_kernel_column(60, 8, 1.25)
    first_row = np.zeros(config.n)
    first_row[0] = kernel[0]
    t_bar = scipy.linalg.toeplitz(kernel, first_row)
    e_mat = problem.a_matrix - t_bar
    e_vec = problem.b_vector - np.ones(60)
    t_norm = np.linalg.norm(t_bar, 2)
    assert np.linalg.norm(e_mat, 2) / t_norm == pytest.approx(1e-3, rel=1e-12)
    assert np.linalg.norm(e_vec) == pytest.approx(
        1e-3 * np.linalg.norm(np.ones(60)), rel=1e-12
    )
    assert np.all((e_mat != 0) <= (t_bar != 0))  # support containment


def test_kamm_nagy_gap_regime_at_m_100():
    problem = tc.kamm_nagy_problem(tc.KammNagyConfig(m=100, seed=3))
    diag = tc.check_uniqueness(tc.svd_bundle(problem))
    assert 0.9 <= diag.ratio_sigma_n < 1.0
    assert diag.ratio_sigma_hat_n > 1.0 - 1e-5


def test_config_validation():
    assert tc.KammNagyConfig(m=17, omega=8).n == 1  # boundary is allowed
    with pytest.raises(ShapeError):
        tc.KammNagyConfig(m=16, omega=8)  # n = 0 is not
    with pytest.raises(ShapeError):
        tc.KammNagyConfig(m=40, omega=8, spread=-1.0)
    with pytest.raises(ShapeError):
        tc.KammNagyConfig(m=40, omega=8, gamma=-0.1)
    with pytest.raises(InvalidAlpha):
        tc.GeneratorConfig(m=10, n=3, alpha_target=2.0, seed=0)
    with pytest.raises(ShapeError):
        tc.GeneratorConfig(m=3, n=3, alpha_target=0.5, seed=0)
