import numpy as np
import pytest

import tlscond as tc


@pytest.fixture
def fix_a():
    # x = 0 case: A^T b vanishes, alpha = 1
    return tc.TlsProblem([[2.0], [0.0]], [0.0, 1.0], label="fix_a")


@pytest.fixture
def fix_b():
    # golden-ratio solution, alpha slightly above 1/2
    return tc.TlsProblem([[1.0], [0.0]], [1.0, 1.0], label="fix_b")


def pipeline(problem, with_k=False):
    """(bundle, solution, work) for a solvable problem."""
    bundle = tc.svd_bundle(problem)
    solution = tc.solve_tls(problem, bundle)
    build = tc.build_k_matrix if with_k else tc.build_spectral_work
    return bundle, solution, build(problem, bundle, solution)


class FixBClosedForms:
    """Hand-derived exact values for the golden-ratio fixture."""

    x = (1.0 + np.sqrt(5.0)) / 2.0
    sig1_sq = (3.0 + np.sqrt(5.0)) / 2.0
    sig2_sq = (3.0 - np.sqrt(5.0)) / 2.0
    sig2 = np.sqrt(sig2_sq)
    sigma_hat = 1.0
    alpha = 1.0 / np.sqrt(1.0 + x**2)
    s1 = np.sqrt(3.0 / 5.0)
    kappa = (1.0 + x**2) * s1                      # alpha^{-2} s_1 (n = 1)
    kappa_rel = kappa * np.sqrt(3.0) / x
    kappa1_upper = np.sqrt(1.0 + x**2) * np.sqrt(1.0 + sig2_sq) / (1.0 - sig2_sq)
    kappa2_lower = np.sqrt(1.0 + x**2) / np.sqrt(1.0 - sig2_sq)
    bhm = 1.0 / (1.0 - sig2)
    simple_lower = np.sqrt(1.0 + x**2) * s1
    simple_upper = kappa
    sharp_lower = 0.5 * (1.0 + x**2) * s1
    sharp_upper = (1.0 + x**2) * s1 + np.sqrt(1.0 + x**2) * s1
    gap_chain_lower = 1.0 / (2.0 * x)
    gap_chain_mid = 1.0 - sig2
    gap_chain_upper = np.sqrt(2.0) / x
