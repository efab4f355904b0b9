"""Thin SVDs, solvability diagnostics, and the TLS solver.

The solver takes the trailing right singular vector of [A b], sign-normalized
so its last entry is -alpha with alpha = 1/sqrt(1 + ||x||^2), and reads the
solution off it. The normal-equations form (A^T A - sigma_{n+1}^2 I)^{-1} A^T b
is kept as a cross-check only: it degrades as the gap sigma_hat_n - sigma_{n+1}
closes, so the check is skipped (and flagged) below a relative gap of 1e-6.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateVector,
    NoUniqueSolution,
    TrivialProblem,
)
from .problem import TlsProblem

# Below this relative gap the normal-equations matrix is numerically singular.
CROSS_CHECK_MIN_REL_GAP = 1e-6


@dataclass(frozen=True)
class SvdBundle:
    """Thin SVDs of A (hatted quantities) and of [A b] (plain quantities)."""

    sigma_hat: np.ndarray  # (n,) singular values of A, descending
    u_hat: np.ndarray      # (m, n)
    v_hat: np.ndarray      # (n, n)
    sigma: np.ndarray      # (n+1,) singular values of [A b], descending
    u_aug: np.ndarray      # (m, n+1)
    v_aug: np.ndarray      # (n+1, n+1)

    @property
    def m(self) -> int:
        return self.u_hat.shape[0]

    @property
    def n(self) -> int:
        return self.sigma_hat.shape[0]

    def orthonormality_defect(self) -> float:
        """Max Frobenius deviation of the four factors from orthonormal columns."""
        return max(
            np.linalg.norm(f.T @ f - np.eye(f.shape[1]))
            for f in (self.u_hat, self.v_hat, self.u_aug, self.v_aug)
        )

    def reconstruction_defect(self, problem: TlsProblem) -> float:
        """Relative Frobenius residual of both factorizations."""
        a_res = np.linalg.norm(self.u_hat * self.sigma_hat @ self.v_hat.T - problem.a_matrix)
        aug = problem.augmented()
        aug_res = np.linalg.norm(self.u_aug * self.sigma @ self.v_aug.T - aug)
        return max(
            a_res / max(np.linalg.norm(problem.a_matrix), 1e-300),
            aug_res / max(np.linalg.norm(aug), 1e-300),
        )

    def interlacing_defect(self) -> float:
        """Worst violation of sigma_i >= sigma_hat_i >= sigma_{i+1}, scaled by sigma_1."""
        upper = np.max(self.sigma_hat - self.sigma[:-1], initial=0.0)
        lower = np.max(self.sigma[1:] - self.sigma_hat, initial=0.0)
        return max(upper, lower) / max(self.sigma[0], 1e-300)


@dataclass(frozen=True)
class GapDiagnostics:
    """Existence/uniqueness classification of a bundle."""

    gap_ok: bool            # sigma_{n+1} < sigma_hat_n
    nontrivial: bool        # sigma_{n+1} > 0
    rel_gap: float          # (sigma_hat_n - sigma_{n+1}) / sigma_hat_n
    ratio_sigma_n: float    # sigma_{n+1} / sigma_n
    ratio_sigma_hat_n: float  # sigma_{n+1} / sigma_hat_n

    @property
    def solvable(self) -> bool:
        return self.gap_ok and self.nontrivial


@dataclass(frozen=True)
class IdentityResiduals:
    """Scaled residuals of the three solution identities.

    optimal_value:   | ||r||^2/(1+||x||^2) - sigma_{n+1}^2 | / sigma_{n+1}^2
    gradient:        || A^T r - sigma_{n+1}^2 x || / (sigma_{n+1}^2 max(1, ||x||))
    singular_vector: || v_{n+1} - alpha [x; -1] ||  (after sign normalization)
    """

    optimal_value: float
    gradient: float
    singular_vector: float


@dataclass(frozen=True)
class TlsSolution:
    x: np.ndarray                 # (n,)
    r: np.ndarray                 # (m,), r = A x - b
    alpha: float                  # 1/sqrt(1 + ||x||^2), in (0, 1]
    last_right_vector: np.ndarray  # v_{n+1}, sign-normalized so last entry = -alpha
    identity_residuals: IdentityResiduals
    normal_eq_rel_diff: float | None  # None when the cross-check was skipped

    @property
    def norm_x(self) -> float:
        return float(np.linalg.norm(self.x))


@dataclass(frozen=True)
class ResidualReport:
    identities: IdentityResiduals
    gap_chain_lower: float | None  # |u_hat_n . b| / (2 ||x||)
    gap_chain_mid: float | None    # sigma_hat_n - sigma_{n+1}
    gap_chain_upper: float | None  # ||b|| / ||x||
    gap_chain_holds: bool | None   # None when x = 0 (chain not applicable)


def svd_bundle(problem: TlsProblem) -> SvdBundle:
    """Compute the thin SVDs of A and [A b] with descending singular values."""
    try:
        u_hat, sigma_hat, vt_hat = np.linalg.svd(problem.a_matrix, full_matrices=False)
        u_aug, sigma, vt_aug = np.linalg.svd(problem.augmented(), full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"SVD failed: {exc}") from exc
    return SvdBundle(sigma_hat, u_hat, vt_hat.T, sigma, u_aug, vt_aug.T)


def check_uniqueness(bundle: SvdBundle) -> GapDiagnostics:
    """Classify the gap condition 0 < sigma_{n+1} < sigma_hat_n."""
    sig_hat_n = float(bundle.sigma_hat[-1])
    sig_last = float(bundle.sigma[-1])
    sig_n = float(bundle.sigma[-2])
    return GapDiagnostics(
        gap_ok=sig_last < sig_hat_n,
        nontrivial=sig_last > 0.0,
        rel_gap=(sig_hat_n - sig_last) / sig_hat_n if sig_hat_n > 0 else 0.0,
        ratio_sigma_n=sig_last / sig_n if sig_n > 0 else 0.0,
        ratio_sigma_hat_n=sig_last / sig_hat_n if sig_hat_n > 0 else 0.0,
    )


def _identity_residuals(problem, bundle, x, r, alpha, v_last):
    sig2 = float(bundle.sigma[-1]) ** 2
    norm_x = np.linalg.norm(x)
    res_opt = abs(r @ r / (1.0 + norm_x**2) - sig2) / sig2
    res_grad = np.linalg.norm(problem.a_matrix.T @ r - sig2 * x) / (sig2 * max(1.0, norm_x))
    res_vec = np.linalg.norm(v_last - alpha * np.concatenate([x, [-1.0]]))
    return IdentityResiduals(float(res_opt), float(res_grad), float(res_vec))


def solve_tls(problem: TlsProblem, bundle: SvdBundle) -> TlsSolution:
    """Solve the TLS problem from its trailing right singular vector.

    Raises NoUniqueSolution when the gap fails, TrivialProblem when
    sigma_{n+1} = 0, and DegenerateVector when the vector's last entry is
    numerically zero despite a valid gap (an upstream SVD failure).
    """
    diag = check_uniqueness(bundle)
    if not diag.gap_ok:
        raise NoUniqueSolution(
            f"sigma_{{n+1}}={bundle.sigma[-1]:.6e} >= sigma_hat_n={bundle.sigma_hat[-1]:.6e}"
        )
    if not diag.nontrivial:
        raise TrivialProblem("sigma_{n+1} = 0: b in range(A), take [E r] = 0")

    v_last = bundle.v_aug[:, -1].copy()
    if abs(v_last[-1]) <= 1e-14:
        raise DegenerateVector("v_{n+1}(n+1) ~ 0 contradicts the gap condition")
    if v_last[-1] > 0:
        v_last = -v_last

    x = -v_last[:-1] / v_last[-1]
    alpha = 1.0 / np.hypot(1.0, np.linalg.norm(x))
    r = problem.a_matrix @ x - problem.b_vector

    normal_eq_rel_diff = None
    if diag.rel_gap >= CROSS_CHECK_MIN_REL_GAP:
        a = problem.a_matrix
        p = a.T @ a - bundle.sigma[-1] ** 2 * np.eye(problem.n)
        x_ne = np.linalg.solve(p, a.T @ problem.b_vector)
        normal_eq_rel_diff = float(
            np.linalg.norm(x_ne - x) / max(1.0, np.linalg.norm(x))
        )

    return TlsSolution(
        x=x,
        r=r,
        alpha=float(alpha),
        last_right_vector=v_last,
        identity_residuals=_identity_residuals(problem, bundle, x, r, alpha, v_last),
        normal_eq_rel_diff=normal_eq_rel_diff,
    )


def residual_diagnostics(
    problem: TlsProblem, bundle: SvdBundle, solution: TlsSolution
) -> ResidualReport:
    """Recheck the solution identities and the gap-enclosure chain.

    The chain |u_hat_n . b| / (2||x||) <= sigma_hat_n - sigma_{n+1} <= ||b||/||x||
    is only defined for x != 0; for x = 0 the verdict is None.
    """
    identities = _identity_residuals(
        problem, bundle, solution.x, solution.r, solution.alpha, solution.last_right_vector
    )
    norm_x = solution.norm_x
    if norm_x == 0.0:
        return ResidualReport(identities, None, None, None, None)
    lower = abs(bundle.u_hat[:, -1] @ problem.b_vector) / (2.0 * norm_x)
    mid = float(bundle.sigma_hat[-1] - bundle.sigma[-1])
    upper = float(np.linalg.norm(problem.b_vector)) / norm_x
    slack = 1e-12
    holds = lower <= mid * (1 + slack) + 1e-300 and mid <= upper * (1 + slack)
    return ResidualReport(identities, float(lower), mid, upper, bool(holds))
