"""Exact TLS condition numbers by four independent formulas.

All formulas target the absolute condition number of the map from the
stacked data (vec A, b) to the solution x; the relative number rescales by
||[A b]||_F / ||x||. The four routes:

* kronecker: spectral norm of the explicit first-order map K, an
  n x m(n+1) matrix acting on [vec(dA); db] with column-stacked vec.
* cholesky: sqrt(1+||x||^2) * ||P^{-1} L|| with P = A^T A - sigma_{n+1}^2 I
  and L L^T the Cholesky factorization of
  C = A^T A + sigma_{n+1}^2 I - 2 sigma_{n+1}^2 x x^T / (1+||x||^2).
* svd: sqrt(1+||x||^2) * ||V11^{-T} S|| with V11 the leading n x n block of
  the right singular factor of [A b] and S diagonal with entries
  s_i = sqrt(sigma_i^2 + sigma_{n+1}^2) / (sigma_i^2 - sigma_{n+1}^2).
* baboulin: sqrt(1+||x|^2) * ||Dhat [Vhat^T 0] V [D 0]^T||, a comparison
  formula that also needs the SVD of A.

The svd route is the reference: it stays accurate when sigma_hat_n and
sigma_{n+1} nearly coincide, where the P-based routes break down. Those are
gated at relative gap 1e-6 (hard IllConditionedGap) and 1e-3 (warning).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .core import SvdBundle, TlsSolution, check_uniqueness
from .errors import (
    FactorizationError,
    IllConditionedGap,
    SingularBlock,
    TrivialProblem,
)
from .problem import TlsProblem

HARD_GAP_LIMIT = 1e-6
WARN_GAP_LIMIT = 1e-3


@dataclass(frozen=True)
class ExactFormulaWork:
    """Shared working matrices for the condition formulas.

    k_matrix and g_of_x are None when only the spectral parts were assembled
    (build_spectral_work); build_k_matrix fills them in. v11_svd carries the
    SVD of the v11 block; the reference formula and the gap-sensitive bounds
    all apply V11^{-T} through it so that their rounding errors cancel in
    enclosure comparisons.
    """

    k_matrix: np.ndarray | None   # (n, m(n+1)) first-order map
    g_of_x: np.ndarray | None     # (m, m(n+1)) block [x^T -1] (x) I_m
    p_matrix: np.ndarray          # (n, n) A^T A - sigma_{n+1}^2 I
    c_matrix: np.ndarray          # (n, n) Cholesky target, positive definite
    l_factor: np.ndarray | None   # lower-triangular L with C = L L^T
    v11: np.ndarray               # (n, n) leading block of V
    v11_svd: tuple                # (u_bar, sv, vh): v11 = u_bar @ diag(sv) @ vh
    s_diag: np.ndarray            # (n,) ascending weights s_i
    d_hat: np.ndarray             # (n,) 1 / (sigma_hat_i^2 - sigma_{n+1}^2)
    d_b: np.ndarray               # (n,) sqrt(sigma_i^2 + sigma_{n+1}^2)
    lambda_diag: np.ndarray       # (n,) sigma_i^2 - sigma_{n+1}^2

    def apply_v11_inv_t(self, diag: np.ndarray) -> np.ndarray:
        """V11^{-T} diag(d) up to an orthogonal left factor.

        V11^{-T} = u_bar diag(1/sv) vh, so dropping u_bar leaves the n x n
        matrix (vh * d) / sv[:, None] with the same singular values as the
        target.
        """
        _, sv, vh = self.v11_svd
        return (vh * diag) / sv[:, None]


@dataclass(frozen=True)
class ConditionEstimate:
    kappa_abs: float
    kappa_rel: float | None       # None when x = 0
    method: str                   # kronecker | cholesky | svd | baboulin
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class V11Analysis:
    singular_values: np.ndarray   # descending; expected (1, ..., 1, alpha)
    kappa_v11: float              # expected sqrt(1 + ||x||^2)
    alpha_from_v11: float         # smallest singular value


def aug_frobenius(bundle: SvdBundle) -> float:
    """||[A b]||_F from the singular values."""
    return float(np.linalg.norm(bundle.sigma))


def _relative(kappa_abs: float, bundle: SvdBundle, solution: TlsSolution) -> float | None:
    norm_x = solution.norm_x
    if norm_x == 0.0:
        return None
    return kappa_abs * aug_frobenius(bundle) / norm_x


def build_spectral_work(
    problem: TlsProblem, bundle: SvdBundle, solution: TlsSolution
) -> ExactFormulaWork:
    """Assemble every working matrix except the explicit K (cheap for large m)."""
    n = problem.n
    a = problem.a_matrix
    x = solution.x
    sig_last = float(bundle.sigma[-1])
    sig2 = sig_last**2

    ata = a.T @ a
    p = ata - sig2 * np.eye(n)
    c = ata + sig2 * np.eye(n) - (2.0 * sig2 / (1.0 + x @ x)) * np.outer(x, x)
    try:
        l_factor = scipy.linalg.cholesky(c, lower=True)
    except scipy.linalg.LinAlgError:
        l_factor = None

    # Differences of squares in factored form: sigma_i - sigma_{n+1} > 0 is
    # guaranteed by the gap check, while sigma_i**2 - sig2 can round to zero.
    head = bundle.sigma[:-1]
    lam = (head - sig_last) * (head + sig_last)
    s_diag = np.sqrt(head**2 + sig2) / lam
    d_hat = 1.0 / ((bundle.sigma_hat - sig_last) * (bundle.sigma_hat + sig_last))
    d_b = np.sqrt(head**2 + sig2)

    v11 = bundle.v_aug[:n, :n].copy()
    return ExactFormulaWork(
        k_matrix=None,
        g_of_x=None,
        p_matrix=p,
        c_matrix=c,
        l_factor=l_factor,
        v11=v11,
        v11_svd=np.linalg.svd(v11),
        s_diag=s_diag,
        d_hat=d_hat,
        d_b=d_b,
        lambda_diag=lam,
    )


def build_k_matrix(
    problem: TlsProblem, bundle: SvdBundle, solution: TlsSolution
) -> ExactFormulaWork:
    """Assemble the explicit first-order map K on top of the spectral parts.

    Column layout: the first m*n columns act on vec(dA) with columns stacked
    first, the trailing m columns act on db.
    """
    if bundle.sigma[-1] == 0.0:
        raise TrivialProblem("r = 0: the first-order map is not defined")
    work = build_spectral_work(problem, bundle, solution)
    m, n = problem.m, problem.n
    a = problem.a_matrix
    r = solution.r
    x = solution.x

    g_of_x = np.kron(np.concatenate([x, [-1.0]]), np.eye(m))
    r_unit = r / np.linalg.norm(r)
    rhs = (
        2.0 * np.outer(a.T @ r_unit, r_unit @ g_of_x)
        - a.T @ g_of_x
        - np.hstack([np.kron(np.eye(n), r), np.zeros((n, m))])
    )
    k_matrix = np.linalg.solve(work.p_matrix, rhs)
    return replace(work, k_matrix=k_matrix, g_of_x=g_of_x)


def kron_condition(
    work: ExactFormulaWork, problem: TlsProblem, solution: TlsSolution
) -> ConditionEstimate:
    """kappa = ||K|| via the explicit Kronecker-form map."""
    if work.k_matrix is None:
        raise ValueError("K not assembled; use build_k_matrix")
    kappa = float(np.linalg.norm(work.k_matrix, 2))
    norm_x = solution.norm_x
    aug_f = float(np.sqrt(np.linalg.norm(problem.a_matrix) ** 2
                          + np.linalg.norm(problem.b_vector) ** 2))
    kappa_rel = kappa * aug_f / norm_x if norm_x > 0 else None
    return ConditionEstimate(kappa, kappa_rel, "kronecker")


def cholesky_condition(
    work: ExactFormulaWork,
    problem: TlsProblem,
    bundle: SvdBundle,
    solution: TlsSolution,
) -> ConditionEstimate:
    """kappa = sqrt(1+||x||^2) ||P^{-1} L|| via triangular solves against P.

    Raises IllConditionedGap below relative gap 1e-6, where P is numerically
    singular and the result would be meaningless.
    """
    diag = check_uniqueness(bundle)
    if diag.rel_gap < HARD_GAP_LIMIT:
        raise IllConditionedGap(
            f"rel_gap={diag.rel_gap:.3e} < {HARD_GAP_LIMIT}: P is numerically singular"
        )
    if work.l_factor is None:
        raise FactorizationError("C lost positive definiteness numerically")
    try:
        p_factor = scipy.linalg.cholesky(work.p_matrix, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise FactorizationError(f"P lost positive definiteness: {exc}") from exc
    y = scipy.linalg.solve_triangular(p_factor, work.l_factor, lower=True)
    y = scipy.linalg.solve_triangular(p_factor.T, y, lower=False)
    kappa = float(np.hypot(1.0, solution.norm_x) * np.linalg.norm(y, 2))
    warnings = ()
    if diag.rel_gap < WARN_GAP_LIMIT:
        warnings = (f"rel_gap={diag.rel_gap:.3e} < {WARN_GAP_LIMIT}: P nearly singular",)
    return ConditionEstimate(kappa, _relative(kappa, bundle, solution), "cholesky", warnings)


def svd_condition(
    work: ExactFormulaWork, bundle: SvdBundle, solution: TlsSolution
) -> ConditionEstimate:
    """kappa = sqrt(1+||x||^2) ||V11^{-T} S||, the reference formula.

    V11^{-T} is applied through the SVD of the n x n block (P is never
    formed or inverted), so the result stays reliable for arbitrarily small
    gaps and shares its rounding profile with the sandwich bounds, which are
    built from the same decomposition.
    """
    sv = work.v11_svd[1]
    if sv[-1] <= 0.0 or not np.isfinite(sv[-1]):
        raise SingularBlock("V11 numerically singular: smallest singular value is 0")
    y = work.apply_v11_inv_t(work.s_diag)
    kappa = float(np.hypot(1.0, solution.norm_x) * np.linalg.norm(y, 2))
    return ConditionEstimate(kappa, _relative(kappa, bundle, solution), "svd")


def baboulin_condition(
    work: ExactFormulaWork, bundle: SvdBundle, solution: TlsSolution
) -> ConditionEstimate:
    """Comparison formula using both SVDs.

    kappa = sqrt(1+||x||^2) ||Dhat [Vhat^T 0] V [D 0]^T||. The Dhat entries
    blow up as sigma_hat_n -> sigma_{n+1}, so the same gap gates apply as for
    the cholesky route.
    """
    diag = check_uniqueness(bundle)
    if diag.rel_gap < HARD_GAP_LIMIT:
        raise IllConditionedGap(
            f"rel_gap={diag.rel_gap:.3e} < {HARD_GAP_LIMIT}: Dhat entries unreliable"
        )
    n = bundle.n
    zeros = np.zeros((n, 1))
    left = np.hstack([bundle.v_hat.T, zeros])
    right = np.hstack([np.diag(work.d_b), zeros]).T
    core = work.d_hat[:, None] * (left @ bundle.v_aug @ right)
    kappa = float(np.hypot(1.0, solution.norm_x) * np.linalg.norm(core, 2))
    warnings = ()
    if diag.rel_gap < WARN_GAP_LIMIT:
        warnings = (f"rel_gap={diag.rel_gap:.3e} < {WARN_GAP_LIMIT}: Dhat nearly singular",)
    return ConditionEstimate(kappa, _relative(kappa, bundle, solution), "baboulin", warnings)


def v11_spectrum(bundle: SvdBundle, solution: TlsSolution) -> V11Analysis:
    """Singular values of the leading n x n block of V: (1, ..., 1, alpha)."""
    n = bundle.n
    sv = np.linalg.svd(bundle.v_aug[:n, :n], compute_uv=False)
    return V11Analysis(
        singular_values=sv,
        kappa_v11=float(sv[0] / sv[-1]),
        alpha_from_v11=float(sv[-1]),
    )
