"""Two-sided bounds on the TLS condition number.

Five families, all cheap relative to the exact formulas:

* simple_sandwich: s_n/alpha <= kappa <= s_n/alpha^2. Ratio alpha^{-1} < 2
  whenever alpha > 1/2.
* sharp_sandwich: refines the sandwich with the last row [beta_1..beta_n,
  -alpha] of V; the enclosure ratio is below 4 whenever alpha <= 1/2, so
  together the two sandwiches pin kappa within a factor 4 for every x != 0.
* kappa1: sqrt(1+||x||^2) sqrt(sigma_hat_j^2 + sigma_{n+1}^2) /
  (sigma_hat_j^2 - sigma_{n+1}^2) with j = n-1 (lower, needs n >= 2) and
  j = n (upper).
* kappa2_lower: sqrt(1+||x||^2) / sqrt(sigma_hat_n^2 - sigma_{n+1}^2).
* kappa2_upper: multiplies kappa2_lower by sqrt((1+31 rho^2)/(1-rho^2)),
  rho = sigma_{n+1}/sigma_n; requires alpha <= 1/2.

The BHM quotient sigma_hat_1/(sigma_hat_n - sigma_{n+1}) is carried along as
a point estimate of the relative condition number; it certifies nothing and
is excluded from the sandwich verdicts.

Evaluation detail: sigma_hat_n^2 - sigma_{n+1}^2 equals the smallest
eigenvalue of P = A^T A - sigma_{n+1}^2 I = V11 Lambda V11^T, so
1/sqrt(sigma_hat_n^2 - sigma_{n+1}^2) = ||V11^{-T} T|| with T =
Lambda^{-1/2}. The kappa2 family and the sharp sandwich are computed through
the SVD of V11 in exactly this form. For well-separated spectra the two
readings agree to machine precision, but once sigma_hat_n - sigma_{n+1}
approaches the rounding floor the explicit difference of two independently
computed singular values carries an O(1) relative error, while the V11 route
keeps every certified inequality consistent with the reference kappa, which
is computed from the same decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SvdBundle, TlsSolution
from .errors import NotApplicable
from .exact import ExactFormulaWork, aug_frobenius, svd_condition
from .problem import TlsProblem

VERDICT_SLACK = 1e-9  # floating-point slack; the inequalities are strict

FAMILIES = (
    "simple_sandwich",
    "sharp_sandwich",
    "kappa1",
    "kappa2_lower",
    "kappa2_upper",
    "bhm",
)


@dataclass(frozen=True)
class BoundPair:
    lower: float | None
    upper: float | None
    family: str
    applicability_note: str = ""


@dataclass(frozen=True)
class BoundsReport:
    kappa_reference: float           # svd-formula kappa, the canonical value
    pairs: dict                      # family -> BoundPair (absolute scale)
    beta: np.ndarray                 # first n entries of the last row of V
    alpha: float
    rho: float                       # sigma_{n+1} / sigma_n
    rel_scale: float | None          # ||[A b]||_F / ||x||, None when x = 0
    sandwich_verdicts: dict          # family -> bool, certified families only
    sharpness_ratios: dict           # family -> upper/lower or None

    def relative_pairs(self) -> dict:
        """Bounds rescaled to the relative condition number.

        The BHM entry is kept as-is: the quotient already estimates the
        relative number directly.
        """
        out = {}
        for family, pair in self.pairs.items():
            if family == "bhm":
                out[family] = pair
                continue
            if self.rel_scale is None:
                out[family] = BoundPair(None, None, family, "x = 0: relative form undefined")
                continue
            out[family] = BoundPair(
                None if pair.lower is None else pair.lower * self.rel_scale,
                None if pair.upper is None else pair.upper * self.rel_scale,
                family,
                pair.applicability_note,
            )
        return out


def last_row_beta(bundle: SvdBundle) -> tuple[np.ndarray, float]:
    """Last row of V flipped so its final entry is -alpha; returns (beta, alpha)."""
    row = bundle.v_aug[-1, :].copy()
    if row[-1] > 0:
        row = -row
    return row[:-1], float(-row[-1])


def simple_sandwich(solution: TlsSolution, work: ExactFormulaWork) -> BoundPair:
    """s_n/alpha <= kappa <= s_n/alpha^2; collapses to equality at alpha = 1."""
    s_n = float(work.s_diag[-1])
    alpha = solution.alpha
    return BoundPair(s_n / alpha, s_n / alpha**2, "simple_sandwich")


def sharp_sandwich(
    solution: TlsSolution, bundle: SvdBundle, work: ExactFormulaWork
) -> BoundPair:
    """Sandwich from the last row of V; enclosure ratio < 4 when alpha <= 1/2.

    With beta_i the leading entries of that row,

        lower = (1/2) (a^{-2} ||beta o s|| / sqrt(1-a^2)
                       + a^{-1} s_n sqrt(1-a^2-beta_n^2) / sqrt(1-a^2))
        upper = a^{-2} ||beta o s|| / sqrt(1-a^2) + a^{-1} s_n.

    beta / sqrt(1-alpha^2) is the right singular vector of V11 for its
    smallest singular value alpha, so the expressions are evaluated in that
    form from work.v11_svd (see the module docstring).

    At x = 0 the general expressions are 0/0 (beta vanishes identically); all
    singular values of V11 are then 1 and kappa equals s_n exactly, so the
    degenerate pair (s_n, s_n) is returned.
    """
    s = work.s_diag
    s_n = float(s[-1])
    if solution.norm_x == 0.0:
        return BoundPair(s_n, s_n, "sharp_sandwich", "x = 0: exact value s_n")

    _, sv, vh = work.v11_svd
    v_bar_n = vh[-1, :]  # right singular vector of V11 for its smallest value
    a1_norm = float(np.linalg.norm(v_bar_n * s)) / float(sv[-1])
    tail = np.sqrt(max(1.0 - v_bar_n[-1] ** 2, 0.0))
    scale = np.hypot(1.0, solution.norm_x)
    lower = 0.5 * scale * (a1_norm + tail * s_n)
    upper = scale * (a1_norm + s_n)
    note = "ratio < 4 certified (alpha <= 1/2)" if solution.alpha <= 0.5 else ""
    return BoundPair(float(lower), float(upper), "sharp_sandwich", note)


def sv_bounds_kappa1(bundle: SvdBundle, solution: TlsSolution) -> BoundPair:
    """Bounds from sigma_hat_{n-1} (lower, n >= 2 only) and sigma_hat_n (upper)."""
    sig_last = float(bundle.sigma[-1])
    scale = np.hypot(1.0, solution.norm_x)

    def bound(sig_hat_j: float) -> float:
        gap = (sig_hat_j - sig_last) * (sig_hat_j + sig_last)
        return float(scale * np.sqrt(sig_hat_j**2 + sig_last**2) / gap)

    upper = bound(float(bundle.sigma_hat[-1]))
    if bundle.n >= 2:
        return BoundPair(bound(float(bundle.sigma_hat[-2])), upper, "kappa1")
    return BoundPair(None, upper, "kappa1", "n = 1: no sigma_hat_{n-1} for the lower bound")


def kappa2_dominance(bundle: SvdBundle) -> tuple[bool, bool]:
    """(general, simple) sufficient conditions for kappa1 lower <= kappa2 lower.

    General: sigma_hat_{n-1} >= sigma_{n+1} + sqrt(sigma_hat_n^2 - sigma_{n+1}^2).
    Simple:  sigma_hat_{n-1} >= 2 sigma_hat_n.
    Both are False for n = 1.
    """
    if bundle.n < 2:
        return False, False
    sig_last = float(bundle.sigma[-1])
    sig_hat_n = float(bundle.sigma_hat[-1])
    sig_hat_prev = float(bundle.sigma_hat[-2])
    root = np.sqrt(max((sig_hat_n - sig_last) * (sig_hat_n + sig_last), 0.0))
    return bool(sig_hat_prev >= sig_last + root), bool(sig_hat_prev >= 2.0 * sig_hat_n)


def _p_inv_sqrt_norm(bundle: SvdBundle) -> float:
    """1/sqrt(sigma_hat_n^2 - sigma_{n+1}^2), read as ||V11^{-T} Lambda^{-1/2}||."""
    n = bundle.n
    sig_last = float(bundle.sigma[-1])
    head = bundle.sigma[:-1]
    t_diag = 1.0 / np.sqrt((head - sig_last) * (head + sig_last))
    _, sv, vh = np.linalg.svd(bundle.v_aug[:n, :n].copy())
    return float(np.linalg.norm((vh * t_diag) / sv[:, None], 2))


def lower_kappa2(bundle: SvdBundle, solution: TlsSolution) -> BoundPair:
    """sqrt(1+||x||^2) / sqrt(sigma_hat_n^2 - sigma_{n+1}^2) as a lower bound."""
    value = float(np.hypot(1.0, solution.norm_x) * _p_inv_sqrt_norm(bundle))
    general, simple = kappa2_dominance(bundle)
    note = "dominates kappa1 lower" if general else ""
    if simple:
        note = "dominates kappa1 lower (sigma_hat_{n-1} >= 2 sigma_hat_n)"
    return BoundPair(value, None, "kappa2_lower", note)


def upper_kappa2(bundle: SvdBundle, solution: TlsSolution) -> BoundPair:
    """Amplifies the kappa2 lower bound by sqrt((1+31 rho^2)/(1-rho^2)).

    Only certified for alpha <= 1/2; raises NotApplicable otherwise.
    """
    alpha = solution.alpha
    if alpha > 0.5:
        raise NotApplicable(f"alpha={alpha:.4f} > 1/2: upper bound not certified")
    rho = float(bundle.sigma[-1] / bundle.sigma[-2])
    amp = float(np.sqrt((1.0 + 31.0 * rho**2) / ((1.0 - rho) * (1.0 + rho))))
    base = lower_kappa2(bundle, solution)
    return BoundPair(base.lower, base.lower * amp, "kappa2_upper", f"rho={rho:.4f}")


def bhm_approx(bundle: SvdBundle) -> BoundPair:
    """sigma_hat_1 / (sigma_hat_n - sigma_{n+1}), a heuristic point estimate."""
    value = float(bundle.sigma_hat[0] / (bundle.sigma_hat[-1] - bundle.sigma[-1]))
    return BoundPair(None, value, "bhm", "heuristic, no bound guarantee")


def bounds_report(
    problem: TlsProblem,
    bundle: SvdBundle,
    solution: TlsSolution,
    work: ExactFormulaWork,
) -> BoundsReport:
    """Evaluate every applicable family and compare against the svd kappa."""
    kappa_ref = svd_condition(work, bundle, solution).kappa_abs
    pairs = {
        "simple_sandwich": simple_sandwich(solution, work),
        "sharp_sandwich": sharp_sandwich(solution, bundle, work),
        "kappa1": sv_bounds_kappa1(bundle, solution),
        "kappa2_lower": lower_kappa2(bundle, solution),
    }
    try:
        pairs["kappa2_upper"] = upper_kappa2(bundle, solution)
    except NotApplicable as exc:
        pairs["kappa2_upper"] = BoundPair(None, None, "kappa2_upper", str(exc))
    pairs["bhm"] = bhm_approx(bundle)

    verdicts = {}
    ratios = {}
    for family, pair in pairs.items():
        if family != "bhm":
            ok_lower = pair.lower is None or pair.lower <= kappa_ref * (1.0 + VERDICT_SLACK)
            ok_upper = pair.upper is None or kappa_ref <= pair.upper * (1.0 + VERDICT_SLACK)
            verdicts[family] = bool(ok_lower and ok_upper)
        if pair.lower is not None and pair.upper is not None and pair.lower > 0:
            ratios[family] = float(pair.upper / pair.lower)
        else:
            ratios[family] = None

    beta, _ = last_row_beta(bundle)
    norm_x = solution.norm_x
    return BoundsReport(
        kappa_reference=float(kappa_ref),
        pairs=pairs,
        beta=beta,
        alpha=solution.alpha,
        rho=float(bundle.sigma[-1] / bundle.sigma[-2]),
        rel_scale=aug_frobenius(bundle) / norm_x if norm_x > 0 else None,
        sandwich_verdicts=verdicts,
        sharpness_ratios=ratios,
    )
