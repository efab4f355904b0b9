"""Empirical validation of the first-order perturbation theory.

A perturbation direction is a unit-Frobenius pair (dA, db). For a step t the
observed sensitivity is ||x(A + t dA, b + t db) - x(A, b)|| / t, where the
perturbed problem is re-solved from scratch through the SVD solver so the
measurement is independent of the formulas under test. As t -> 0 the ratio
approaches ||K z|| for the stacked direction z, is maximized over unit z by
the condition number, and attains it along the top right singular vector
of K.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import check_uniqueness, solve_tls, svd_bundle
from .errors import PerturbationTooLarge
from .exact import ExactFormulaWork, build_k_matrix, svd_condition
from .problem import TlsProblem

# Perturbed relative gap must keep this fraction of the base gap.
GAP_PERSISTENCE = 1e-3
# Steps below this multiple of ||[A b]||_F measure rounding, not the map.
CLEAN_STEP_FLOOR = 1e-12

VALIDATION_COLUMNS = (
    "label",
    "kappa",
    "max_ratio",
    "worst_direction_ratio",
    "trials",
    "step",
    "sound",
    "attained",
)


@dataclass(frozen=True)
class PerturbationDirection:
    """A pair (dA, db) with unit stacked Frobenius norm."""

    delta_a: np.ndarray
    delta_b: np.ndarray

    @classmethod
    def normalized(cls, delta_a, delta_b) -> "PerturbationDirection":
        delta_a = np.asarray(delta_a, dtype=float)
        delta_b = np.asarray(delta_b, dtype=float)
        scale = np.sqrt(np.linalg.norm(delta_a) ** 2 + np.linalg.norm(delta_b) ** 2)
        if scale == 0.0:
            raise ValueError("zero direction")
        return cls(delta_a / scale, delta_b / scale)

    def stacked(self) -> np.ndarray:
        """[vec(dA); db] with column-stacked vec, matching K's column order."""
        return np.concatenate([self.delta_a.ravel(order="F"), self.delta_b])

    def frobenius(self) -> float:
        return float(np.sqrt(np.linalg.norm(self.delta_a) ** 2
                             + np.linalg.norm(self.delta_b) ** 2))


@dataclass(frozen=True)
class ConvergencePoint:
    t: float
    ratio: float
    remainder: float   # |ratio - ||K z|||
    clean: bool        # above the rounding floor, usable for the slope fit


@dataclass(frozen=True)
class ValidationSummary:
    kappa_reference: float
    max_observed_ratio: float | None   # None when trials = 0
    worst_direction_ratio: float
    trials: int
    step: float
    convergence_slopes: tuple          # (t, remainder) pairs along the worst direction
    tolerance: float

    @property
    def sound(self) -> bool:
        """No observed ratio exceeds kappa within tolerance."""
        bound = self.kappa_reference * (1.0 + self.tolerance)
        observed = self.worst_direction_ratio
        if self.max_observed_ratio is not None:
            observed = max(observed, self.max_observed_ratio)
        return observed <= bound

    @property
    def attained(self) -> bool:
        """The worst direction reaches kappa within tolerance."""
        return self.worst_direction_ratio >= self.kappa_reference * (1.0 - self.tolerance)

    def report_row(self, label: str) -> dict:
        """Flatten into a row keyed by VALIDATION_COLUMNS for a ReportDocument."""
        return {
            "label": label,
            "kappa": self.kappa_reference,
            "max_ratio": self.max_observed_ratio,
            "worst_direction_ratio": self.worst_direction_ratio,
            "trials": float(self.trials),
            "step": self.step,
            "sound": 1.0 if self.sound else 0.0,
            "attained": 1.0 if self.attained else 0.0,
        }


def random_direction(m: int, n: int, rng) -> PerturbationDirection:
    """Uniform direction on the unit Frobenius sphere of stacked pairs."""
    rng = np.random.default_rng(rng)
    return PerturbationDirection.normalized(
        rng.standard_normal((m, n)), rng.standard_normal(m)
    )


def first_order_prediction(
    work: ExactFormulaWork,
    solution,
    direction: PerturbationDirection,
    t: float,
) -> np.ndarray:
    """x + t K [vec(dA); db], the linearized solution at step t."""
    if work.k_matrix is None:
        raise ValueError("K not assembled; use build_k_matrix")
    return solution.x + t * (work.k_matrix @ direction.stacked())


def _solve(problem: TlsProblem):
    bundle = svd_bundle(problem)
    return bundle, check_uniqueness(bundle), solve_tls(problem, bundle)


def _perturbed_ratio(problem, base_diag, base_x, direction, t):
    perturbed = TlsProblem(
        problem.a_matrix + t * direction.delta_a,
        problem.b_vector + t * direction.delta_b,
        label=problem.label + "+perturbation",
    )
    pert_bundle = svd_bundle(perturbed)
    pert_diag = check_uniqueness(pert_bundle)
    if not (pert_diag.gap_ok and pert_diag.nontrivial):
        raise PerturbationTooLarge(f"gap lost at t={t:.3e}")
    if pert_diag.rel_gap < GAP_PERSISTENCE * base_diag.rel_gap:
        raise PerturbationTooLarge(
            f"rel_gap collapsed from {base_diag.rel_gap:.3e} to {pert_diag.rel_gap:.3e}"
        )
    pert_solution = solve_tls(perturbed, pert_bundle)
    return float(np.linalg.norm(pert_solution.x - base_x) / t)


def perturbation_ratio(problem: TlsProblem, direction: PerturbationDirection, t: float) -> float:
    """||x_perturbed - x|| / t with the perturbed problem solved exactly."""
    if t <= 0:
        raise ValueError("step t must be positive")
    _, base_diag, base_solution = _solve(problem)
    return _perturbed_ratio(problem, base_diag, base_solution.x, direction, t)


def worst_direction(work: ExactFormulaWork) -> PerturbationDirection:
    """Unit direction attaining ||K||: the top right singular vector of K."""
    if work.k_matrix is None:
        raise ValueError("K not assembled; use build_k_matrix")
    n = work.k_matrix.shape[0]
    m = work.k_matrix.shape[1] // (n + 1)
    top = np.linalg.svd(work.k_matrix)[2][0]
    return PerturbationDirection.normalized(
        top[: m * n].reshape((m, n), order="F"), top[m * n:]
    )


def convergence_study(problem: TlsProblem, direction: PerturbationDirection, t_list):
    """Observed ratio and first-order remainder across decreasing steps.

    remainder(t) = |ratio(t) - ||K z|||, which decays linearly in t until
    rounding dominates; points with t below the floor are flagged not-clean
    and left out of slope fits.
    """
    bundle, base_diag, base_solution = _solve(problem)
    work = build_k_matrix(problem, bundle, base_solution)
    predicted = float(np.linalg.norm(work.k_matrix @ direction.stacked()))
    floor = CLEAN_STEP_FLOOR * float(np.linalg.norm(bundle.sigma))
    points = []
    for t in t_list:
        ratio = _perturbed_ratio(problem, base_diag, base_solution.x, direction, t)
        points.append(
            ConvergencePoint(
                t=float(t),
                ratio=ratio,
                remainder=abs(ratio - predicted),
                clean=t >= floor,
            )
        )
    return points


def remainder_slope(points) -> float:
    """Least-squares log-log slope of remainder vs t over the clean points."""
    ts = [p.t for p in points if p.clean and p.remainder > 0.0]
    rs = [p.remainder for p in points if p.clean and p.remainder > 0.0]
    if len(ts) < 2:
        return float("nan")
    return float(np.polyfit(np.log(ts), np.log(rs), 1)[0])


def monte_carlo_validate(
    problem: TlsProblem,
    trials: int,
    t: float | None = None,
    seed: int = 0,
    tolerance: float = 1e-3,
) -> ValidationSummary:
    """Random-direction soundness sweep plus the worst-direction probe.

    Each trial derives its own generator from (seed, trial index), so the
    summary does not depend on execution order. The default step is
    1e-8 ||[A b]||_F, balancing the Taylor remainder against rounding.
    """
    bundle, base_diag, base_solution = _solve(problem)
    work = build_k_matrix(problem, bundle, base_solution)
    if t is None:
        t = 1e-8 * float(np.linalg.norm(bundle.sigma))

    ratios = []
    for index in range(trials):
        rng = np.random.default_rng([seed, index])
        direction = random_direction(problem.m, problem.n, rng)
        ratios.append(_perturbed_ratio(problem, base_diag, base_solution.x, direction, t))

    worst = worst_direction(work)
    worst_ratio = _perturbed_ratio(problem, base_diag, base_solution.x, worst, t)

    predicted = float(np.linalg.norm(work.k_matrix @ worst.stacked()))
    slopes = []
    for factor in (1e3, 1e2, 1e1):
        try:
            ratio = _perturbed_ratio(problem, base_diag, base_solution.x, worst, factor * t)
        except PerturbationTooLarge:
            continue
        slopes.append((factor * t, abs(ratio - predicted)))

    return ValidationSummary(
        kappa_reference=svd_condition(work, bundle, base_solution).kappa_abs,
        max_observed_ratio=max(ratios) if ratios else None,
        worst_direction_ratio=worst_ratio,
        trials=trials,
        step=float(t),
        convergence_slopes=tuple(slopes),
        tolerance=tolerance,
    )
