"""L1 Lewis weights by fixed-point iteration, plus their structural checks.

The weights w of a matrix X are defined implicitly by

    w_i^2 = x_i^T (sum_j (1/w_j) x_j x_j^T)^{-1} x_i.

The iteration replaces w by the square root of the right-hand side until the
identity holds to tolerance. Convergence is measured as the maximum relative
defect of the identity itself, not as successive-iterate distance, so a
returned vector certifies the definition directly.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg import (
    RankDeficiencyError,
    WeightVector,
    as_design_matrix,
    equilibrate_columns,
    gram_weighted,
    row_quadratic_forms,
    spd_factorize,
)

__all__ = [
    "LewisConfig",
    "ConvergenceError",
    "lewis_weights",
    "verify_fixed_point",
    "MonotonicityCheck",
    "check_row_addition_monotonicity",
    "sampling_values",
    "recommended_budget",
]


class ConvergenceError(RuntimeError):
    """Fixed-point iteration failed to reach tolerance within max_iters."""

    def __init__(self, msg: str, residual: float):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class LewisConfig:
    max_iters: int = 200
    tol: float = 1e-10
    zero_row_policy: str = "exclude"

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.zero_row_policy != "exclude":
            raise ValueError("only the 'exclude' zero-row policy is supported")


def _fixed_point_defect(X: np.ndarray, w: np.ndarray) -> tuple[float, np.ndarray]:
    """Max relative defect of the defining identity, and the quadratic forms."""
    G = gram_weighted(X, w)
    F = spd_factorize(G)
    q = row_quadratic_forms(F, X)
    w2 = w * w
    defect = np.abs(w2 - q) / np.maximum(w2, 1e-30)
    return float(defect.max()), q


def lewis_weights(X, cfg: LewisConfig = LewisConfig()) -> WeightVector:
    """Compute the L1 Lewis weights of X.

    Parameters
    ----------
    X : array_like, shape (n, d)
        Full column rank after all-zero rows are removed.
    cfg : LewisConfig
        Iteration budget and the fixed-point residual threshold.

    Returns
    -------
    WeightVector with kind "lewis": entries in (0, 1] for nonzero rows, exactly
    0 for all-zero rows, summing to d over the nonzero rows.

    Raises
    ------
    RankDeficiencyError
        If the nonzero rows do not span all d columns to pivot tolerance.
    ConvergenceError
        If the residual is still above tolerance after max_iters sweeps.
    """
    X = as_design_matrix(X)
    n, d = X.shape
    nonzero = np.abs(X).max(axis=1) > 0
    Xa = X[nonzero]
    if Xa.shape[0] < d:
        raise RankDeficiencyError("fewer nonzero rows than columns")
    Xa = equilibrate_columns(Xa)  # weights are column-scaling invariant

    w = np.ones(Xa.shape[0])
    residual = math.inf
    for _ in range(cfg.max_iters):
        residual, q = _fixed_point_defect(Xa, w)
        if residual <= cfg.tol:
            break
        w = np.sqrt(q)
    else:
        raise ConvergenceError(
            f"Lewis weight iteration did not converge in {cfg.max_iters} sweeps "
            f"(final residual {residual:.3e}, tol {cfg.tol:.1e})",
            residual,
        )

    full = np.zeros(n)
    full[nonzero] = w
    return WeightVector(full, kind="lewis")


def verify_fixed_point(X, w) -> float:
    """Max relative defect of the Lewis identity for a candidate weight vector.

    Pure check: zero rows must carry weight 0, nonzero rows positive weight.
    """
    X = as_design_matrix(X)
    wv = w.values if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64)
    if wv.shape[0] != X.shape[0]:
        raise ValueError("weight length does not match row count")
    nonzero = np.abs(X).max(axis=1) > 0
    if np.any(wv[nonzero] <= 0):
        raise ValueError("weights must be positive on nonzero rows")
    defect, _ = _fixed_point_defect(equilibrate_columns(X[nonzero]), wv[nonzero])
    return defect


class MonotonicityCheck(NamedTuple):
    ok: bool
    max_violation: float


def check_row_addition_monotonicity(X, extra_rows, *, slack: float = 1e-7,
                                    cfg: LewisConfig = LewisConfig()) -> MonotonicityCheck:
    """Do the original rows' Lewis weights stay put or drop when rows are added?

    Returns (ok, max_violation) where the violation is the largest increase of
    any original row's weight in the stacked matrix; ok means it is <= slack.
    """
    X = as_design_matrix(X)
    extra = np.asarray(extra_rows, dtype=np.float64)
    if extra.size == 0:
        extra = extra.reshape(0, X.shape[1])
    if extra.ndim != 2 or extra.shape[1] != X.shape[1]:
        raise ValueError("extra rows must have the same column count as X")
    w_before = lewis_weights(X, cfg).values
    w_after = lewis_weights(np.vstack([X, extra]), cfg).values[: X.shape[0]]
    violation = float(np.max(w_after - w_before))
    return MonotonicityCheck(ok=violation <= slack, max_violation=violation)


def sampling_values(w: WeightVector, N: int) -> WeightVector:
    """Scale an importance vector to sampling values summing to the budget N."""
    if not isinstance(w, WeightVector):
        raise TypeError("sampling_values expects a WeightVector")
    if w.kind == "sampling":
        raise ValueError("input already holds sampling values")
    if N < 1:
        raise ValueError("budget must be at least 1")
    total = w.total
    if total <= 0:
        raise ValueError("importance values sum to zero")
    return WeightVector(w.values * (N / total), kind="sampling", budget=float(N))


def recommended_budget(d: int, eps: float, delta: float,
                       regime: str = "high_prob", C: float = 4.0) -> int:
    """Row budget for the sampling sketch.

    high_prob:      ceil(C * d/eps^2 * log(d/(eps*delta)))
    constant_prob:  ceil(C * d * log(max(d,2)) / eps^2)

    C absorbs the constants hidden by the asymptotic statements; the default of
    4 is an artifact choice meant to be swept by the experiment harness.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    if C <= 0:
        raise ValueError("C must be positive")
    if regime == "high_prob":
        value = C * d / eps**2 * math.log(d / (eps * delta))
    elif regime == "constant_prob":
        value = C * d * math.log(max(d, 2)) / eps**2
    else:
        raise ValueError(f"unknown regime {regime!r}")
    return int(math.ceil(value))
