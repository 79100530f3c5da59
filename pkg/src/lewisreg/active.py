"""End-to-end label-efficient LAD regression.

The pipeline: Lewis weights of the unlabeled design matrix -> sampling values
summing to the budget -> one sketch draw -> label queries for the drawn rows
only (deduplicated) -> weighted LAD on the sketched problem. The set of
queried indices depends only on (X, stream, budget), never on any label, so
the strategy is nonadaptive.

A known-label variant samples by the Lewis weights of the augmented matrix
[X y] instead, which sees label outliers and therefore carries the stronger
fixed-factor guarantee for eps < 1/3.
"""

from dataclasses import dataclass

import numpy as np

from .lad import LadProblem, l1_norm, solve_lad
from .lewis import LewisConfig, lewis_weights, recommended_budget, sampling_values
from .linalg import (
    WeightVector,
    as_design_matrix,
    as_vector,
    orthonormal_column_basis,
)
from .sketch import RngStream, Sketch, apply_to_columns, draw_sketch

__all__ = [
    "LabelOracle",
    "InMemoryLabelOracle",
    "FileBackedLabelOracle",
    "ActiveResult",
    "sample_and_solve",
    "active_solve",
    "sketch_and_solve_known_y",
    "relative_error_gap",
]


class LabelOracle:
    """Access path to the hidden labels: answers y_i one index at a time.

    Every call is logged; repeated queries of the same index return the cached
    first answer. Subclasses implement _lookup and report their length via n.
    """

    def __init__(self):
        self._cache: dict[int, float] = {}
        self.query_log: list[int] = []

    @property
    def query_count(self) -> int:
        return len(self.query_log)

    @property
    def n(self) -> int:
        raise NotImplementedError

    def _lookup(self, i: int) -> float:
        raise NotImplementedError

    def query(self, i: int) -> float:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"label index {i} out of range [0, {self.n})")
        self.query_log.append(i)
        if i not in self._cache:
            self._cache[i] = float(self._lookup(i))
        return self._cache[i]


class InMemoryLabelOracle(LabelOracle):
    """Oracle over an in-memory label vector (for experiments)."""

    def __init__(self, y):
        super().__init__()
        self._y = as_vector(y)

    @property
    def n(self) -> int:
        return self._y.shape[0]

    def _lookup(self, i: int) -> float:
        return self._y[i]


class FileBackedLabelOracle(LabelOracle):
    """Oracle over a labels file, one real per line, read lazily by offset.

    Construction scans the file once for line offsets without parsing any
    values; each distinct query then seeks and parses exactly one line.
    lines_read counts parsed label lines.
    """

    def __init__(self, path):
        super().__init__()
        self._path = str(path)
        self.lines_read = 0
        offsets = []
        with open(self._path, "rb") as fh:
            pos = 0
            for line in fh:
                if line.strip():
                    offsets.append(pos)
                pos += len(line)
        self._offsets = offsets

    @property
    def n(self) -> int:
        return len(self._offsets)

    def _lookup(self, i: int) -> float:
        with open(self._path, "rb") as fh:
            fh.seek(self._offsets[i])
            raw = fh.readline().strip()
        self.lines_read += 1
        try:
            return float(raw)
        except ValueError:
            raise ValueError(f"label line {i + 1} is not a real number: {raw!r}")


@dataclass(frozen=True)
class ActiveResult:
    beta_hat: np.ndarray
    n_draws: int
    labels_queried: int
    sketch: Sketch
    solver_status: str
    seed: tuple | None
    sketched_objective: float


def _solve_sketched(X: np.ndarray, oracle: LabelOracle, S: Sketch,
                    solver_tol: float) -> ActiveResult:
    distinct = np.unique(S.indices)
    answers = {int(i): oracle.query(int(i)) for i in distinct}
    y_draws = np.array([answers[int(i)] for i in S.indices])
    prob = LadProblem(X[S.indices], y_draws, row_weights=S.scales)
    sol = solve_lad(prob, tol=solver_tol)
    return ActiveResult(
        beta_hat=sol.beta,
        n_draws=S.n_draws,
        labels_queried=int(distinct.size),
        sketch=S,
        solver_status=sol.status,
        seed=S.seed,
        sketched_objective=sol.objective,
    )


def sample_and_solve(X, oracle: LabelOracle, values: WeightVector,
                     rng: RngStream, solver_tol: float = 1e-8) -> ActiveResult:
    """Draw a sketch from arbitrary sampling values, query the drawn labels,
    and solve the sketched problem. Used directly by baseline samplers."""
    X = as_design_matrix(X)
    if oracle.n != X.shape[0]:
        raise ValueError("oracle length does not match the design matrix")
    if values.kind != "sampling":
        raise ValueError("expected sampling values")
    N = int(round(values.budget))
    if N < X.shape[1]:
        raise ValueError(f"budget {N} below column count {X.shape[1]}; refused")
    S = draw_sketch(values, N, rng)
    return _solve_sketched(X, oracle, S, solver_tol)


def active_solve(X, oracle: LabelOracle, eps: float, delta: float,
                 rng: RngStream, regime: str = "high_prob",
                 budget_override: int | None = None,
                 lewis_cfg: LewisConfig = LewisConfig(),
                 solver_tol: float = 1e-8) -> ActiveResult:
    """Label-efficient LAD solve by Lewis-weight sampling.

    Computes the Lewis weights of X, scales them to sampling values summing to
    the budget (recommended_budget(d, eps, delta, regime) unless overridden),
    draws the sketch, queries each distinct drawn index once, and minimizes
    the reweighted sketched objective. Repeated draws of a row keep their
    multiplicity in the objective but cost a single label query.
    """
    X = as_design_matrix(X)
    n, d = X.shape
    if oracle.n != n:
        raise ValueError("oracle length does not match the design matrix")
    if not (0 < eps < 1) or not (0 < delta < 1):
        raise ValueError("eps and delta must lie in (0, 1)")
    w = lewis_weights(X, lewis_cfg)
    N = budget_override if budget_override is not None else recommended_budget(
        d, eps, delta, regime
    )
    if N < d:
        raise ValueError(f"budget {N} below column count {d}; refused")
    p = sampling_values(w, N)
    S = draw_sketch(p, N, rng)
    return _solve_sketched(X, oracle, S, solver_tol)


def sketch_and_solve_known_y(X, y, eps: float, delta: float, rng: RngStream,
                             regime: str = "high_prob",
                             budget_override: int | None = None,
                             enforce_guarantee: bool = True,
                             lewis_cfg: LewisConfig = LewisConfig(),
                             solver_tol: float = 1e-8) -> ActiveResult:
    """Sketch-and-solve with all labels available.

    Samples by the Lewis weights of the augmented matrix [X y], so rows whose
    labels dominate the residual geometry are seen by the sampler. For
    eps < 1/3 the sketched minimizer is within a (1 + 4 eps) factor; larger
    eps is refused unless enforce_guarantee=False.
    """
    X = as_design_matrix(X)
    y = as_vector(y, length=X.shape[0])
    n, d = X.shape
    if not (0 < eps < 1) or not (0 < delta < 1):
        raise ValueError("eps and delta must lie in (0, 1)")
    if enforce_guarantee and eps >= 1.0 / 3.0:
        raise ValueError("eps must be below 1/3 for the fixed-factor guarantee; "
                         "pass enforce_guarantee=False to sample anyway")
    aug = np.hstack([X, y[:, None]])
    # weights depend only on the column space, so a basis substitutes for
    # [X y] itself when y already lies in the span of X
    w = lewis_weights(orthonormal_column_basis(aug), lewis_cfg)
    N = budget_override if budget_override is not None else recommended_budget(
        d + 1, eps, delta, regime
    )
    if N < d:
        raise ValueError(f"budget {N} below column count {d}; refused")
    p = sampling_values(w, N)
    S = draw_sketch(p, N, rng)
    oracle = InMemoryLabelOracle(y)
    return _solve_sketched(X, oracle, S, solver_tol)


def relative_error_gap(X, y, S: Sketch, beta_star, beta) -> float:
    """Deviation of the sketched loss difference from the true loss difference,
    normalized by ||X (beta_star - beta)||_1 (0 when beta equals beta_star).

    The sketch cannot estimate either loss by itself, but it must preserve
    their difference; this is the quantity the harness validates.
    """
    X = as_design_matrix(X)
    y = as_vector(y, length=X.shape[0])
    beta_star = as_vector(beta_star, length=X.shape[1])
    beta = as_vector(beta, length=X.shape[1])
    denom = l1_norm(X @ (beta_star - beta))
    if denom == 0.0:
        return 0.0
    res_star = X @ beta_star - y
    res = X @ beta - y
    sketched = l1_norm(apply_to_columns(S, res_star)) - l1_norm(apply_to_columns(S, res))
    full = l1_norm(res_star) - l1_norm(res)
    return (sketched - full) / denom
