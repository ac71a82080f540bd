"""Non-negative RB matrix factorization by alternating projected gradients.

Given a target with entrywise non-negative blocks, the factorization
finds ``W`` (all four blocks non-negative) and ``H`` (only the real and
j blocks present, both non-negative) minimizing

    f(W, H) = 0.5 * ||X - W @ H||_F^2.

Two solvers share one alternating loop and differ only in how the Armijo
step search picks its trial steps:

* ``rbpg``  restarts the backtracking search at step 1 every iteration
  and shrinks by the factor ``mu`` until the sufficient-decrease test
  passes.
* ``rbipg`` warm-starts from the previous accepted step and scales it up
  or down by the factor ``delta``, keeping the largest passing value.

Both project onto the feasible sets after every trial step, so all
iterates are feasible and the recorded objective never increases.  The
same machinery, restricted to the real block, provides the plain
non-negative matrix factorization baseline used per color channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .matrix import RBMatrix, matmul, re_inner


class ConfigError(ValueError):
    """A solver configuration violates its invariants."""


class FeasibilityError(ValueError):
    """An operand lies outside the required feasible set."""


VARIANTS = ("rbpg", "rbipg")
REPRESENTATIONS = ("full", "pure")


@dataclass
class SolverConfig:
    """Hyperparameters for the alternating projected-gradient solvers.

    ``rank`` is the inner dimension of the factorization and must satisfy
    ``0 < rank < min(rows, cols)`` of the target.  ``mu`` is the
    backtracking shrink factor, ``sigma`` the sufficient-decrease slope,
    ``delta`` the adaptive scaling factor, ``armijo_cap`` the trial
    budget per step search and ``step_floor`` the smallest admissible
    step before the search reports stagnation.
    """

    rank: int
    tol: float = 1e-4
    max_iters: int = 500
    mu: float = 0.1
    sigma: float = 0.001
    delta: float = 10.0
    seed: int = 0
    armijo_cap: int = 50
    step_floor: float = 1e-20
    variant: str = "rbipg"
    representation: str = "full"

    def __post_init__(self) -> None:
        if self.rank <= 0:
            raise ConfigError(f"rank must be positive, got {self.rank}")
        if not self.tol > 0.0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not 0.0 < self.mu < 1.0:
            raise ConfigError(f"mu must lie in (0, 1), got {self.mu}")
        if not 0.0 < self.sigma < 1.0:
            raise ConfigError(f"sigma must lie in (0, 1), got {self.sigma}")
        if not self.delta > 1.0:
            raise ConfigError(f"delta must exceed 1, got {self.delta}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.armijo_cap < 1:
            raise ConfigError(f"armijo_cap must be >= 1, got {self.armijo_cap}")
        if not self.step_floor > 0.0:
            raise ConfigError(f"step_floor must be positive, got {self.step_floor}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.representation not in REPRESENTATIONS:
            raise ConfigError(
                f"representation must be one of {REPRESENTATIONS}, "
                f"got {self.representation!r}")

    def check_rank(self, rows: int, cols: int) -> None:
        if not self.rank < min(rows, cols):
            raise ConfigError(
                f"rank {self.rank} must be < min{(rows, cols)} of the target")


@dataclass
class IterationRecord:
    """One completed outer iteration (iteration 0 is the initial state)."""

    iteration: int
    objective: float
    res: float
    alpha: float
    beta: float
    rel_change: float
    armijo_evals: int


@dataclass
class FactorizationResult:
    W: RBMatrix
    H: RBMatrix
    history: list[IterationRecord]
    status: str  # "converged" | "max_iters" | "stagnated"


@dataclass
class RealFactorizationResult:
    W: np.ndarray
    H: np.ndarray
    history: list[IterationRecord]
    status: str


Observer = Callable[[IterationRecord, RBMatrix, RBMatrix], None]


# -- objective, gradients, projections ---------------------------------------

def objective(X: RBMatrix, W: RBMatrix, H: RBMatrix) -> float:
    """0.5 * squared Frobenius norm of the reconstruction error."""
    r = (X - matmul(W, H)).norm()
    return 0.5 * r * r


def grad_w(X: RBMatrix, W: RBMatrix, H: RBMatrix) -> RBMatrix:
    """Gradient of the objective in W: (W H - X) H^H."""
    return matmul(matmul(W, H) - X, H.hermitian())


def grad_h(X: RBMatrix, W: RBMatrix, H: RBMatrix) -> RBMatrix:
    """Gradient of the objective in H: W^H (W H - X)."""
    return matmul(W.hermitian(), matmul(W, H) - X)


def project_nonneg(q: RBMatrix) -> RBMatrix:
    """Clamp every block at zero (nearest point with all blocks >= 0)."""
    return RBMatrix._wrap(*(np.maximum(b, 0.0) for b in q.blocks()))


def project_nonneg_j(q: RBMatrix) -> RBMatrix:
    """Clamp q0 and q2 at zero and drop the i and k blocks entirely."""
    z = np.zeros(q.shape)
    return RBMatrix._wrap(np.maximum(q.q0, 0.0), z, np.maximum(q.q2, 0.0),
                          z.copy())


def armijo_condition_w(W_new: RBMatrix, W_old: RBMatrix, H: RBMatrix,
                       X: RBMatrix, sigma: float) -> bool:
    """Sufficient-decrease test for a W update at fixed H."""
    lhs = objective(X, W_new, H) - objective(X, W_old, H)
    rhs = sigma * re_inner(grad_w(X, W_old, H), W_new - W_old)
    return lhs <= rhs


def armijo_condition_h(H_new: RBMatrix, H_old: RBMatrix, W: RBMatrix,
                       X: RBMatrix, sigma: float) -> bool:
    """Sufficient-decrease test for an H update at fixed W."""
    lhs = objective(X, W, H_new) - objective(X, W, H_old)
    rhs = sigma * re_inner(grad_h(X, W, H_old), H_new - H_old)
    return lhs <= rhs


# -- feasibility ---------------------------------------------------------------

def is_nonneg(q: RBMatrix) -> bool:
    return all(b.min() >= 0.0 for b in q.blocks())


def is_nonneg_j(q: RBMatrix) -> bool:
    return (q.q0.min() >= 0.0 and q.q2.min() >= 0.0
            and not q.q1.any() and not q.q3.any())


def _check_target(X: RBMatrix) -> None:
    if not is_nonneg(X):
        raise FeasibilityError("target matrix must have non-negative blocks")


# -- step search -----------------------------------------------------------------

class _Step(NamedTuple):
    alpha: float
    point: RBMatrix
    value: float
    res: float
    product: RBMatrix


def _line_search(point, grad, project, loss, f_curr, *, sigma, mu, delta,
                 alpha_start, adaptive, cap, floor):
    """Find an Armijo-accepted projected step.

    Returns ``(step, evals)`` where ``step`` is None when the search ran
    out of budget or the step underflowed ``floor``.  ``loss`` maps a
    trial point to ``(value, res, product)``; NaN values fail the test
    and trigger further backtracking.
    """
    evals = 0

    def probe(alpha: float):
        nonlocal evals
        cand = project(point - alpha * grad)
        value, res, product = loss(cand)
        evals += 1
        gain = re_inner(grad, cand - point)
        ok = value - f_curr <= sigma * gain
        return ok, _Step(alpha, cand, value, res, product)

    if not adaptive:
        for d in range(cap + 1):
            alpha = mu ** d
            if alpha < floor:
                break
            ok, step = probe(alpha)
            if ok:
                return step, evals
        return None, evals

    ok, step = probe(alpha_start)
    if ok:
        while evals < cap:
            ok_next, step_next = probe(step.alpha * delta)
            if not ok_next:
                break
            step = step_next
        return step, evals

    alpha = alpha_start
    while evals < cap:
        alpha = alpha / delta
        if alpha < floor:
            return None, evals
        ok, step = probe(alpha)
        if ok:
            return step, evals
    return None, evals


# -- initialization ----------------------------------------------------------------

def init_factors(rows: int, cols: int, rank: int, seed: int,
                 real_only: bool = False) -> tuple[RBMatrix, RBMatrix]:
    """Seeded random starting factors: W fully dense, H on q0/q2 only."""
    rng = np.random.default_rng(seed)
    if real_only:
        w0 = rng.random((rows, rank))
        zw = np.zeros((rows, rank))
        W = RBMatrix._wrap(w0, zw, zw.copy(), zw.copy())
        h0 = rng.random((rank, cols))
        zh = np.zeros((rank, cols))
        H = RBMatrix._wrap(h0, zh, zh.copy(), zh.copy())
        return W, H
    W = RBMatrix._wrap(*(rng.random((rows, rank)) for _ in range(4)))
    h0 = rng.random((rank, cols))
    h2 = rng.random((rank, cols))
    z = np.zeros((rank, cols))
    H = RBMatrix._wrap(h0, z, h2, z.copy())
    return W, H


def make_synthetic_instance(rows: int, cols: int, rank: int,
                            seed: int) -> tuple[RBMatrix, RBMatrix, RBMatrix]:
    """Random feasible factors and their exact product (X, W_true, H_true)."""
    W, H = init_factors(rows, cols, rank, seed)
    return matmul(W, H), W, H


# -- the alternating engine -----------------------------------------------------------

def _alternate(X: RBMatrix, cfg: SolverConfig, *, adaptive: bool,
               W: RBMatrix, H: RBMatrix,
               on_iteration: Optional[Observer] = None) -> FactorizationResult:
    def value_at(w: RBMatrix, h: RBMatrix):
        product = matmul(w, h)
        res = (X - product).norm()
        return 0.5 * res * res, res, product

    f, res, product = value_at(W, H)
    history = [IterationRecord(0, f, res, float("nan"), float("nan"),
                               float("nan"), 0)]
    if on_iteration is not None:
        on_iteration(history[0], W, H)

    alpha_prev = 1.0
    beta_prev = 1.0
    status = "max_iters"

    for t in range(1, cfg.max_iters + 1):
        prev_product = product

        gw = matmul(product - X, H.hermitian())
        step_w, evals_w = _line_search(
            W, gw, project_nonneg, lambda w: value_at(w, H), f,
            sigma=cfg.sigma, mu=cfg.mu, delta=cfg.delta,
            alpha_start=alpha_prev, adaptive=adaptive,
            cap=cfg.armijo_cap, floor=cfg.step_floor)
        if step_w is None:
            status = "stagnated"
            break
        W, f, product = step_w.point, step_w.value, step_w.product
        alpha_prev = step_w.alpha

        gh = matmul(W.hermitian(), product - X)
        step_h, evals_h = _line_search(
            H, gh, project_nonneg_j, lambda h: value_at(W, h), f,
            sigma=cfg.sigma, mu=cfg.mu, delta=cfg.delta,
            alpha_start=beta_prev, adaptive=adaptive,
            cap=cfg.armijo_cap, floor=cfg.step_floor)
        if step_h is None:
            status = "stagnated"
            break
        H, f, res, product = step_h.point, step_h.value, step_h.res, step_h.product
        beta_prev = step_h.alpha

        num = (product - prev_product).norm()
        den = prev_product.norm()
        if den == 0.0:
            # Degenerate reconstruction: converged only if nothing moved.
            rel = 0.0 if num == 0.0 else float("inf")
        else:
            rel = num / den

        record = IterationRecord(t, f, res, step_w.alpha, step_h.alpha, rel,
                                 evals_w + evals_h)
        history.append(record)
        if on_iteration is not None:
            on_iteration(record, W, H)
        if rel < cfg.tol:
            status = "converged"
            break

    return FactorizationResult(W=W, H=H, history=history, status=status)


def _solve_rb(X: RBMatrix, config: SolverConfig, adaptive: bool,
              on_iteration: Optional[Observer],
              check_rank: bool = True) -> FactorizationResult:
    if check_rank:
        config.check_rank(X.rows, X.cols)
    elif not (0 < config.rank <= min(X.rows, X.cols)):
        raise ConfigError(
            f"rank {config.rank} must be in 1..min{(X.rows, X.cols)}")
    _check_target(X)
    W0, H0 = init_factors(X.rows, X.cols, config.rank, config.seed)
    return _alternate(X, config, adaptive=adaptive, W=W0, H=H0,
                      on_iteration=on_iteration)


def solve_rbpg(X: RBMatrix, config: SolverConfig,
               on_iteration: Optional[Observer] = None) -> FactorizationResult:
    """Alternating projected gradients with per-iteration backtracking."""
    return _solve_rb(X, config, adaptive=False, on_iteration=on_iteration)


def solve_rbipg(X: RBMatrix, config: SolverConfig,
                on_iteration: Optional[Observer] = None) -> FactorizationResult:
    """Alternating projected gradients with warm-started adaptive steps."""
    return _solve_rb(X, config, adaptive=True, on_iteration=on_iteration)


def solve(X: RBMatrix, config: SolverConfig,
          on_iteration: Optional[Observer] = None) -> FactorizationResult:
    """Dispatch on ``config.variant``."""
    if config.variant == "rbpg":
        return solve_rbpg(X, config, on_iteration)
    return solve_rbipg(X, config, on_iteration)


def _solve_full_rank_ok(X: RBMatrix, config: SolverConfig,
                        on_iteration: Optional[Observer] = None
                        ) -> FactorizationResult:
    # Gallery targets stack one column per sample, where rank == columns
    # is legitimate; the strict compression bound does not apply.
    return _solve_rb(X, config, adaptive=(config.variant != "rbpg"),
                     on_iteration=on_iteration, check_rank=False)


# -- stationarity diagnostics -------------------------------------------------------------

def kkt_residual(X: RBMatrix, W: RBMatrix, H: RBMatrix) -> float:
    """Worst-case violation of the first-order optimality system.

    Aggregates, with max, the negativity of the gradient blocks along
    feasible directions (all four blocks for W; q0 and q2 for H) and the
    complementary-slackness products of factor and gradient blocks.
    Zero exactly at a stationary feasible pair.
    """
    if not is_nonneg(W):
        raise FeasibilityError("W must have non-negative blocks")
    if not is_nonneg_j(H):
        raise FeasibilityError("H must be non-negative with zero i/k blocks")

    product = matmul(W, H)
    gw = matmul(product - X, H.hermitian())
    gh = matmul(W.hermitian(), product - X)

    worst = 0.0
    for b in gw.blocks():
        worst = max(worst, max(0.0, -float(b.min())))
    for b in (gh.q0, gh.q2):
        worst = max(worst, max(0.0, -float(b.min())))
    for wb, gb in zip(W.blocks(), gw.blocks()):
        worst = max(worst, float(np.abs(wb * gb).max()))
    for hb, gb in ((H.q0, gh.q0), (H.q2, gh.q2)):
        worst = max(worst, float(np.abs(hb * gb).max()))
    return worst


# -- real-channel baseline ------------------------------------------------------------------

def solve_real_nmf(X_channel, config: SolverConfig,
                   on_iteration=None) -> RealFactorizationResult:
    """Projected-gradient NMF on one real channel.

    Runs the adaptive (warm-started) step policy restricted to the real
    block: embedding a real matrix in the q0 block keeps every gradient,
    projection and product real, so the shared engine reduces exactly to
    plain non-negative matrix factorization.
    """
    X = np.asarray(X_channel, dtype=np.float64)
    if X.ndim != 2:
        raise FeasibilityError("channel must be a 2-D real matrix")
    if X.min() < 0.0:
        raise FeasibilityError("channel must be entrywise non-negative")
    config.check_rank(*X.shape)
    Xrb = RBMatrix.from_real(X)

    wrapped = None
    if on_iteration is not None:
        def wrapped(record, W, H):
            on_iteration(record, W.q0, H.q0)

    W0, H0 = init_factors(X.shape[0], X.shape[1], config.rank, config.seed,
                          real_only=True)
    result = _alternate(Xrb, config, adaptive=True, W=W0, H=H0,
                        on_iteration=wrapped)
    return RealFactorizationResult(W=result.W.q0, H=result.H.q0,
                                   history=result.history,
                                   status=result.status)


def real_kkt_residual(X_channel, W, H) -> float:
    """Stationarity residual for the real-channel baseline."""
    Xrb = RBMatrix.from_real(np.asarray(X_channel, dtype=np.float64))
    Wrb = RBMatrix.from_real(np.asarray(W, dtype=np.float64))
    Hrb = RBMatrix.from_real(np.asarray(H, dtype=np.float64))
    return kkt_residual(Xrb, Wrb, Hrb)


# -- gradient verification ---------------------------------------------------------------------

def gradient_check(n_seeds: int = 10, base_seed: int = 0, eps: float = 1e-6,
                   max_rows: int = 8, max_cols: int = 6,
                   max_rank: int = 4) -> list[tuple[int, float]]:
    """Compare analytic gradients against central finite differences.

    Returns ``(seed, max relative error)`` per seed, where the relative
    error is measured in the Frobenius norm of the full gradient.
    """
    results = []
    for k in range(n_seeds):
        seed = base_seed + k
        rng = np.random.default_rng(seed)
        rows = int(rng.integers(3, max_rows + 1))
        cols = int(rng.integers(3, max_cols + 1))
        rank = int(rng.integers(1, min(max_rank, min(rows, cols) - 1) + 1))

        X = RBMatrix(*(rng.random((rows, cols)) for _ in range(4)))
        W = RBMatrix(*(rng.uniform(-1.0, 1.0, (rows, rank)) for _ in range(4)))
        H = RBMatrix(*(rng.uniform(-1.0, 1.0, (rank, cols)) for _ in range(4)))

        worst = 0.0
        for target, analytic in (("W", grad_w(X, W, H)), ("H", grad_h(X, W, H))):
            base = W if target == "W" else H
            fd_blocks = []
            for bi, block in enumerate(base.blocks()):
                fd = np.zeros_like(block)
                for (r, c), _ in np.ndenumerate(block):
                    fd[r, c] = _central_diff(X, W, H, target, bi, r, c, eps)
                fd_blocks.append(fd)
            fd_mat = RBMatrix(*fd_blocks)
            denom = max(analytic.norm(), 1e-12)
            worst = max(worst, (fd_mat - analytic).norm() / denom)
        results.append((seed, worst))
    return results


def _central_diff(X, W, H, target, block_index, r, c, eps):
    def shifted(delta):
        base = W if target == "W" else H
        blocks = [b.copy() for b in base.blocks()]
        blocks[block_index][r, c] += delta
        perturbed = RBMatrix(*blocks, copy=False, validate=False)
        if target == "W":
            return objective(X, perturbed, H)
        return objective(X, W, perturbed)

    return (shifted(eps) - shifted(-eps)) / (2.0 * eps)
