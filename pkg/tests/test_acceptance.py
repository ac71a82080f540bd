"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance and runtime budget is asserted inside the test.
"""

import dataclasses
import functools
import time
from contextlib import contextmanager

import numpy as np

from rbnmf.algebra import E1, E2, RBScalar
from rbnmf.dataset import make_two_cluster_samples
from rbnmf.matrix import RBMatrix, hstack, matmul
from rbnmf.recognition import (Gallery, build_gallery, classify,
                               compute_basis_sparsity, compute_sec,
                               cosine_similarity, evaluate_gallery,
                               solve_encoding)
from rbnmf.solver import (SolverConfig, gradient_check, init_factors,
                          kkt_residual, make_synthetic_instance, solve_rbipg,
                          solve_rbpg, solve_real_nmf)


@contextmanager
def criterion(num, description, budget_seconds=None):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget_seconds is not None:
            assert elapsed < budget_seconds, (
                f"criterion {num} exceeded its {budget_seconds}s budget "
                f"({elapsed:.1f}s)")
    except BaseException:
        print(f"[FAIL] criterion {num:2d}: {description}")
        raise
    print(f"[PASS] criterion {num:2d}: {description} ({elapsed:.1f}s)")


def test_criterion_01_algebra_conformance():
    with criterion(1, "scalar algebra: commutativity exact, associativity/"
                      "distributivity <= 1e-12, idempotent identities exact",
                   budget_seconds=5.0):
        assert E1 * E2 == RBScalar(0, 0, 0, 0)
        assert E1 * E1 == E1
        assert E2 * E2 == E2

        rng = np.random.default_rng(0)
        draws = rng.uniform(-10.0, 10.0, size=(10_000, 3, 4))
        for row in draws:
            a = RBScalar(*row[0])
            b = RBScalar(*row[1])
            c = RBScalar(*row[2])
            assert a * b == b * a
            assoc_l, assoc_r = (a * b) * c, a * (b * c)
            scale = max(1.0, assoc_l.modulus(), assoc_r.modulus())
            assert (assoc_l - assoc_r).modulus() <= 1e-12 * scale
            dist_l, dist_r = a * (b + c), a * b + a * c
            scale = max(1.0, dist_l.modulus(), dist_r.modulus())
            assert (dist_l - dist_r).modulus() <= 1e-12 * scale


def test_criterion_02_e1e2_route_equivalence():
    with criterion(2, "200 random matmuls: direct and e1e2 routes agree "
                      "<= 1e-10 relative Frobenius", budget_seconds=10.0):
        rng = np.random.default_rng(1)
        for _ in range(200):
            m, k, n = (int(x) for x in rng.integers(1, 33, size=3))
            a = RBMatrix(*(rng.uniform(-1, 1, (m, k)) for _ in range(4)))
            b = RBMatrix(*(rng.uniform(-1, 1, (k, n)) for _ in range(4)))
            direct = matmul(a, b, "direct")
            fast = matmul(a, b, "e1e2")
            denom = max(direct.norm(), fast.norm(), 1e-300)
            assert (direct - fast).norm() <= 1e-10 * denom


def test_criterion_03_gradient_check():
    with criterion(3, "analytic gradients vs central differences <= 1e-5 "
                      "over 10 seeds", budget_seconds=30.0):
        results = gradient_check(n_seeds=10, base_seed=0, eps=1e-6,
                                 max_rows=8, max_cols=6, max_rank=4)
        worst = max(err for _, err in results)
        assert worst <= 1e-5


@functools.lru_cache(maxsize=1)
def _monotonicity_runs():
    """Five synthetic instances, both variants, 500 iterations each.

    Captures per-iterate feasibility/closure flags through the observer so
    criteria 4 and 5 share the same runs.
    """
    runs = []
    for seed in range(5):
        X, _, _ = make_synthetic_instance(20, 15, 4, seed=seed)
        for variant, solver_fn in (("rbpg", solve_rbpg), ("rbipg", solve_rbipg)):
            flags = []

            def observe(record, W, H, flags=flags):
                flags.append((
                    W.min_entry() >= 0.0,
                    not (H.q1.any() or H.q3.any()),
                    H.q0.min() >= 0.0 and H.q2.min() >= 0.0,
                    matmul(W, H).min_entry() >= 0.0,
                ))

            # Solver seeds are offset from the instance seeds so the
            # random start never coincides with the planted factors.
            cfg = SolverConfig(rank=4, tol=1e-300, max_iters=500,
                               seed=1000 + seed, variant=variant)
            result = solver_fn(X, cfg, observe)
            runs.append((variant, result, flags))
    return runs


def test_criterion_04_monotonicity():
    with criterion(4, "RBPG and RBIPG objectives nonincreasing over 500 "
                      "iterations on 5 instances", budget_seconds=60.0):
        runs = _monotonicity_runs()
        assert len(runs) == 10
        for variant, result, _ in runs:
            assert result.status != "stagnated"
            assert len(result.history) == 501, variant
            objs = [r.objective for r in result.history]
            for fa, fb in zip(objs, objs[1:]):
                assert fb <= fa + 1e-12 * max(1.0, fa)


def test_criterion_05_feasibility_and_closure():
    with criterion(5, "every iterate feasible exactly; reconstruction "
                      "blocks never negative"):
        for _, result, flags in _monotonicity_runs():
            assert len(flags) == len(result.history)
            for w_ok, h_zero_ok, h_nonneg_ok, closure_ok in flags:
                assert w_ok and h_zero_ok and h_nonneg_ok and closure_ok


def test_criterion_06_synthetic_recovery():
    with criterion(6, "RBIPG recovers a planted 40x30 rank-5 instance: "
                      "relative RES <= 0.1, KKT residual drops 10x",
                   budget_seconds=120.0):
        X, _, _ = make_synthetic_instance(40, 30, 5, seed=0)
        xnorm = X.norm()
        achieved = False
        for seed in range(1000, 1005):  # offset: never the planted seed
            cfg = SolverConfig(rank=5, tol=1e-300, max_iters=1000, seed=seed)
            W0, H0 = init_factors(40, 30, 5, seed)
            initial_kkt = kkt_residual(X, W0, H0)
            result = solve_rbipg(X, cfg)
            rel_res = result.history[-1].res / xnorm
            final_kkt = kkt_residual(X, result.W, result.H)
            if rel_res <= 0.1 and final_kkt <= initial_kkt / 10.0:
                achieved = True
                break
        assert achieved


def test_criterion_07_stopping_rule():
    with criterion(7, "relative-change rule fires at tol=1e-4 and the "
                      "status names the firing criterion"):
        X, _, _ = make_synthetic_instance(20, 15, 4, seed=1)
        converged = solve_rbipg(X, SolverConfig(rank=4, tol=1e-4,
                                                max_iters=2000))
        assert converged.status == "converged"
        assert converged.history[-1].rel_change < 1e-4
        assert all(r.rel_change >= 1e-4 for r in converged.history[1:-1])

        capped = solve_rbipg(X, SolverConfig(rank=4, tol=1e-300, max_iters=8))
        assert capped.status == "max_iters"
        assert len(capped.history) == 9


def test_criterion_08_encoding_correctness():
    with criterion(8, "consistent encodings recovered to 1e-8; descent "
                      "fallback engages past the condition threshold"):
        rng = np.random.default_rng(2)
        W = RBMatrix(*(rng.random((40, 4)) for _ in range(4)))
        from rbnmf.matrix import cond_components
        gram = matmul(W.hermitian(), W)
        assert max(cond_components(gram)) <= 1e6  # precondition
        h_true = RBMatrix(*(rng.uniform(-1, 1, (4, 1)) for _ in range(4)))
        t = matmul(W, h_true)
        h, method = solve_encoding(W, t, return_info=True)
        assert method == "normal_equations"
        assert (h - h_true).norm() <= 1e-8 * h_true.norm()

        blocks = [rng.random((40, 4)) for _ in range(4)]
        for b in blocks:
            b[:, 3] = 0.0
        W_sing = RBMatrix(*blocks)
        assert max(cond_components(matmul(W_sing.hermitian(), W_sing))) > 1e15
        reduced = [b.copy() for b in h_true.blocks()]
        for b in reduced:
            b[3, 0] = 0.0
        t_sing = matmul(W_sing, RBMatrix(*reduced))
        h2, method2 = solve_encoding(W_sing, t_sing, return_info=True)
        assert method2 == "gradient_descent"
        assert (t_sing - matmul(W_sing, h2)).norm() <= 1e-6 * t_sing.norm()


def test_criterion_09_recognition_sanity():
    with criterion(9, "two-cluster corpus: test accuracy >= 0.9, self-test "
                      "accuracy 1.0", budget_seconds=60.0):
        train, test = make_two_cluster_samples(train_per_subject=5,
                                               test_per_subject=20, seed=0)
        gallery = build_gallery(train, SolverConfig(rank=2, max_iters=300,
                                                    seed=0))
        assert evaluate_gallery(gallery, test).accuracy >= 0.9
        assert evaluate_gallery(gallery, train).accuracy == 1.0


def test_criterion_10_metric_oracles():
    with criterion(10, "sparsity metrics equal brute-force counts; cosine "
                       "self-similarity and scale invariance hold"):
        rng = np.random.default_rng(3)

        def sprinkle(shape):
            dense = rng.random(shape)
            return np.where(rng.random(shape) < 0.3, dense * 1e-5, dense)

        for _ in range(100):
            rows, cols = (int(x) for x in rng.integers(1, 7, size=2))
            h = RBMatrix(sprinkle((rows, cols)), np.zeros((rows, cols)),
                         sprinkle((rows, cols)), np.zeros((rows, cols)))
            w = RBMatrix(*(sprinkle((rows, cols)) for _ in range(4)))

            count_h = sum(1 for block in (h.q0, h.q2)
                          for value in block.ravel() if value < 1e-5)
            assert compute_sec(h) == 100.0 * count_h / (2 * rows * cols)

            count_w = sum(1 for block in w.blocks()
                          for value in block.ravel() if value < 1e-5)
            assert compute_basis_sparsity(w) == \
                100.0 * count_w / (4 * rows * cols)

        for _ in range(50):
            h = RBMatrix(*(rng.uniform(-1, 1, (5, 1)) for _ in range(4)))
            assert abs(cosine_similarity(h, h) - 1.0) <= 1e-12

        # 50 random galleries: scaling one stored encoding by 7 never
        # changes a prediction.
        for trial in range(50):
            k_count = int(rng.integers(2, 6))
            W = RBMatrix(*(rng.random((12, 2)) for _ in range(4)))
            cols = [RBMatrix(*(rng.uniform(-1, 1, (2, 1)) for _ in range(4)))
                    for _ in range(k_count)]
            labels = [f"g{trial}_{k}" for k in range(k_count)]
            base = Gallery(labels=labels, W=W, h_train=hstack(cols),
                           mode="full", image_shape=(4, 3))
            scale_at = int(rng.integers(0, k_count))
            scaled_cols = [7.0 * c if k == scale_at else c
                           for k, c in enumerate(cols)]
            scaled = dataclasses.replace(base, h_train=hstack(scaled_cols))
            from rbnmf.recognition import ColorSample
            sample = ColorSample(label="probe", red=rng.random((4, 3)),
                                 green=rng.random((4, 3)),
                                 blue=rng.random((4, 3)))
            assert classify(base, sample)[0] == classify(scaled, sample)[0]


def test_criterion_11_real_nmf_baseline():
    with criterion(11, "rank-1 real NMF recovery <= 1e-3 with monotone "
                       "objective"):
        rng = np.random.default_rng(4)
        X = rng.random((15, 1)) @ rng.random((1, 11))
        xnorm = float(np.linalg.norm(X))
        best = float("inf")
        for seed in range(5):
            result = solve_real_nmf(
                X, SolverConfig(rank=1, seed=seed, max_iters=1000, tol=1e-300))
            objs = [r.objective for r in result.history]
            for fa, fb in zip(objs, objs[1:]):
                assert fb <= fa + 1e-12 * max(1.0, fa)
            best = min(best, result.history[-1].res / xnorm)
        assert best <= 1e-3
