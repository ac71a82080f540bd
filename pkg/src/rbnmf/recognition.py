"""Color face recognition on top of the RB factorization.

Pipeline: each RGB face becomes one RB matrix (channel average in the
real block, R/G/B in the imaginary blocks), training faces are
vectorized into the columns of a tall target matrix, the factorization
produces a basis, and every face (train and test) is re-encoded against
that basis by least squares.  Classification picks the training sample
whose encoding has the largest cosine similarity with the test encoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np

from .matrix import (RBMatrix, ShapeMismatchError, SingularComponentError,
                     cond_components, hstack, inverse, matmul, re_inner)
from .solver import (ConfigError, SolverConfig, _line_search,
                     _solve_full_rank_ok)

Mode = Literal["full", "pure"]

#: Entries below this threshold count as zeros in the sparsity metrics.
SPARSITY_THRESHOLD = 1e-5

#: Component condition number above which encodings switch from the
#: normal-equations solve to gradient descent.
DEFAULT_COND_THRESHOLD = 1e15


class ZeroEncodingError(ValueError):
    """Cosine similarity is undefined for an all-zero encoding."""


class EncodingFailedError(RuntimeError):
    """Neither the direct solve nor the descent fallback produced an encoding."""


@dataclass
class ColorSample:
    """One labeled RGB image with channel intensities in [0, 1]."""

    label: str
    red: np.ndarray
    green: np.ndarray
    blue: np.ndarray
    split: str = "train"
    path: str = ""

    def __post_init__(self) -> None:
        channels = []
        for name in ("red", "green", "blue"):
            c = np.asarray(getattr(self, name), dtype=np.float64)
            if c.ndim != 2:
                raise ShapeMismatchError(f"{name} channel must be 2-D")
            channels.append(c)
            setattr(self, name, c)
        if not (channels[0].shape == channels[1].shape == channels[2].shape):
            raise ShapeMismatchError("color channels disagree in shape")
        for name, c in zip(("red", "green", "blue"), channels):
            if c.min() < 0.0 or c.max() > 1.0:
                raise ValueError(f"{name} channel values must lie in [0, 1]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.red.shape


def encode_face(sample: ColorSample, mode: Mode = "full") -> RBMatrix:
    """RB encoding of one RGB image.

    ``full`` puts the channel average in the real block; ``pure`` leaves
    the real block zero.  R, G, B always occupy the i, j, k blocks.
    """
    if mode not in ("full", "pure"):
        raise ConfigError(f"mode must be 'full' or 'pure', got {mode!r}")
    if mode == "full":
        avg = (sample.red + sample.green + sample.blue) / 3.0
    else:
        avg = np.zeros(sample.shape)
    return RBMatrix(avg, sample.red, sample.green, sample.blue)


@dataclass
class Gallery:
    """Trained basis plus labeled training encodings.

    ``h_train`` holds the least-squares encodings used for
    classification; ``h_factor`` is the coefficient factor straight from
    the factorization, kept for the sparsity metrics.  ``x`` is the
    stacked training target (dropped when a gallery is reloaded from
    disk).
    """

    labels: list[str]
    W: RBMatrix
    h_train: RBMatrix
    mode: str
    image_shape: tuple[int, int]
    h_factor: Optional[RBMatrix] = None
    x: Optional[RBMatrix] = None

    @property
    def size(self) -> int:
        return len(self.labels)


def build_gallery(samples: Sequence[ColorSample], config: SolverConfig,
                  cond_threshold: float = DEFAULT_COND_THRESHOLD,
                  on_iteration=None) -> Gallery:
    """Factorize the stacked training faces and re-encode each of them."""
    if not samples:
        raise ValueError("need at least one training sample")
    shape = samples[0].shape
    for s in samples:
        if s.shape != shape:
            raise ShapeMismatchError(
                f"all images must share dimensions: {s.shape} vs {shape}")
    mode = config.representation
    columns = [encode_face(s, mode).vec() for s in samples]
    X = hstack(columns)

    result = _solve_full_rank_ok(X, config, on_iteration)
    encodings = [solve_encoding(result.W, col, cond_threshold)
                 for col in columns]
    return Gallery(labels=[s.label for s in samples], W=result.W,
                   h_train=hstack(encodings), mode=mode, image_shape=shape,
                   h_factor=result.H, x=X)


def solve_encoding(W: RBMatrix, t: RBMatrix,
                   cond_threshold: float = DEFAULT_COND_THRESHOLD,
                   return_info: bool = False):
    """Least-squares encoding h minimizing ||t - W h||_F.

    Solves the normal equations through the e1/e2 inverse while both
    component condition numbers stay at or below ``cond_threshold``;
    otherwise (or on an exactly singular component) minimizes by gradient
    descent with Armijo backtracking from h = 0.  The encoding is a
    general RB vector; no non-negativity is imposed.
    """
    if t.shape != (W.rows, 1):
        raise ShapeMismatchError(
            f"target must be {(W.rows, 1)}, got {t.shape}")
    gram = matmul(W.hermitian(), W)
    c1, c2 = cond_components(gram)
    direct_singular = False
    if max(c1, c2) <= cond_threshold:
        try:
            h = matmul(inverse(gram), matmul(W.hermitian(), t))
            return (h, "normal_equations") if return_info else h
        except SingularComponentError:
            direct_singular = True
    h, made_progress = _descent_encoding(W, t)
    if direct_singular and not made_progress:
        raise EncodingFailedError(
            "direct solve hit a singular component and descent stalled")
    return (h, "gradient_descent") if return_info else h


def _descent_encoding(W: RBMatrix, t: RBMatrix, *, mu: float = 0.1,
                      sigma: float = 0.001, cap: int = 50,
                      max_iters: int = 5000,
                      grad_tol: float = 1e-8) -> tuple[RBMatrix, bool]:
    h = RBMatrix.zeros(W.cols, 1)
    product = matmul(W, h)
    f = 0.5 * (t - product).norm() ** 2
    grad = matmul(W.hermitian(), product - t)
    grad0 = grad.norm()
    if grad0 == 0.0:
        # t is orthogonal to the basis range; h = 0 is already optimal.
        return h, True
    made_progress = False

    def loss(cand):
        p = matmul(W, cand)
        r = (t - p).norm()
        return 0.5 * r * r, r, p

    identity = lambda m: m
    for _ in range(max_iters):
        if grad.norm() / grad0 < grad_tol:
            break
        step, _evals = _line_search(
            h, grad, identity, loss, f, sigma=sigma, mu=mu, delta=10.0,
            alpha_start=1.0, adaptive=False, cap=cap, floor=1e-20)
        if step is None:
            break
        h, f, product = step.point, step.value, step.product
        made_progress = True
        grad = matmul(W.hermitian(), product - t)
    return h, made_progress


def cosine_similarity(h_train: RBMatrix, h_test: RBMatrix) -> float:
    """Real part of the inner product over the product of norms."""
    na, nb = h_train.norm(), h_test.norm()
    if na == 0.0 or nb == 0.0:
        raise ZeroEncodingError("cosine similarity needs non-zero encodings")
    return re_inner(h_train, h_test) / (na * nb)


def classify(gallery: Gallery, sample: ColorSample,
             cond_threshold: float = DEFAULT_COND_THRESHOLD
             ) -> tuple[str, float]:
    """Label of the training sample most similar to the test encoding.

    Ties resolve to the lowest training index.  The gallery's
    representation mode applies to the test sample as well; mixing modes
    is not supported.
    """
    if sample.shape != gallery.image_shape:
        raise ShapeMismatchError(
            f"test image shape {sample.shape} does not match gallery "
            f"{gallery.image_shape}")
    t = encode_face(sample, gallery.mode).vec()
    h = solve_encoding(gallery.W, t, cond_threshold)
    best_index = 0
    best_score = -np.inf
    for k in range(gallery.size):
        score = cosine_similarity(gallery.h_train.col(k), h)
        if score > best_score:
            best_index, best_score = k, score
    return gallery.labels[best_index], best_score


# -- metrics ------------------------------------------------------------------

def _count_small(blocks) -> tuple[int, int]:
    small = 0
    total = 0
    for b in blocks:
        arr = np.asarray(b)
        small += int((arr < SPARSITY_THRESHOLD).sum())
        total += arr.size
    return small, total


def compute_sec(h, kind: str = "rb") -> float:
    """Percentage of encoding entries below the sparsity threshold.

    ``kind="rb"`` counts over the real and j blocks of an RB coefficient
    matrix; ``kind="real"`` counts over a sequence of per-channel
    coefficient matrices.
    """
    if kind == "rb":
        blocks = (h.q0, h.q2)
    elif kind == "real":
        blocks = tuple(h)
    else:
        raise ValueError(f"kind must be 'rb' or 'real', got {kind!r}")
    small, total = _count_small(blocks)
    return 100.0 * small / total


def compute_basis_sparsity(w) -> float:
    """Percentage of basis entries below the sparsity threshold.

    Accepts an RB basis (all four stored blocks) or a sequence of real
    per-channel bases.
    """
    blocks = w.blocks() if isinstance(w, RBMatrix) else tuple(w)
    small, total = _count_small(blocks)
    return 100.0 * small / total


def compute_res(x, w, h, kind: str = "rb") -> float:
    """Reconstruction residual for either factorization flavor.

    ``rb``: Frobenius norm of ``x - w @ h``.  ``real``: square root of
    the summed squared channel residuals for sequences of per-channel
    matrices.
    """
    if kind == "rb":
        return (x - matmul(w, h)).norm()
    if kind == "real":
        total = 0.0
        for xs, ws, hs in zip(x, w, h):
            r = np.asarray(xs) - np.asarray(ws) @ np.asarray(hs)
            total += float(np.vdot(r, r))
        return float(np.sqrt(total))
    raise ValueError(f"kind must be 'rb' or 'real', got {kind!r}")


# -- evaluation ----------------------------------------------------------------

@dataclass
class SampleResult:
    path: str
    true_label: str
    predicted: str
    score: float


@dataclass
class RecognitionReport:
    accuracy: float
    samples: list[SampleResult]
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)


def evaluate_gallery(gallery: Gallery, samples: Sequence[ColorSample],
                     cond_threshold: float = DEFAULT_COND_THRESHOLD
                     ) -> RecognitionReport:
    if not samples:
        raise ValueError("need at least one sample to evaluate")
    results = []
    confusion: dict[str, dict[str, int]] = {}
    correct = 0
    for s in samples:
        predicted, score = classify(gallery, s, cond_threshold)
        results.append(SampleResult(path=s.path, true_label=s.label,
                                    predicted=predicted, score=score))
        row = confusion.setdefault(s.label, {})
        row[predicted] = row.get(predicted, 0) + 1
        if predicted == s.label:
            correct += 1
    return RecognitionReport(accuracy=correct / len(samples), samples=results,
                             confusion=confusion)
