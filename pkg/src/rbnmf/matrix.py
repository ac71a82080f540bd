"""Dense reduced-biquaternion matrices stored as four real blocks.

An RB matrix is kept as its four real component blocks (q0, q1, q2, q3),
one per algebra unit.  Matrices are immutable values: the stored blocks
are marked read-only and every operation returns a fresh matrix, which
makes all operations safe to call concurrently.

Multiplication has two interchangeable routes:

* ``direct`` expands the product into real block GEMMs, skipping terms
  against all-zero blocks.  When both operands have entrywise
  non-negative blocks (and one of them only carries q0/q2, as the
  factorization model produces), the surviving terms are sums of
  products of non-negative numbers, so the result is non-negative with
  no rounding caveat.
* ``e1e2`` maps both operands to pairs of complex matrices, performs two
  complex GEMMs and maps back.  Cheaper for large dense operands, but
  the conversion mixes blocks with cancellation.

``route="auto"`` picks between them by inner dimension and block
sparsity; both stay available so one can cross-validate the other.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.linalg

from .algebra import RBScalar


class ShapeMismatchError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class SingularComponentError(np.linalg.LinAlgError):
    """A complex component (M1 or M2) of the e1/e2 split is singular."""

    def __init__(self, component: str):
        self.component = component
        super().__init__(f"complex component {component} is exactly singular")


_BLOCK_NAMES = ("q0", "q1", "q2", "q3")

# Inner dimension below which the direct route beats two complex GEMMs
# plus conversion overhead.
_E1E2_MIN_INNER = 8

# LU pivot magnitude treated as an exact zero.
_PIVOT_FLOOR = 1e-300


class RBMatrix:
    """Immutable dense RB matrix of shape ``rows x cols``."""

    __slots__ = _BLOCK_NAMES

    def __init__(self, q0, q1, q2, q3, *, copy: bool = True, validate: bool = True):
        blocks = [np.asarray(b, dtype=np.float64) for b in (q0, q1, q2, q3)]
        shape = blocks[0].shape
        if len(shape) != 2:
            raise ShapeMismatchError("component blocks must be 2-D")
        for b in blocks[1:]:
            if b.shape != shape:
                raise ShapeMismatchError(
                    f"component blocks disagree in shape: {b.shape} vs {shape}")
        if validate:
            for name, b in zip(_BLOCK_NAMES, blocks):
                if not np.isfinite(b).all():
                    raise ValueError(f"block {name} contains non-finite entries")
        for name, b in zip(_BLOCK_NAMES, blocks):
            if copy:
                b = b.copy()
            b.setflags(write=False)
            object.__setattr__(self, name, b)

    def __setattr__(self, name, value):
        raise AttributeError("RBMatrix is immutable")

    @classmethod
    def _wrap(cls, q0, q1, q2, q3) -> "RBMatrix":
        # Fast path for freshly computed, already-consistent blocks.
        m = object.__new__(cls)
        for name, b in zip(_BLOCK_NAMES, (q0, q1, q2, q3)):
            b.setflags(write=False)
            object.__setattr__(m, name, b)
        return m

    # -- construction helpers ------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RBMatrix":
        return cls._wrap(*(np.zeros((rows, cols)) for _ in range(4)))

    @classmethod
    def identity(cls, n: int) -> "RBMatrix":
        return cls._wrap(np.eye(n), np.zeros((n, n)), np.zeros((n, n)),
                         np.zeros((n, n)))

    @classmethod
    def from_real(cls, block) -> "RBMatrix":
        """Embed a real matrix into the real (q0) block."""
        b = np.asarray(block, dtype=np.float64)
        if b.ndim != 2:
            raise ShapeMismatchError("expected a 2-D real matrix")
        z = np.zeros_like(b)
        return cls(b, z, z.copy(), z.copy())

    # -- basic views -----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.q0.shape

    @property
    def rows(self) -> int:
        return self.q0.shape[0]

    @property
    def cols(self) -> int:
        return self.q0.shape[1]

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.q0, self.q1, self.q2, self.q3)

    def entry(self, m: int, n: int) -> RBScalar:
        return RBScalar(self.q0[m, n], self.q1[m, n], self.q2[m, n], self.q3[m, n])

    def col(self, k: int) -> "RBMatrix":
        """Column k as a rows x 1 matrix (shares storage)."""
        return RBMatrix._wrap(*(b[:, k:k + 1] for b in self.blocks()))

    def min_entry(self) -> float:
        """Smallest entry over all four blocks."""
        return float(min(b.min() for b in self.blocks()))

    def __repr__(self) -> str:
        return f"RBMatrix(shape={self.shape})"

    # -- elementwise arithmetic -------------------------------------------------

    def _binary_check(self, other) -> None:
        if other.shape != self.shape:
            raise ShapeMismatchError(
                f"shape mismatch: {self.shape} vs {other.shape}")

    def __add__(self, other: "RBMatrix") -> "RBMatrix":
        if not isinstance(other, RBMatrix):
            return NotImplemented
        self._binary_check(other)
        return RBMatrix._wrap(*(a + b for a, b in zip(self.blocks(), other.blocks())))

    def __sub__(self, other: "RBMatrix") -> "RBMatrix":
        if not isinstance(other, RBMatrix):
            return NotImplemented
        self._binary_check(other)
        return RBMatrix._wrap(*(a - b for a, b in zip(self.blocks(), other.blocks())))

    def __neg__(self) -> "RBMatrix":
        return RBMatrix._wrap(*(-b for b in self.blocks()))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            s = float(other)
            return RBMatrix._wrap(*(s * b for b in self.blocks()))
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other: "RBMatrix") -> "RBMatrix":
        if not isinstance(other, RBMatrix):
            return NotImplemented
        return matmul(self, other)

    # -- involutions --------------------------------------------------------------

    def transpose(self) -> "RBMatrix":
        return RBMatrix._wrap(*(b.T for b in self.blocks()))

    def conj(self) -> "RBMatrix":
        return RBMatrix._wrap(self.q0, -self.q1, self.q2, -self.q3)

    def hermitian(self) -> "RBMatrix":
        """Conjugate transpose."""
        return RBMatrix._wrap(self.q0.T, (-self.q1).T, self.q2.T, (-self.q3).T)

    # -- norms and reshaping ---------------------------------------------------------

    def norm(self) -> float:
        """Frobenius norm: sqrt of the sum of squares over all blocks."""
        s = 0.0
        for b in self.blocks():
            s += float(np.vdot(b, b))
        return float(np.sqrt(s))

    def vec(self) -> "RBMatrix":
        """Column-major stacking of each block into a (rows*cols) x 1 matrix."""
        return RBMatrix._wrap(*(b.reshape(-1, 1, order="F") for b in self.blocks()))

    # -- e1/e2 view -----------------------------------------------------------------

    def to_e1e2(self) -> "E1E2Matrix":
        m1 = (self.q0 + self.q2) + 1j * (self.q1 + self.q3)
        m2 = (self.q0 - self.q2) + 1j * (self.q1 - self.q3)
        return E1E2Matrix(m1, m2, copy=False)


class E1E2Matrix:
    """Pair of complex matrices (m1, m2) representing an RB matrix.

    ``m1 = (q0 + q2) + (q1 + q3) i`` and ``m2 = (q0 - q2) + (q1 - q3) i``.
    RB matrix multiplication corresponds to independent complex products
    of the components.
    """

    __slots__ = ("m1", "m2")

    def __init__(self, m1, m2, *, copy: bool = True):
        a = np.asarray(m1, dtype=np.complex128)
        b = np.asarray(m2, dtype=np.complex128)
        if a.ndim != 2 or a.shape != b.shape:
            raise ShapeMismatchError("components must be 2-D and equally shaped")
        if copy:
            a, b = a.copy(), b.copy()
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "m1", a)
        object.__setattr__(self, "m2", b)

    def __setattr__(self, name, value):
        raise AttributeError("E1E2Matrix is immutable")

    @property
    def shape(self) -> tuple[int, int]:
        return self.m1.shape

    def to_rb(self) -> RBMatrix:
        re1, im1 = self.m1.real, self.m1.imag
        re2, im2 = self.m2.real, self.m2.imag
        return RBMatrix._wrap((re1 + re2) / 2.0, (im1 + im2) / 2.0,
                              (re1 - re2) / 2.0, (im1 - im2) / 2.0)


# -- multiplication ------------------------------------------------------------------

# Block product table: output block -> ((left block, right block, sign), ...)
_PRODUCT_TERMS = {
    0: ((0, 0, 1.0), (1, 1, -1.0), (2, 2, 1.0), (3, 3, -1.0)),
    1: ((0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0)),
    2: ((0, 2, 1.0), (2, 0, 1.0), (1, 3, -1.0), (3, 1, -1.0)),
    3: ((0, 3, 1.0), (3, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)),
}


def _auto_route(a: RBMatrix, b: RBMatrix) -> str:
    if a.cols < _E1E2_MIN_INNER:
        return "direct"
    # With two or more all-zero blocks on either side, the direct route
    # needs at most as many real GEMMs as the complex route and keeps
    # all-non-negative expansions sign-exact (the solvers rely on that
    # for products of feasible factors).
    if sum(not blk.any() for blk in a.blocks()) >= 2:
        return "direct"
    if sum(not blk.any() for blk in b.blocks()) >= 2:
        return "direct"
    return "e1e2"


def _matmul_direct(a: RBMatrix, b: RBMatrix) -> RBMatrix:
    ab, bb = a.blocks(), b.blocks()
    nz_a = [blk.any() for blk in ab]
    nz_b = [blk.any() for blk in bb]
    out = []
    for comp in range(4):
        acc = None
        for i, j, sign in _PRODUCT_TERMS[comp]:
            if not (nz_a[i] and nz_b[j]):
                continue
            p = ab[i] @ bb[j]
            if acc is None:
                acc = p if sign > 0 else -p
            elif sign > 0:
                acc += p
            else:
                acc -= p
        if acc is None:
            acc = np.zeros((a.rows, b.cols))
        out.append(acc)
    return RBMatrix._wrap(*out)


def _matmul_e1e2(a: RBMatrix, b: RBMatrix) -> RBMatrix:
    ea, eb = a.to_e1e2(), b.to_e1e2()
    prod = E1E2Matrix(ea.m1 @ eb.m1, ea.m2 @ eb.m2, copy=False)
    return prod.to_rb()


def matmul(a: RBMatrix, b: RBMatrix, route: str = "auto") -> RBMatrix:
    """RB matrix product, entrywise equal to sums of scalar RB products."""
    if a.cols != b.rows:
        raise ShapeMismatchError(
            f"inner dimensions disagree: {a.shape} @ {b.shape}")
    if route == "auto":
        route = _auto_route(a, b)
    if route == "direct":
        return _matmul_direct(a, b)
    if route == "e1e2":
        return _matmul_e1e2(a, b)
    raise ValueError(f"unknown route {route!r}")


# -- inner product and friends ----------------------------------------------------------

def inner(a: RBMatrix, b: RBMatrix) -> RBScalar:
    """Sum of conjugate(a_mn) * b_mn over all entries."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    a0, a1, a2, a3 = a.blocks()
    b0, b1, b2, b3 = b.blocks()

    def dot(x, y):
        return float(np.vdot(x, y))

    s0 = dot(a0, b0) + dot(a1, b1) + dot(a2, b2) + dot(a3, b3)
    s1 = dot(a0, b1) - dot(a1, b0) + dot(a2, b3) - dot(a3, b2)
    s2 = dot(a0, b2) + dot(a2, b0) + dot(a1, b3) + dot(a3, b1)
    s3 = dot(a0, b3) - dot(a3, b0) - dot(a1, b2) + dot(a2, b1)
    return RBScalar(s0, s1, s2, s3)


def re_inner(a: RBMatrix, b: RBMatrix) -> float:
    """Real part of ``inner(a, b)`` without computing the other parts."""
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    s = 0.0
    for x, y in zip(a.blocks(), b.blocks()):
        s += float(np.vdot(x, y))
    return s


def unvec(v: RBMatrix, rows: int, cols: int) -> RBMatrix:
    """Inverse of :meth:`RBMatrix.vec` for the given target shape."""
    if v.shape != (rows * cols, 1):
        raise ShapeMismatchError(
            f"expected shape {(rows * cols, 1)}, got {v.shape}")
    return RBMatrix._wrap(*(b.reshape(rows, cols, order="F") for b in v.blocks()))


def hstack(mats: Sequence[RBMatrix]) -> RBMatrix:
    """Concatenate matrices left to right (blockwise)."""
    if not mats:
        raise ValueError("need at least one matrix")
    rows = mats[0].rows
    for m in mats:
        if m.rows != rows:
            raise ShapeMismatchError("row counts disagree in hstack")
    return RBMatrix._wrap(*(np.hstack([m.blocks()[i] for m in mats])
                            for i in range(4)))


# -- inversion and conditioning ----------------------------------------------------------

def _complex_inverse(m: np.ndarray, name: str) -> np.ndarray:
    perm, lower, upper = scipy.linalg.lu(m)
    if np.abs(np.diag(upper)).min() < _PIVOT_FLOOR:
        raise SingularComponentError(name)
    rhs = perm.T.astype(np.complex128)
    y = scipy.linalg.solve_triangular(lower, rhs, lower=True, unit_diagonal=True)
    return scipy.linalg.solve_triangular(upper, y, lower=False)


def inverse(a: RBMatrix) -> RBMatrix:
    """Matrix inverse through the e1/e2 split.

    Exists exactly when both complex components are invertible; raises
    :class:`SingularComponentError` naming the offending component.
    """
    if a.rows != a.cols:
        raise ShapeMismatchError("inverse requires a square matrix")
    e = a.to_e1e2()
    inv1 = _complex_inverse(e.m1, "M1")
    inv2 = _complex_inverse(e.m2, "M2")
    return E1E2Matrix(inv1, inv2, copy=False).to_rb()


def _cond2(m: np.ndarray) -> float:
    s = np.linalg.svd(m, compute_uv=False)
    smin = float(s.min())
    if smin == 0.0:
        return float("inf")
    return float(s.max()) / smin


def cond_components(a: RBMatrix) -> tuple[float, float]:
    """2-norm condition numbers of the complex components (M1, M2).

    Returns ``inf`` for an exactly singular component.
    """
    if a.rows != a.cols:
        raise ShapeMismatchError("condition numbers require a square matrix")
    e = a.to_e1e2()
    return _cond2(e.m1), _cond2(e.m2)
