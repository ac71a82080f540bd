"""Scalar reduced-biquaternion arithmetic.

A reduced biquaternion (RB) is a four-dimensional hypercomplex number
``q0 + q1*i + q2*j + q3*k`` whose imaginary units satisfy

    i*i = k*k = -1,   j*j = +1,
    i*j = j*i = k,    j*k = k*j = i,    k*i = i*k = -j.

Unlike Hamilton quaternions the product is commutative, but the algebra
contains zero divisors (``j*j = +1`` admits the idempotents ``e1`` and
``e2`` below), so no scalar division is defined here.  Linear solves are
done at the matrix level through the idempotent decomposition instead.

Every RB number splits as ``q = c_plus*e1 + c_minus*e2`` with ordinary
complex coefficients, and under that split RB multiplication becomes two
independent complex multiplications.  :meth:`RBScalar.to_e1e2` and
:meth:`E1E2Scalar.to_rb` convert between the two views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def _require_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"RB components must be finite, got {v!r}")


@dataclass(frozen=True)
class RBScalar:
    """One reduced-biquaternion number with real components (q0, q1, q2, q3).

    ``q0`` is the real part; ``q1``, ``q2``, ``q3`` are the coefficients of
    the ``i``, ``j``, ``k`` units.  Components are validated to be finite at
    construction; arithmetic assumes finite operands.
    """

    q0: float
    q1: float
    q2: float
    q3: float

    def __post_init__(self) -> None:
        for name in ("q0", "q1", "q2", "q3"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _require_finite(self.q0, self.q1, self.q2, self.q3)

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "RBScalar") -> "RBScalar":
        if not isinstance(other, RBScalar):
            return NotImplemented
        return RBScalar(self.q0 + other.q0, self.q1 + other.q1,
                        self.q2 + other.q2, self.q3 + other.q3)

    def __sub__(self, other: "RBScalar") -> "RBScalar":
        if not isinstance(other, RBScalar):
            return NotImplemented
        return RBScalar(self.q0 - other.q0, self.q1 - other.q1,
                        self.q2 - other.q2, self.q3 - other.q3)

    def __neg__(self) -> "RBScalar":
        return RBScalar(-self.q0, -self.q1, -self.q2, -self.q3)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return RBScalar(self.q0 * other, self.q1 * other,
                            self.q2 * other, self.q3 * other)
        if not isinstance(other, RBScalar):
            return NotImplemented
        a, b = self, other
        # Terms are grouped into swap-symmetric pairs so that a*b and b*a
        # produce bit-identical floats.
        return RBScalar(
            (a.q0 * b.q0 - a.q1 * b.q1) + (a.q2 * b.q2 - a.q3 * b.q3),
            (a.q0 * b.q1 + a.q1 * b.q0) + (a.q2 * b.q3 + a.q3 * b.q2),
            (a.q0 * b.q2 + a.q2 * b.q0) - (a.q1 * b.q3 + a.q3 * b.q1),
            (a.q0 * b.q3 + a.q3 * b.q0) + (a.q1 * b.q2 + a.q2 * b.q1),
        )

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    # -- involutions and size ----------------------------------------------

    def conj(self) -> "RBScalar":
        """Conjugate: negates the i and k components, keeps q0 and q2."""
        return RBScalar(self.q0, -self.q1, self.q2, -self.q3)

    def modulus(self) -> float:
        """Euclidean length sqrt(q0^2 + q1^2 + q2^2 + q3^2)."""
        return math.sqrt(self.q0 * self.q0 + self.q1 * self.q1
                         + self.q2 * self.q2 + self.q3 * self.q3)

    # -- idempotent decomposition --------------------------------------------

    def to_e1e2(self) -> "E1E2Scalar":
        """Complex coefficients of the e1/e2 idempotent split."""
        return E1E2Scalar(
            complex(self.q0 + self.q2, self.q1 + self.q3),
            complex(self.q0 - self.q2, self.q1 - self.q3),
        )


@dataclass(frozen=True)
class E1E2Scalar:
    """Pair of complex coefficients (c_plus, c_minus) of an RB number.

    ``q = c_plus*e1 + c_minus*e2``.  Multiplication in this view is
    componentwise complex multiplication.
    """

    c_plus: complex
    c_minus: complex

    def to_rb(self) -> RBScalar:
        cp, cm = complex(self.c_plus), complex(self.c_minus)
        return RBScalar(
            (cp.real + cm.real) / 2.0,
            (cp.imag + cm.imag) / 2.0,
            (cp.real - cm.real) / 2.0,
            (cp.imag - cm.imag) / 2.0,
        )


#: The idempotent (1 + j) / 2.  E1 * E1 == E1 and E1 * E2 == 0 exactly.
E1 = RBScalar(0.5, 0.0, 0.5, 0.0)

#: The idempotent (1 - j) / 2.
E2 = RBScalar(0.5, 0.0, -0.5, 0.0)

ZERO = RBScalar(0.0, 0.0, 0.0, 0.0)
ONE = RBScalar(1.0, 0.0, 0.0, 0.0)
