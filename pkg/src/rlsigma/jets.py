"""Order-3 jets: truncated multivariate Taylor polynomials.

A jet at a point stores the Taylor coefficients ``c_t`` of a scalar
function for every monomial ``t`` of total degree at most 3.  Monomials
are nondecreasing index tuples, so storage is symmetric by construction.
The partial derivative over the multiset ``t`` equals ``t! * c_t``.

Coordinate labels follow the geometric convention: ``partial(1, 2)`` is
the mixed derivative in x1 and x2.  Dense derivative arrays returned by
:meth:`Jet3.derivative_arrays` are 0-based numpy arrays.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

MAX_ORDER = 3


class JetBasis:
    """Monomial index tables shared by all jets of one dimension."""

    def __init__(self, dim: int):
        self.dim = dim
        monos: list[tuple[int, ...]] = []
        for deg in range(MAX_ORDER + 1):
            monos.extend(combinations_with_replacement(range(dim), deg))
        self.monomials = monos
        self.size = len(monos)
        self.index = {t: i for i, t in enumerate(monos)}
        self.degree = np.array([len(t) for t in monos])
        self.multiplicity = np.array(
            [math.prod(math.factorial(t.count(k)) for k in set(t)) for t in monos],
            dtype=float,
        )

        # product table: pairs (i, j) whose degrees sum to at most MAX_ORDER
        pi, pj, pk = [], [], []
        for i, s in enumerate(monos):
            for j, t in enumerate(monos):
                if len(s) + len(t) <= MAX_ORDER:
                    pi.append(i)
                    pj.append(j)
                    pk.append(self.index[tuple(sorted(s + t))])
        self._pi = np.array(pi)
        self._pj = np.array(pj)
        self._pk = np.array(pk)

        # derivative tables: d/dx_k maps monomial t+k (degree <= 3) to t
        self._dsrc = []
        self._dfac = []
        for k in range(dim):
            src = np.zeros(self.size, dtype=int)
            fac = np.zeros(self.size)
            for i, t in enumerate(monos):
                if len(t) < MAX_ORDER:
                    u = tuple(sorted(t + (k,)))
                    src[i] = self.index[u]
                    fac[i] = u.count(k)
            self._dsrc.append(src)
            self._dfac.append(fac)

        # masks
        self.without = [
            np.array([0.0 if k in t else 1.0 for t in monos]) for k in range(dim)
        ]
        self.upto = [(self.degree <= d).astype(float) for d in range(MAX_ORDER + 1)]

        # dense derivative maps
        r = range(dim)
        self.idx1 = np.array([self.index[(a,)] for a in r])
        self.idx2 = np.array(
            [[self.index[tuple(sorted((a, b)))] for b in r] for a in r]
        )
        self.idx3 = np.array(
            [[[self.index[tuple(sorted((a, b, c)))] for c in r] for b in r] for a in r]
        )
        self.fac2 = self.multiplicity[self.idx2]
        self.fac3 = self.multiplicity[self.idx3]

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.bincount(
            self._pk, weights=a[self._pi] * b[self._pj], minlength=self.size
        )

    def differentiate(self, c: np.ndarray, k: int) -> np.ndarray:
        out = c[self._dsrc[k]] * self._dfac[k]
        return out * self.upto[MAX_ORDER - 1]


@lru_cache(maxsize=None)
def basis_for(dim: int) -> JetBasis:
    return JetBasis(dim)


def _coerce(other, basis: JetBasis):
    if isinstance(other, Jet3):
        return other
    if isinstance(other, (int, float, np.floating, np.integer)):
        return None
    return NotImplemented


class Jet3:
    """Value and partial derivatives up to total order 3 at a point.

    ``order`` tracks how many derivative orders are trustworthy.  It drops
    by one under :meth:`derivative`, and arithmetic keeps the minimum of
    the operands.
    """

    __slots__ = ("basis", "coeffs", "order", "point")

    def __init__(self, basis: JetBasis, coeffs: np.ndarray, order: int = MAX_ORDER,
                 point=None):
        self.basis = basis
        self.order = order
        if order < MAX_ORDER:
            coeffs = coeffs * basis.upto[order]
        self.coeffs = coeffs
        self.point = point

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, dim: int, value: float, point=None) -> "Jet3":
        b = basis_for(dim)
        c = np.zeros(b.size)
        c[0] = value
        return cls(b, c, MAX_ORDER, point)

    @classmethod
    def variable(cls, dim: int, axis: int, point) -> "Jet3":
        """Jet of the coordinate function with 0-based ``axis`` at ``point``."""
        b = basis_for(dim)
        c = np.zeros(b.size)
        c[0] = point[axis]
        c[b.index[(axis,)]] = 1.0
        return cls(b, c, MAX_ORDER, tuple(point))

    # access ------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def partial(self, *labels: int) -> float:
        """Partial derivative over 1-based coordinate labels."""
        if len(labels) > self.order:
            raise ValueError(f"jet only valid to order {self.order}")
        t = tuple(sorted(k - 1 for k in labels))
        i = self.basis.index[t]
        return float(self.coeffs[i] * self.basis.multiplicity[i])

    @property
    def partials(self) -> dict[tuple[int, ...], float]:
        """All stored partials keyed by nondecreasing 1-based label tuples."""
        b = self.basis
        return {
            tuple(k + 1 for k in t): float(self.coeffs[i] * b.multiplicity[i])
            for i, t in enumerate(b.monomials)
            if 0 < len(t) <= self.order
        }

    def gradient(self) -> np.ndarray:
        return self.coeffs[self.basis.idx1].copy()

    def derivative_arrays(self):
        """Return ``(value, d1, d2, d3)`` as dense symmetric arrays."""
        b = self.basis
        c = self.coeffs
        return (self.value, c[b.idx1], c[b.idx2] * b.fac2, c[b.idx3] * b.fac3)

    # calculus ----------------------------------------------------------
    def derivative(self, label: int) -> "Jet3":
        """Jet of the partial derivative in coordinate ``label`` (1-based)."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet3(self.basis, self.basis.differentiate(self.coeffs, label - 1),
                    self.order - 1, self.point)

    def drop_axis(self, label: int) -> "Jet3":
        """Zero every derivative involving coordinate ``label``."""
        return Jet3(self.basis, self.coeffs * self.basis.without[label - 1],
                    self.order, self.point)

    def compose(self, f0: float, f1: float, f2: float, f3: float) -> "Jet3":
        """Apply a scalar function given its derivatives at the value."""
        h = self.coeffs.copy()
        h[0] = 0.0
        b = self.basis
        h2 = b.multiply(h, h)
        h3 = b.multiply(h2, h)
        c = f1 * h + (f2 / 2.0) * h2 + (f3 / 6.0) * h3
        c[0] = f0
        return Jet3(b, c, self.order, self.point)

    # arithmetic --------------------------------------------------------
    def _wrap(self, coeffs, order):
        return Jet3(self.basis, coeffs, order, self.point)

    def __add__(self, other):
        o = _coerce(other, self.basis)
        if o is NotImplemented:
            return o
        if o is None:
            c = self.coeffs.copy()
            c[0] += other
            return self._wrap(c, self.order)
        return self._wrap(self.coeffs + o.coeffs, min(self.order, o.order))

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(-self.coeffs, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = _coerce(other, self.basis)
        if o is NotImplemented:
            return o
        if o is None:
            return self._wrap(self.coeffs * other, self.order)
        return self._wrap(self.basis.multiply(self.coeffs, o.coeffs),
                          min(self.order, o.order))

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet3":
        v = self.value
        if v == 0.0:
            raise ZeroDivisionError("division by a jet with zero value")
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3, -6.0 / v**4)

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self * other.reciprocal()
        if other == 0:
            raise ZeroDivisionError("division by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("jets support integer powers only")
        n = int(n)
        v = self.value
        if n == 0:
            return Jet3(self.basis, np.eye(1, self.basis.size)[0], self.order, self.point)
        if v == 0.0 and n < 0:
            raise ZeroDivisionError("negative power of a jet with zero value")
        return self.compose(*(_power_derivative(v, n, k) for k in range(4)))

    def __repr__(self):
        return f"Jet3(value={self.value!r}, order={self.order}, dim={self.dim})"


def _power_derivative(v: float, n: int, k: int) -> float:
    """k-th derivative of x**n at v for integer n."""
    falling = math.prod(n - i for i in range(k))
    if falling == 0:
        return 0.0
    return falling * v ** (n - k)


def sin(u: Jet3) -> Jet3:
    s, c = math.sin(u.value), math.cos(u.value)
    return u.compose(s, c, -s, -c)


def cos(u: Jet3) -> Jet3:
    s, c = math.sin(u.value), math.cos(u.value)
    return u.compose(c, -s, -c, s)


def exp(u: Jet3) -> Jet3:
    e = math.exp(u.value)
    return u.compose(e, e, e, e)


def log(u: Jet3) -> Jet3:
    v = u.value
    if v <= 0.0:
        raise ValueError("log of a nonpositive value")
    return u.compose(math.log(v), 1.0 / v, -1.0 / v**2, 2.0 / v**3)


def sqrt(u: Jet3) -> Jet3:
    v = u.value
    if v <= 0.0:
        raise ValueError("sqrt of a nonpositive value")
    s = math.sqrt(v)
    return u.compose(s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v))
