"""Connections on the hypersurface: screen operator, main, admissible, tangential.

Fields along the hypersurface are handled as objects with a ``jets``
method (expression fields, frame fields) or as :class:`ComputedField`
wrappers around a pointwise evaluator.  Connection evaluators only need
the value and first derivatives of their second argument; for computed
fields those derivatives come from central differences along the
hypersurface coordinates with one Richardson step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dual import christoffels, screen_vectors
from .errors import ConfigError, NonCanonicalError, NonTangentError, StencilOutOfBoxError
from .expr import Expr, eval_value, parse_expr
from .fields import as_field, field_data
from .metric import AdaptedMetric, g_m_value, metric_at, sigma_point
from .sigma import TANGENT_TOL, require_ii_flat, rho_gradient

FD_STEP = 1e-4


# field data --------------------------------------------------------------

class ComputedField:
    """Canonical field along the hypersurface known only pointwise.

    Tangential derivatives are central differences with one Richardson
    level; the x1-derivative is zero (canonical extension).
    """

    canonical = True

    def __init__(self, M: AdaptedMetric, func: Callable, step: float = FD_STEP):
        self.M = M
        self.func = func
        self.step = step

    def data(self, q):
        q = np.asarray(q, dtype=float)
        m = self.M.m
        val = np.asarray(self.func(q), dtype=float)
        grad = np.zeros((m, m))
        h = self.step
        for k in range(1, m):
            e = np.zeros(m)
            e[k] = 1.0
            for s in (h, -h):
                if not self.M.contains(q + s * e):
                    raise StencilOutOfBoxError(
                        f"difference stencil at {tuple(q)} leaves the model box")
            d1 = (np.asarray(self.func(q + h * e)) - np.asarray(self.func(q - h * e))) / (2 * h)
            d2 = (np.asarray(self.func(q + 0.5 * h * e))
                  - np.asarray(self.func(q - 0.5 * h * e))) / h
            grad[:, k] = (4.0 * d2 - d1) / 3.0
        return val, grad


def _data(F, M, q):
    if isinstance(F, ComputedField):
        return F.data(q)
    return field_data(F, M, q)


def _tangent(x, what="field"):
    if abs(x[0]) > TANGENT_TOL:
        raise NonTangentError(f"{what} is not tangent to the hypersurface (x1-component {x[0]!r})")


def _box(M, p, x, a, da):
    """box_x A(C) as a covector over C, from values and derivatives of A."""
    g = metric_at(M, p).g
    gam = christoffels(M, p).gamma
    return g @ (da @ x) + np.einsum("cab,a,b->c", gam, x, a)


# individual connections ---------------------------------------------------

def screen_connection_data(M, p, x, A):
    a, da = A
    w = _box(M, p, x, a, da)
    out = np.zeros(M.m)
    for v in screen_vectors(M, p):
        out += (w @ v) * v
    return out


def screen_connection(M: AdaptedMetric, p_sigma, X, A) -> np.ndarray:
    """Screen connection-operator D^S_X A (a screen vector)."""
    p = sigma_point(M, p_sigma)
    x, _ = _data(X, M, p)
    _tangent(x)
    return screen_connection_data(M, p, x, _data(A, M, p))


def d_rho_data(M, p, Xd, Yd) -> float:
    m = M.m
    br = Yd[1] @ Xd[0] - Xd[1] @ Yd[0]
    Hm = christoffels(M, p).gamma[0][:, m - 1]
    return rho_gradient(M, p, Xd, Yd) - rho_gradient(M, p, Yd, Xd) + float(br @ Hm)


def _radial(M):
    return np.eye(M.m)[M.m - 1]


@dataclass(frozen=True, eq=False)
class AdmissibleSpec:
    """Symmetric offset sigma_ij(x2..xm), labels i, j in 2..m."""

    entries: tuple  # (m-1)x(m-1) of Expr

    @classmethod
    def parse(cls, rows, dimension: int) -> "AdmissibleSpec":
        n = dimension - 1
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ConfigError(f"sigma offset needs a {n}x{n} array")
        E = tuple(tuple(parse_expr(str(t), dimension) for t in r) for r in rows)
        for i in range(n):
            for j in range(n):
                if E[i][j].depends_on(1):
                    raise ConfigError("sigma offset entries must not depend on x1")
                if str(E[i][j]) != str(E[j][i]):
                    raise ConfigError(f"sigma offset is not symmetric at ({i + 2}, {j + 2})")
        return cls(E)

    @classmethod
    def zero(cls, dimension: int) -> "AdmissibleSpec":
        n = dimension - 1
        return cls.parse([["0"] * n for _ in range(n)], dimension)

    def matrix(self, p) -> np.ndarray:
        return np.array([[eval_value(e, p) for e in row] for row in self.entries])

    def __call__(self, p, x, y) -> float:
        return float(np.asarray(x)[1:] @ self.matrix(p) @ np.asarray(y)[1:])


def random_admissible(dimension: int, rng: np.random.Generator) -> AdmissibleSpec:
    """Symmetric polynomial offset with coefficients uniform in [-1, 1]."""
    n = dimension - 1
    vars_ = [f"x{k}" for k in range(2, dimension + 1)]
    rows = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            c = [float(v) for v in rng.uniform(-1.0, 1.0, size=1 + 2 * len(vars_))]
            terms = [f"({c[0]!r})"]
            for k, v in enumerate(vars_):
                terms.append(f"({c[1 + k]!r})*{v}")
                terms.append(f"({c[1 + len(vars_) + k]!r})*{v}^2")
            rows[i][j] = rows[j][i] = " + ".join(terms)
    return AdmissibleSpec.parse(rows, dimension)


class ConnectionOnSigma:
    """Evaluator ``(p, X, Y) -> D_X Y`` for one of the connections on the hypersurface.

    ``tag`` is one of ``screen_op``, ``main``, ``main_admissible``,
    ``admissible`` and ``tangential``.
    """

    TAGS = ("screen_op", "main", "main_admissible", "admissible", "tangential")

    def __init__(self, M: AdaptedMetric, tag: str, sigma: AdmissibleSpec | None = None):
        if tag not in self.TAGS:
            raise ValueError(f"unknown connection tag {tag!r}")
        if tag == "admissible" and sigma is None:
            sigma = AdmissibleSpec.zero(M.m)
        if tag == "tangential":
            require_ii_flat(M)
        self.M = M
        self.tag = tag
        self.sigma = sigma

    def __repr__(self):
        return f"ConnectionOnSigma({self.M.name!r}, {self.tag!r})"

    def evaluate(self, p, Xd, Yd) -> np.ndarray:
        """Connection applied to field data ``(value, grad)`` at ``p``."""
        M = self.M
        x = Xd[0]
        if self.tag == "tangential":
            return _tangential_data(M, p, Xd, Yd)
        out = screen_connection_data(M, p, x, Yd)
        if self.tag == "screen_op":
            return out
        R = _radial(M)
        out = out + rho_gradient(M, p, Xd, Yd) * R
        if self.tag == "main":
            return out
        out = out - 0.5 * d_rho_data(M, p, Xd, Yd) * R
        if self.tag == "admissible":
            out = out + self.sigma(p, x, Yd[0]) * R
        return out

    def __call__(self, p, X, Y) -> np.ndarray:
        M = self.M
        p = sigma_point(M, p)
        Xd = _data(X, M, p)
        Yd = _data(Y, M, p)
        _tangent(Xd[0])
        _tangent(Yd[0])
        return self.evaluate(p, Xd, Yd)


def _tangential_data(M, p, Xd, Yd):
    m = M.m
    x, dx = Xd
    y, dy = Yd
    if np.abs(dx[:, 0]).max() > TANGENT_TOL or np.abs(dy[:, 0]).max() > TANGENT_TOL:
        raise NonCanonicalError("tangential connection needs canonical extensions")
    w = _box(M, p, x, y, dy)
    out = np.zeros(m)
    for v in screen_vectors(M, p):
        out += (w @ v) * v
    # R-component: the continuous extension of tau^-1 box_X Y(d_m), i.e.
    # d1 of box_X Y(d_m) over d1 tau, for x1-independent coefficients
    mj = metric_at(M, p)
    ct = christoffels(M, p)
    d1w = mj.dg[:, m - 1, 0] @ (dy @ x) + x @ ct.dgamma[m - 1, :, :, 0] @ y
    out[m - 1] += d1w / g_m_value(M, p)
    return out


def main_connection(M, p_sigma, X, Y) -> np.ndarray:
    return ConnectionOnSigma(M, "main")(p_sigma, X, Y)


def main_admissible_connection(M, p_sigma, X, Y) -> np.ndarray:
    return ConnectionOnSigma(M, "main_admissible")(p_sigma, X, Y)


def admissible_connection(M, spec: AdmissibleSpec, p_sigma, X, Y) -> np.ndarray:
    return ConnectionOnSigma(M, "admissible", spec)(p_sigma, X, Y)


def tangential_connection(M, p_sigma, X, Y) -> np.ndarray:
    return ConnectionOnSigma(M, "tangential")(p_sigma, X, Y)


def torsion(M, conn: ConnectionOnSigma, p_sigma, X, Y) -> np.ndarray:
    """D_X Y - D_Y X - [X, Y]."""
    p = sigma_point(M, p_sigma)
    Xd = _data(X, M, p)
    Yd = _data(Y, M, p)
    br = Yd[1] @ Xd[0] - Xd[1] @ Yd[0]
    return conn.evaluate(p, Xd, Yd) - conn.evaluate(p, Yd, Xd) - br


def connection_curvature(M, conn: ConnectionOnSigma, p_sigma, X, Y, Z, T) -> float:
    """<D_X(D_Y Z) - D_Y(D_X Z) - D_[X,Y] Z, T> at a hypersurface point."""
    p = sigma_point(M, p_sigma)
    Xd, Yd, Zd = (_data(F, M, p) for F in (X, Y, Z))
    t = _data(T, M, p)[0]
    for v in (Xd[0], Yd[0], Zd[0], t):
        _tangent(v)

    def along(A):
        return ComputedField(M, lambda q: conn(q, A, Z))

    DYZ = along(Y).data(p)
    DXZ = along(X).data(p)
    br = Yd[1] @ Xd[0] - Xd[1] @ Yd[0]
    vec = (conn.evaluate(p, Xd, DYZ) - conn.evaluate(p, Yd, DXZ)
           - conn.evaluate(p, (br, np.zeros((M.m, M.m))), Zd))
    g = metric_at(M, p).g
    return float(vec @ g @ t)
