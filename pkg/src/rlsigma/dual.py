"""The dual connection (Koszul form), Christoffel symbols, and limits at the hypersurface.

``koszul`` evaluates the dual connection

    2 box_A B(C) = A<B,C> + B<C,A> - C<A,B> + <[A,B],C> - <[B,C],A> + <[C,A],B>

directly from coefficient jets, so it is regular on the hypersurface where
the metric degenerates.  The Levi-Civita connection only exists off the
hypersurface; its limits are extracted exactly with one extra x1-derivative.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NotVanishingError, PreconditionError
from .expr import Expr, eval_jet
from .fields import ScreenField, as_field, field_data
from .jets import Jet3
from .metric import AdaptedMetric, _as_point, g_m_value, metric_at, sigma_point

VANISH_TOL = 1e-10


@dataclass(frozen=True)
class Divergent:
    """A limit that does not exist; ``obstruction`` is the quantity that must vanish."""

    obstruction: float

    @property
    def divergent(self) -> bool:
        return True


class ChristoffelTable:
    """First-kind symbols ``gamma[c, a, b] = box_{d_a} d_b (d_c)`` and their partials.

    ``dgamma[c, a, b, k]`` is the derivative along x<k+1> and ``d2gamma``
    carries two derivative axes.  Calling the table uses 1-based labels.
    """

    def __init__(self, point, gamma, dgamma, d2gamma):
        self.point = point
        self.gamma = gamma
        self.dgamma = dgamma
        self.d2gamma = d2gamma

    def __call__(self, c: int, a: int, b: int) -> float:
        return float(self.gamma[c - 1, a - 1, b - 1])


def _first_kind(dg):
    # dg[a, b, k] = d_k g_ab ; result[c, a, b] = 1/2 (d_a g_bc + d_b g_ac - d_c g_ab)
    t = np.moveaxis(dg, -1, 0)  # t[k, a, b]
    return 0.5 * (np.transpose(t, (2, 0, 1)) + np.transpose(t, (2, 1, 0)) - t)


def christoffels(M: AdaptedMetric, p) -> ChristoffelTable:
    return _christoffels_cached(M, _as_point(M, p))


@lru_cache(maxsize=8192)
def _christoffels_cached(M, p):
    mj = metric_at(M, p)
    gamma = _first_kind(mj.dg)
    m = M.m
    dgamma = np.empty((m, m, m, m))
    d2gamma = np.empty((m, m, m, m, m))
    for k in range(m):
        dgamma[..., k] = _first_kind(mj.d2g[:, :, :, k])
        for n in range(m):
            d2gamma[..., k, n] = _first_kind(mj.d3g[:, :, :, k, n])
    return ChristoffelTable(p, gamma, dgamma, d2gamma)


# jet-level helpers --------------------------------------------------------

def _inner_jet(mj, X, Y):
    m = len(X)
    out = None
    for a in range(m):
        for b in range(m):
            gab = mj[a, b]
            if not gab.coeffs.any():
                continue
            t = gab * X[a] * Y[b]
            out = t if out is None else out + t
    return out if out is not None else 0.0 * X[0]


def _apply(X, f: Jet3):
    out = None
    for k, xk in enumerate(X):
        t = xk * f.derivative(k + 1)
        out = t if out is None else out + t
    return out


def _bracket(X, Y):
    m = len(X)
    out = []
    for a in range(m):
        s = None
        for k in range(m):
            t = X[k] * Y[a].derivative(k + 1) - Y[k] * X[a].derivative(k + 1)
            s = t if s is None else s + t
        out.append(s)
    return out


def koszul_jet(M: AdaptedMetric, p, A, B, C) -> Jet3:
    """Jet (valid to order 2) of the function box_A B(C) near ``p``."""
    p = _as_point(M, p)
    mj = metric_at(M, p)
    Aj, Bj, Cj = (as_field(F).jets(M, p) for F in (A, B, C))
    two = (_apply(Aj, _inner_jet(mj, Bj, Cj)) + _apply(Bj, _inner_jet(mj, Cj, Aj))
           - _apply(Cj, _inner_jet(mj, Aj, Bj))
           + _inner_jet(mj, _bracket(Aj, Bj), Cj) - _inner_jet(mj, _bracket(Bj, Cj), Aj)
           + _inner_jet(mj, _bracket(Cj, Aj), Bj))
    return two * 0.5


def koszul(M: AdaptedMetric, p, A, B, C) -> float:
    """The dual connection box_A B(C) at ``p`` (regular on the hypersurface)."""
    return koszul_jet(M, p, A, B, C).value


def koszul_covector(M: AdaptedMetric, p, A, B) -> np.ndarray:
    """Values ``w[d] = box_A B(d_d)`` from the Christoffel form."""
    p = _as_point(M, p)
    g = metric_at(M, p).g
    a, _ = field_data(A, M, p)
    b, db = field_data(B, M, p)
    gam = christoffels(M, p).gamma
    return g @ (db @ a) + np.einsum("dab,a,b->d", gam, a, b)


def koszul_covector_x1(M: AdaptedMetric, p, A, B) -> np.ndarray:
    """x1-derivative of ``w[d] = box_A B(d_d)`` at ``p``, exact from jets."""
    p = _as_point(M, p)
    mj = metric_at(M, p)
    Aj = as_field(A).jets(M, p)
    Bj = as_field(B).jets(M, p)
    a = np.array([j.value for j in Aj])
    da = np.array([j.gradient() for j in Aj])  # da[a, k]
    b = np.array([j.value for j in Bj])
    db = np.array([j.gradient() for j in Bj])
    # second derivatives d_1 d_k B^b
    d1db = np.array([j.derivative(1).gradient() for j in Bj])  # [b, k]
    ct = christoffels(M, p)
    g, g1 = mj.g, mj.dg[:, :, 0]
    term1 = g1 @ (db @ a) + g @ (d1db @ a + db @ da[:, 0])
    term2 = (np.einsum("dab,a,b->d", ct.dgamma[..., 0], a, b)
             + np.einsum("dab,a,b->d", ct.gamma, da[:, 0], b)
             + np.einsum("dab,a,b->d", ct.gamma, a, db[:, 0]))
    return term1 + term2


def nabla_offsigma(M: AdaptedMetric, p, A, B) -> np.ndarray:
    """Levi-Civita derivative off the hypersurface: ``g^{cd} box_A B(d_d)``."""
    p = _as_point(M, p)
    if p[0] == 0.0:
        raise PreconditionError("metric is singular on the hypersurface")
    g = metric_at(M, p).g
    return np.linalg.solve(g, koszul_covector(M, p, A, B))


def lhopital_limit(M: AdaptedMetric, p_sigma, f) -> float:
    """Continuous extension of tau^{-1} f to the hypersurface point.

    ``f`` is an :class:`Expr` or a callable returning the jet of f at a point.
    """
    p = sigma_point(M, p_sigma)
    jet = eval_jet(f, p) if isinstance(f, Expr) else f(p)
    if abs(jet.value) > VANISH_TOL:
        raise NotVanishingError(abs(jet.value))
    return jet.partial(1) / g_m_value(M, p)


def screen_vectors(M: AdaptedMetric, p) -> list[np.ndarray]:
    """Orthonormal screen basis at a hypersurface point (values of ScreenField)."""
    return [np.array([j.value for j in ScreenField(lam).jets(M, p)])
            for lam in range(2, M.m)]


def nabla_limit(M: AdaptedMetric, p_sigma, A, B):
    """Limit of the Levi-Civita derivative at the hypersurface.

    Returns the coordinate vector of the limit, or :class:`Divergent`
    carrying II(A, B) when that obstruction does not vanish.
    """
    p = sigma_point(M, p_sigma)
    m = M.m
    w = koszul_covector(M, p, A, B)
    ii = float(w[m - 1])
    if abs(ii) > VANISH_TOL:
        return Divergent(ii)
    out = np.zeros(m)
    out[0] = w[0]
    for v in screen_vectors(M, p):
        out += (w @ v) * v
    w1 = koszul_covector_x1(M, p, A, B)
    out[m - 1] += w1[m - 1] / g_m_value(M, p)
    return out
