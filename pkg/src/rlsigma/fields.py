"""Vector fields evaluated as coefficient jets.

Every field type exposes ``jets(M, q) -> list[Jet3]`` (one jet per
coordinate component) and a ``canonical`` flag.  Canonical fields have
coefficients independent of x1, so their jets carry no x1-derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import jets as J
from .expr import Expr, eval_jet
from .jets import Jet3
from .metric import AdaptedMetric, VectorFieldSpec, metric_at

__all__ = [
    "VectorFieldSpec", "CoordinateField", "ConstantField", "ScreenField",
    "PerturbedField", "LinearCombination", "ScaledField", "field_value", "field_data",
    "normal_field", "radical_field", "frame_fields",
]


@dataclass(frozen=True)
class CoordinateField:
    """The coordinate field d/dx<label>."""

    label: int
    canonical: bool = True

    def jets(self, M, q):
        m = M.m
        return [Jet3.constant(m, 1.0 if a == self.label - 1 else 0.0) for a in range(m)]

    @property
    def name(self):
        return f"d{self.label}"


@dataclass(frozen=True, eq=False)
class ConstantField:
    """Field with constant coordinate coefficients."""

    vector: tuple
    canonical: bool = True
    name: str = "const"

    def jets(self, M, q):
        return [Jet3.constant(M.m, float(v)) for v in self.vector]


@lru_cache(maxsize=8192)
def _screen_jets(M: AdaptedMetric, sigma_coords: tuple) -> tuple:
    """Canonical screen basis jets at (0, x'), x1-derivatives removed."""
    m = M.m
    n = m - 2
    q0 = (0.0,) + sigma_coords
    gj = metric_at(M, q0)
    G = [[gj[i + 1, j + 1].drop_axis(1) for j in range(n)] for i in range(n)]
    half_mix = [eval_jet(e, q0).drop_axis(1) * 0.5 for e in M.g_mix]
    # Cholesky G = L L^T in jet arithmetic
    L = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = G[i][j]
            for k in range(j):
                s = s - L[i][k] * L[j][k]
            L[i][j] = J.sqrt(s) if i == j else s / L[j][j]
    # rows of A = L^{-1}: V_i = sum_j A[i][j] W_j (Gram-Schmidt in order)
    zero = Jet3.constant(m, 0.0)
    A = [[zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = (1.0 if i == j else 0.0) + zero
            for k in range(j, i):
                s = s - L[i][k] * A[k][j]
            A[i][j] = s / L[i][i]
    out = []
    for i in range(n):
        comps = [zero] * m
        radial = zero
        for j in range(n):
            comps[j + 1] = A[i][j]
            radial = radial - A[i][j] * half_mix[j]
        comps[m - 1] = radial
        out.append(tuple(comps))
    return tuple(out)


@dataclass(frozen=True)
class ScreenField:
    """Canonical extension of the orthonormal screen vector V<label>.

    ``label`` runs over 2..m-1 like the screen coordinates.
    """

    label: int
    canonical: bool = True

    def jets(self, M, q):
        return list(_screen_jets(M, tuple(float(x) for x in q[1:]))[self.label - 2])

    @property
    def name(self):
        return f"V{self.label}"


@dataclass(frozen=True, eq=False)
class PerturbedField:
    """base + tau * factor * bar: an extension agreeing with ``base`` on the hypersurface."""

    base: object
    bar: object
    factor: Expr | None = None
    canonical: bool = False

    def jets(self, M, q):
        tau = metric_at(M, q)[M.m - 1, M.m - 1]
        scale = tau if self.factor is None else tau * eval_jet(self.factor, q)
        return [a + scale * b for a, b in zip(self.base.jets(M, q), self.bar.jets(M, q))]

    @property
    def name(self):
        return f"{getattr(self.base, 'name', '?')}+tau*{getattr(self.bar, 'name', '?')}"


@dataclass(frozen=True, eq=False)
class LinearCombination:
    """Constant-coefficient combination sum c_i F_i."""

    terms: tuple  # of (coefficient, field)

    @property
    def canonical(self):
        return all(getattr(f, "canonical", False) for _, f in self.terms)

    def jets(self, M, q):
        out = None
        for c, f in self.terms:
            js = [c * j for j in f.jets(M, q)]
            out = js if out is None else [a + b for a, b in zip(out, js)]
        return out


@dataclass(frozen=True, eq=False)
class ScaledField:
    """factor * base for a scalar expression ``factor``."""

    factor: Expr
    base: object

    @property
    def canonical(self):
        return getattr(self.base, "canonical", False) and not self.factor.depends_on(1)

    def jets(self, M, q):
        f = eval_jet(self.factor, q)
        return [f * j for j in self.base.jets(M, q)]

    @property
    def name(self):
        return f"({self.factor})*{getattr(self.base, 'name', '?')}"


def normal_field(M) -> CoordinateField:
    return CoordinateField(1)


def radical_field(M) -> CoordinateField:
    return CoordinateField(M.m)


def frame_fields(M) -> dict:
    """Named canonical frame fields N, V2..V<m-1>, R."""
    out = {"N": normal_field(M)}
    for lam in range(2, M.m):
        out[f"V{lam}"] = ScreenField(lam)
    out["R"] = radical_field(M)
    return out


def as_field(F):
    """Accept a field object or a plain vector (constant canonical field)."""
    if hasattr(F, "jets"):
        return F
    return ConstantField(tuple(float(x) for x in F))


def field_value(F, M, q) -> np.ndarray:
    return np.array([j.value for j in as_field(F).jets(M, q)])


def field_data(F, M, q):
    """Value and first derivatives ``dA[a, k] = d_k A^a`` at ``q``."""
    js = as_field(F).jets(M, q)
    return (np.array([j.value for j in js]), np.array([j.gradient() for j in js]))
