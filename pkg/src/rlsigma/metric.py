"""Metrics in adapted normal form, the function tau, and builtin models.

In adapted coordinates the hypersurface is {x1 = 0} and the metric reads

    g11 = 1,  g1i = 0,  g_lm = G (screen block),
    g_lam,m = x1 * g_lam,  g_mm = x1 * g_m = tau,

with g_m = 2 on the hypersurface.  Coordinate labels are 1-based in the
public API (``x1`` is label 1); numpy arrays are 0-based.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import ConfigError, ExprError, NormalFormError, PreconditionError
from .expr import Expr, eval_jet, eval_value, parse_expr
from .jets import Jet3

SIGMA_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class VectorFieldSpec:
    """Vector field with expression coefficients in the coordinate basis.

    ``canonical`` marks a canonical extension: no coefficient may depend
    on x1.
    """

    coeffs: tuple
    canonical: bool = False
    name: str = ""

    def __post_init__(self):
        if self.canonical:
            for c in self.coeffs:
                if c.depends_on(1):
                    raise ConfigError(
                        f"canonical field {self.name or '?'} references x1 in {c}"
                    )

    @classmethod
    def parse(cls, components, dimension: int, canonical: bool = False, name: str = ""):
        if len(components) != dimension:
            raise ConfigError(f"vector field {name!r} needs {dimension} components")
        coeffs = tuple(parse_expr(str(c), dimension) for c in components)
        return cls(coeffs, canonical, name)

    def jets(self, M, q) -> list[Jet3]:
        return [eval_jet(c, q) for c in self.coeffs]

    def __repr__(self):
        body = ", ".join(str(c) for c in self.coeffs)
        return f"VectorFieldSpec({self.name or ''}[{body}], canonical={self.canonical})"


@dataclass(frozen=True, eq=False)
class AdaptedMetric:
    """Metric in adapted normal form (immutable once loaded)."""

    dimension: int
    g_screen: tuple  # (m-2)x(m-2) tuple of tuples of Expr, symmetric
    g_mix: tuple  # (m-2) Expr
    g_m: Expr
    box: tuple  # m pairs (lo, hi); the first is the x1 range
    vector_fields: dict = field(default_factory=dict)
    name: str = ""
    digest: str = ""

    @property
    def m(self) -> int:
        return self.dimension

    @property
    def sigma_box(self) -> tuple:
        return self.box[1:]

    def contains(self, p, pad: float = 0.0) -> bool:
        return all(lo - pad <= x <= hi + pad for x, (lo, hi) in zip(p, self.box))


# loading ---------------------------------------------------------------

def _parse(text, dimension, where):
    try:
        return parse_expr(str(text), dimension)
    except ExprError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_metric(config: dict, name: str = "", grid_points: int = 5) -> AdaptedMetric:
    """Build and validate an :class:`AdaptedMetric` from a config mapping.

    Validation samples ``grid_points`` per axis over the hypersurface box
    and checks g_m = 2 there and positive definiteness of the screen block.
    """
    if not isinstance(config, dict):
        raise ConfigError("metric config must be a mapping")
    for key in ("dimension", "g_screen", "g_mix", "g_m"):
        if key not in config:
            raise ConfigError(f"missing key {key!r}")
    unknown = set(config) - {"dimension", "box", "g_screen", "g_mix", "g_m", "vector_fields"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    m = config["dimension"]
    if not isinstance(m, int) or m < 3:
        raise ConfigError("dimension must be an integer >= 3")
    n = m - 2

    rows = config["g_screen"]
    if len(rows) != n:
        raise ConfigError(f"g_screen needs {n} rows")
    screen = [[None] * n for _ in range(n)]
    for i, row in enumerate(rows):
        # either a full row or the upper triangle starting at the diagonal
        if len(row) == n:
            cells = {j: row[j] for j in range(n)}
        elif len(row) == n - i:
            cells = {i + k: row[k] for k in range(n - i)}
        else:
            raise ConfigError(f"g_screen row {i} has wrong length")
        for j, text in cells.items():
            e = _parse(text, m, f"g_screen[{i}][{j}]")
            if j >= i:
                screen[i][j] = e
                if screen[j][i] is None or j == i:
                    screen[j][i] = e
            elif screen[i][j] is None:
                screen[i][j] = e
    for i in range(n):
        for j in range(i):
            if str(screen[i][j]) != str(screen[j][i]):
                raise ConfigError(f"g_screen is not symmetric at ({i}, {j})")
    if len(config["g_mix"]) != n:
        raise ConfigError(f"g_mix needs {n} entries")
    mix = tuple(_parse(t, m, f"g_mix[{i}]") for i, t in enumerate(config["g_mix"]))
    gm = _parse(config["g_m"], m, "g_m")

    box = config.get("box")
    if box is None:
        box = [[-0.3, 0.3]] + [[-1.0, 1.0]] * (m - 1)
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(box) != m or any(lo >= hi for lo, hi in box):
        raise ConfigError("box needs m increasing [lo, hi] pairs (x1 first)")
    if not box[0][0] < 0.0 < box[0][1]:
        raise ConfigError("x1 range of the box must contain 0")

    fields = {}
    for fname, spec in (config.get("vector_fields") or {}).items():
        if isinstance(spec, dict):
            comps = spec.get("components")
            canonical = bool(spec.get("canonical", False))
        else:
            comps, canonical = spec, False
        if comps is None:
            raise ConfigError(f"vector field {fname!r} lacks components")
        try:
            fields[fname] = VectorFieldSpec.parse(comps, m, canonical, fname)
        except ExprError as exc:
            raise ConfigError(f"vector field {fname!r}: {exc}") from exc

    digest = hashlib.sha256(
        json.dumps(config, sort_keys=True, default=str).encode()
    ).hexdigest()
    M = AdaptedMetric(m, tuple(tuple(r) for r in screen), mix, gm, box, fields,
                      name, digest)
    validate_metric(M, grid_points)
    return M


def sigma_grid(M: AdaptedMetric, points_per_axis: int = 5) -> list[np.ndarray]:
    """Regular grid of hypersurface points over the declared box."""
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in M.sigma_box]
    return [np.array((0.0,) + c) for c in itertools.product(*axes)]


def validate_metric(M: AdaptedMetric, points_per_axis: int = 5) -> None:
    """Check the normal-form invariants on a hypersurface grid."""
    for p in sigma_grid(M, points_per_axis):
        gm = eval_value(M.g_m, p)
        if abs(gm - 2.0) > 1e-10:
            raise NormalFormError(f"g_m on the hypersurface is {gm!r}, expected 2", p)
        G = screen_block_values(M, p)
        try:
            np.linalg.cholesky(G)
        except np.linalg.LinAlgError:
            raise NormalFormError("screen block is not positive definite", p) from None


def screen_block_values(M: AdaptedMetric, p) -> np.ndarray:
    n = M.m - 2
    return np.array([[eval_value(M.g_screen[i][j], p) for j in range(n)]
                     for i in range(n)])


def load_metric_file(path) -> AdaptedMetric:
    path = Path(path)
    try:
        config = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return load_metric(config, name=path.stem)


# builtin models ----------------------------------------------------------

_DEFAULT_BOX3 = [[-0.3, 0.3], [-1.0, 1.0], [-1.0, 1.0]]

BUILTIN_CONFIGS = {
    "flat": {"dimension": 3, "box": _DEFAULT_BOX3,
             "g_screen": [["1"]], "g_mix": ["0"], "g_m": "2"},
    "hcurved": {"dimension": 3, "box": _DEFAULT_BOX3,
                "g_screen": [["1 + x1*x2"]], "g_mix": ["0"], "g_m": "2"},
    "iicurved": {"dimension": 3, "box": [[-0.3, 0.3], [-1.0, 1.0], [-0.45, 1.0]],
                 "g_screen": [["1 + x3"]], "g_mix": ["0"], "g_m": "2"},
    "twisted": {"dimension": 3, "box": _DEFAULT_BOX3,
                "g_screen": [["1"]], "g_mix": ["x3"], "g_m": "2"},
    "dim4": {"dimension": 4, "box": [[-0.3, 0.3]] + [[-1.0, 1.0]] * 3,
             "g_screen": [["1 + x1*x2", "0"], ["0", "1 + x1*x3"]],
             "g_mix": ["0", "0"], "g_m": "2"},
}

BUILTIN_NAMES = tuple(BUILTIN_CONFIGS)


@lru_cache(maxsize=None)
def builtin(name: str) -> AdaptedMetric:
    """Return one of the builtin models by name."""
    if name not in BUILTIN_CONFIGS:
        raise ConfigError(f"unknown builtin model {name!r}; choose from {BUILTIN_NAMES}")
    return load_metric(BUILTIN_CONFIGS[name], name=name)


def resolve_model(ref: str) -> AdaptedMetric:
    """``builtin:<name>`` or a path to a JSON config."""
    if ref.startswith("builtin:"):
        return builtin(ref.split(":", 1)[1])
    return load_metric_file(ref)


# evaluation --------------------------------------------------------------

class MetricJet:
    """Metric components at a point as jets plus dense derivative arrays.

    Dense arrays put derivative axes last: ``dg[a, b, k] = d_k g_ab``.
    """

    def __init__(self, point, entries):
        self.point = point
        self.entries = entries
        m = len(point)
        basis = entries[0][0].basis
        C = np.array([[entries[a][b].coeffs for b in range(m)] for a in range(m)])
        self.g = C[..., 0].copy()
        self.dg = C[..., basis.idx1]
        self.d2g = C[..., basis.idx2] * basis.fac2
        self.d3g = C[..., basis.idx3] * basis.fac3

    def __getitem__(self, ab) -> Jet3:
        a, b = ab
        return self.entries[a][b]

    @property
    def dimension(self) -> int:
        return len(self.point)

    def values(self) -> np.ndarray:
        return self.g.copy()


def _as_point(M: AdaptedMetric, p) -> tuple:
    p = tuple(float(x) for x in p)
    if len(p) != M.m:
        raise PreconditionError(f"point needs {M.m} coordinates, got {len(p)}")
    return p


@lru_cache(maxsize=8192)
def _metric_at_cached(M: AdaptedMetric, p: tuple) -> MetricJet:
    m = M.m
    x1 = Jet3.variable(m, 0, p)
    zero = Jet3.constant(m, 0.0, p)
    one = Jet3.constant(m, 1.0, p)
    E = [[zero] * m for _ in range(m)]
    E[0][0] = one
    for i in range(m - 2):
        for j in range(i, m - 2):
            e = eval_jet(M.g_screen[i][j], p)
            E[i + 1][j + 1] = E[j + 1][i + 1] = e
        mix = x1 * eval_jet(M.g_mix[i], p)
        E[i + 1][m - 1] = E[m - 1][i + 1] = mix
    E[m - 1][m - 1] = x1 * eval_jet(M.g_m, p)
    return MetricJet(p, [tuple(r) for r in E])


def metric_at(M: AdaptedMetric, p) -> MetricJet:
    """Assemble the metric at ``p`` with every entry an order-3 jet."""
    return _metric_at_cached(M, _as_point(M, p))


def tau_at(M: AdaptedMetric, p) -> Jet3:
    """Jet of tau = x1 * g_m, the squared length of the radical field."""
    return metric_at(M, p)[M.m - 1, M.m - 1]


def g_m_value(M: AdaptedMetric, p) -> float:
    return eval_value(M.g_m, p)


def tau_inverse_metric(M: AdaptedMetric, p) -> np.ndarray:
    """The regular matrix P = tau * g^{-1}, valid on and off the hypersurface.

    Uses the block form of the normal-form metric, so no division by x1
    occurs and the result is smooth across {x1 = 0}.
    """
    p = _as_point(M, p)
    m = M.m
    x = p[0]
    g = metric_at(M, p).g
    G = g[1:m - 1, 1:m - 1]
    u = np.array([eval_value(e, p) for e in M.g_mix])
    gm = eval_value(M.g_m, p)
    Ginv = np.linalg.inv(G)
    Gu = Ginv @ u
    sig = gm - x * u @ Gu
    P = np.zeros((m, m))
    P[0, 0] = x * gm
    P[1:m - 1, 1:m - 1] = x * gm * Ginv + x * x * gm * np.outer(Gu, Gu) / sig
    P[1:m - 1, m - 1] = P[m - 1, 1:m - 1] = -x * gm * Gu / sig
    P[m - 1, m - 1] = gm / sig
    return P


def tau_inverse_metric_x1(M: AdaptedMetric, p) -> np.ndarray:
    """d/dx1 of P = tau * g^{-1} at a hypersurface point."""
    p = _as_point(M, p)
    if p[0] != 0.0:
        raise PreconditionError("x1-derivative of tau*g^-1 is provided on the hypersurface only")
    m = M.m
    g = metric_at(M, p).g
    Ginv = np.linalg.inv(g[1:m - 1, 1:m - 1])
    u = np.array([eval_value(e, p) for e in M.g_mix])
    gm = eval_value(M.g_m, p)
    Gu = Ginv @ u
    D = np.zeros((m, m))
    D[0, 0] = gm
    D[1:m - 1, 1:m - 1] = gm * Ginv
    D[1:m - 1, m - 1] = D[m - 1, 1:m - 1] = -Gu
    D[m - 1, m - 1] = u @ Gu / gm
    return D


def signature_probe(M: AdaptedMetric, p) -> str:
    """'Riemann' or 'Lorentz' from eigenvalue signs off the hypersurface."""
    p = _as_point(M, p)
    if p[0] == 0.0:
        raise PreconditionError("signature probe needs x1 != 0")
    eig = np.linalg.eigvalsh(metric_at(M, p).g)
    neg = int(np.sum(eig < 0))
    if np.any(np.abs(eig) < 1e-14):
        raise NormalFormError("metric is degenerate off the hypersurface", p)
    if neg == 0:
        return "Riemann"
    if neg == 1:
        return "Lorentz"
    raise NormalFormError(f"signature has {neg} negative directions", p)


def sigma_point(M: AdaptedMetric, p) -> np.ndarray:
    """Validate that ``p`` lies on the hypersurface and return it as an array."""
    from .errors import NotOnSigmaError

    p = np.asarray(_as_point(M, p))
    if p[0] != 0.0:
        raise NotOnSigmaError(f"point {tuple(p)} is not on the hypersurface (x1 != 0)")
    return p
