"""Shearing of nearby unipotent orbits.

A group element g is split into blocks::

    [[a1,  g12, g1*],
     [g21, a2,  g2*],
     [g*1, g*2, a* ]]

and u(r) = I + r E_12.  ``shear`` evaluates g(r) = u(r) g u(-r) in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from .errors import ContractError, NumericError
from .flow import conjugate_diag
from .lattice import DET_TOLERANCE, DiagParam, matrix_metric

ACCEPT_C = 4.0
GROWTH = 1.05
SCALING_TOLERANCE = 1e-12


class NoShearError(ContractError):
    """Raised when g lies in L, where the shear never leaves the centralizer."""


@dataclass(frozen=True, eq=False)
class ShearState:
    matrix: np.ndarray
    exact: bool = False

    def __post_init__(self) -> None:
        if self.exact:
            arr = np.array([[Fraction(x) for x in row] for row in self.matrix], dtype=object)
        else:
            arr = np.array(self.matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
            raise ContractError(f"ShearState needs a square matrix with k >= 2, got shape {arr.shape}")
        det = _exact_det(arr) if self.exact else float(np.linalg.det(arr))
        if abs(float(det) - 1.0) > DET_TOLERANCE:
            raise ContractError(f"ShearState must have determinant 1, got {float(det)!r}")
        object.__setattr__(self, "matrix", arr)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    a1 = property(lambda self: self.matrix[0, 0])
    a2 = property(lambda self: self.matrix[1, 1])
    g12 = property(lambda self: self.matrix[0, 1])
    g21 = property(lambda self: self.matrix[1, 0])
    g1s = property(lambda self: self.matrix[0, 2:])
    g2s = property(lambda self: self.matrix[1, 2:])
    gs1 = property(lambda self: self.matrix[2:, 0])
    gs2 = property(lambda self: self.matrix[2:, 1])
    astar = property(lambda self: self.matrix[2:, 2:])

    def as_float(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    def to_json(self) -> dict:
        if self.exact:
            return {"exact": True, "rows": [[f"{x.numerator}/{x.denominator}" for x in row] for row in self.matrix]}
        return {"exact": False, "rows": [[float(x) for x in row] for row in self.matrix]}

    @classmethod
    def from_json(cls, data: dict) -> "ShearState":
        if "rows" not in data:
            raise ContractError("ShearState JSON needs a 'rows' entry")
        exact = bool(data.get("exact", False))
        rows = [[Fraction(x) if exact else float(x) for x in row] for row in data["rows"]]
        return cls(np.array(rows, dtype=object if exact else float), exact=exact)


@dataclass(frozen=True)
class KappaValues:
    kappa: float
    kappa_a: float
    kappa_u: float


@dataclass(frozen=True)
class ShearTime:
    r: float
    C: float
    max_term: float
    method: str


def _exact_det(arr: np.ndarray) -> Fraction:
    rows = [list(row) for row in arr]
    n = len(rows)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        for r in range(col + 1, n):
            factor = rows[r][col] / rows[col][col]
            rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return det


def unipotent(k: int, r, exact: bool = False) -> np.ndarray:
    """u(r) = I + r E_12."""
    if exact:
        u = np.array([[Fraction(int(i == j)) for j in range(k)] for i in range(k)], dtype=object)
        u[0, 1] = Fraction(r)
    else:
        u = np.eye(k)
        u[0, 1] = r
    return u


def shear(g: ShearState, r) -> ShearState:
    """Closed-form g(r) = u(r) g u(-r)."""
    if g.exact:
        r = Fraction(r)
    m = g.matrix.copy()
    a1, a2, g21 = g.a1, g.a2, g.g21
    m[0, 0] = a1 + g21 * r
    m[0, 1] = g.g12 + (a2 - a1) * r - g21 * r * r
    m[0, 2:] = g.g1s + g.g2s * r
    m[1, 1] = a2 - g21 * r
    m[2:, 1] = g.gs2 - g.gs1 * r
    return ShearState(m, exact=g.exact)


def shear_direct(g: ShearState, r) -> np.ndarray:
    """u(r) g u(-r) by matrix multiplication."""
    if g.exact:
        r = Fraction(r)
    return unipotent(g.k, r, g.exact).dot(g.matrix).dot(unipotent(g.k, -r, g.exact))


def shear_discrepancy(g: ShearState, r) -> float:
    closed = shear(g, r).matrix
    direct = shear_direct(g, r)
    if g.exact:
        return float(max(abs(a - b) for a, b in zip(closed.ravel(), direct.ravel())))
    return matrix_metric(closed, direct)


def _sup(values) -> float:
    values = [abs(float(x)) for x in np.ravel(values)]
    return max(values) if values else 0.0


def kappa(g: ShearState) -> KappaValues:
    kappa_a = abs(float(g.a2) - float(g.a1))
    kappa_u = max(math.sqrt(abs(float(g.g21))), _sup(g.gs1), _sup(g.g2s))
    return KappaValues(kappa=max(kappa_a, kappa_u), kappa_a=kappa_a, kappa_u=kappa_u)


def flow_conjugate_shear(g: ShearState, tau: float) -> ShearState:
    """Conjugate by diag(e^-tau, e^tau, 1, ..., 1); kappa_u scales by e^tau."""
    t = DiagParam((-tau, tau) + (0.0,) * (g.k - 2))
    out = ShearState(conjugate_diag(t, g.as_float()))
    before, after = kappa(g), kappa(out)
    scale = math.exp(tau)
    if abs(after.kappa_a - before.kappa_a) > SCALING_TOLERANCE * max(1.0, before.kappa_a):
        raise NumericError("kappa_a changed under flow conjugation")
    if abs(after.kappa_u - scale * before.kappa_u) > SCALING_TOLERANCE * max(1.0, scale * before.kappa_u):
        raise NumericError("kappa_u did not scale by e^tau under flow conjugation")
    return out


def shear_terms(g: ShearState, r: float) -> float:
    """max(|(a2 - a1) r - g21 r^2|, ||g2* r||, ||g*1 r||)."""
    a_gap = float(g.a2) - float(g.a1)
    g21 = float(g.g21)
    return max(abs(a_gap * r - g21 * r * r), _sup(g.g2s) * abs(r), _sup(g.gs1) * abs(r))


def achieved_constant(g: ShearState, r: float) -> Tuple[float, float]:
    """(C, max term) with C = max(M, 1/M, |g21 r| / delta^{3/8})."""
    delta = matrix_metric(g.as_float(), np.eye(g.k))
    term = shear_terms(g, r)
    inverse = math.inf if term == 0 else 1.0 / term
    drift = abs(float(g.g21) * r) / delta ** 0.375 if delta > 0 else 0.0
    return max(term, inverse, drift), term


def find_shear_time(g: ShearState, rho: float = 0.5, *, growth: float = GROWTH, accept: float = ACCEPT_C) -> ShearTime:
    """A shear time r with the divergence bounded above and below.

    Tries r = 1/kappa, then 2/kappa when the two leading terms nearly cancel,
    then a multiplicative grid over [1/(4 kappa), rho^-5 / kappa].
    """
    if not 0 < rho < 1:
        raise ContractError(f"rho must lie in (0, 1), got {rho}")
    if not growth > 1:
        raise ContractError(f"growth must exceed 1, got {growth}")
    values = kappa(g)
    if values.kappa == 0:
        raise NoShearError("g lies in L: a2 - a1, g21, g*1 and g2* all vanish")
    base = 1.0 / values.kappa
    for factor, method in ((1.0, "inverse-kappa"), (2.0, "doubled")):
        C, term = achieved_constant(g, factor * base)
        if C <= accept:
            return ShearTime(r=factor * base, C=C, max_term=term, method=method)
    best: Optional[ShearTime] = None
    r, upper = base / 4, base * rho ** -5
    while r <= upper:
        C, term = achieved_constant(g, r)
        if best is None or C < best.C:
            best = ShearTime(r=r, C=C, max_term=term, method="grid")
        r *= growth
    if best is None or not math.isfinite(best.C):
        raise NumericError("No shear time with a finite constant on the search interval")
    return best


def random_shear_state(rng: np.random.Generator, k: int = 3, radius: float = 0.1) -> ShearState:
    g = np.eye(k) + rng.uniform(-radius, radius, size=(k, k))
    return ShearState(g / np.linalg.det(g) ** (1.0 / k))
