"""Unimodular lattices, the diagonal action and shortest vectors.

A lattice is stored as a base matrix (columns generate it) together with an
optional accumulated diagonal flow ``t``; the point of X it represents is
``diag(e^t) @ base``.  Keeping the flow separate lets lattice images be
recomputed from integer coefficients without cancellation when ``t`` has a
large spread, which is what makes shortest vectors of far-flowed lattices
computable at all.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
import sympy

from .errors import ContractError, DimensionMismatchError, DomainError, NumericError

Number = Union[int, float, Fraction]

NORMS = ("sup", "euclidean")
DET_TOLERANCE = 1e-9
TRACE_TOLERANCE = 1e-12
CONDITION_LIMIT = 1e12
MP_SPREAD = 18.0
MP_DPS = 40
MAX_K = 6
LLL_DELTA = 0.99
ENUMERATION_LIMIT = 50_000_000
_CHUNK = 200_000


class IllConditionedError(NumericError):
    """Raised when a basis is too close to singular to enumerate reliably."""


def frac_dist(w):
    """Distance from ``w`` to the nearest integer, in [0, 1/2]."""
    if isinstance(w, Fraction):
        return abs(w - math.floor(w + Fraction(1, 2)))
    if isinstance(w, int):
        return 0
    if isinstance(w, mpmath.mpf):
        if not mpmath.isfinite(w):
            raise DomainError(f"frac_dist needs a finite value, got {w}")
        return abs(w - mpmath.floor(w + mpmath.mpf("0.5")))
    x = float(w)
    if not math.isfinite(x):
        raise DomainError(f"frac_dist needs a finite value, got {w}")
    return abs(x - math.floor(x + 0.5))


@dataclass(frozen=True)
class DiagParam:
    """Trace-zero parameter t of alpha^t = diag(e^{t_1}, ..., e^{t_k})."""

    t: Tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(x) for x in self.t)
        object.__setattr__(self, "t", values)
        if len(values) < 2:
            raise ContractError("DiagParam needs at least two coordinates")
        if not all(math.isfinite(x) for x in values):
            raise DomainError(f"DiagParam entries must be finite: {values}")
        scale = max(1.0, max(abs(x) for x in values))
        if abs(math.fsum(values)) > TRACE_TOLERANCE * scale:
            raise ContractError(f"DiagParam must have trace zero, got sum {math.fsum(values)!r}")

    @classmethod
    def zero(cls, k: int) -> "DiagParam":
        return cls((0.0,) * k)

    @classmethod
    def quadrant(cls, r: float, s: float) -> "DiagParam":
        """The A+ element (-r-s, r, s) used for the pair lattices."""
        return cls((-r - s, r, s))

    @property
    def k(self) -> int:
        return len(self.t)

    @property
    def spread(self) -> float:
        return max(self.t) - min(self.t)

    def __add__(self, other: "DiagParam") -> "DiagParam":
        _check_dim(self.k, other.k, "DiagParam")
        return DiagParam(tuple(a + b for a, b in zip(self.t, other.t)))

    def __neg__(self) -> "DiagParam":
        return DiagParam(tuple(-a for a in self.t))

    def scaled(self, factor: float) -> "DiagParam":
        return DiagParam(tuple(factor * a for a in self.t))

    def exp(self) -> np.ndarray:
        return np.exp(np.array(self.t))


@dataclass(frozen=True)
class ShortVectorResult:
    """A shortest nonzero lattice vector: coefficients, image and norm."""

    vector: Tuple[int, ...]
    image: Tuple[float, ...]
    norm: float


@dataclass(frozen=True)
class LatticeBasis:
    """Columns of ``diag(e^flow) @ base`` generate a unimodular lattice."""

    base: Tuple[Tuple[Number, ...], ...]
    mode: str = "float"
    flow: Optional[DiagParam] = None
    _det: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.mode not in ("float", "exact"):
            raise ContractError(f"Unknown lattice mode: {self.mode}")
        rows = tuple(tuple(self._coerce(x) for x in row) for row in self.base)
        object.__setattr__(self, "base", rows)
        k = len(rows)
        if k < 2 or k > MAX_K:
            raise ContractError(f"Lattice dimension must be between 2 and {MAX_K}, got {k}")
        for row in rows:
            _check_dim(k, len(row), "row length")
        if self.flow is not None:
            _check_dim(k, self.flow.k, "flow dimension")
        det = _determinant(rows, self.mode)
        object.__setattr__(self, "_det", det)
        if abs(float(det) - 1.0) > DET_TOLERANCE:
            raise ContractError(f"Basis is not unimodular: det = {float(det)!r}")

    def _coerce(self, x):
        try:
            exact = Fraction(x) if isinstance(x, str) else x
            if self.mode == "exact":
                return Fraction(exact)
            value = float(exact)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ContractError(f"Invalid lattice entry {x!r}: {exc}") from exc
        if not math.isfinite(value):
            raise DomainError(f"Lattice entries must be finite, got {x!r}")
        return value

    @classmethod
    def from_matrix(cls, matrix, mode: str = "float") -> "LatticeBasis":
        if mode == "exact":
            rows = tuple(tuple(Fraction(x) for x in row) for row in matrix)
        else:
            arr = np.asarray(matrix, dtype=float)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ContractError(f"Basis must be a square matrix, got shape {arr.shape}")
            rows = tuple(tuple(float(x) for x in row) for row in arr)
        return cls(rows, mode=mode)

    @classmethod
    def identity(cls, k: int, mode: str = "float") -> "LatticeBasis":
        one, zero = (Fraction(1), Fraction(0)) if mode == "exact" else (1.0, 0.0)
        return cls(tuple(tuple(one if i == j else zero for j in range(k)) for i in range(k)), mode=mode)

    @property
    def k(self) -> int:
        return len(self.base)

    @property
    def det(self) -> float:
        return float(self._det)

    @property
    def spread(self) -> float:
        return self.flow.spread if self.flow is not None else 0.0

    @property
    def matrix(self) -> np.ndarray:
        """The materialized floating basis matrix diag(e^flow) @ base."""
        arr = np.array([[float(x) for x in row] for row in self.base])
        if self.flow is not None:
            arr = self.flow.exp()[:, None] * arr
        return arr

    def to_json(self) -> Dict[str, Any]:
        """Serialize as {"k", "mode", "columns"[, "flow"]}."""
        def fmt(x):
            if self.mode == "exact":
                return f"{x.numerator}/{x.denominator}"
            return float(x)

        data: Dict[str, Any] = {
            "k": self.k,
            "mode": self.mode,
            "columns": [[fmt(self.base[i][j]) for i in range(self.k)] for j in range(self.k)],
        }
        if self.flow is not None:
            data["flow"] = list(self.flow.t)
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "LatticeBasis":
        try:
            k = int(data["k"])
            mode = data.get("mode", "float")
            columns = data["columns"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractError(f"Invalid lattice JSON: {exc}") from exc
        if len(columns) != k:
            raise DimensionMismatchError(k, len(columns), "column count")
        rows = tuple(tuple(columns[j][i] for j in range(k)) for i in range(k))
        flow = DiagParam(tuple(data["flow"])) if data.get("flow") is not None else None
        return cls(rows, mode=mode, flow=flow)


def apply_diag(t: DiagParam, basis: LatticeBasis) -> LatticeBasis:
    """Left-multiply the lattice by alpha^t (row i scaled by e^{t_i})."""
    _check_dim(basis.k, t.k, "DiagParam")
    flow = t if basis.flow is None else basis.flow + t
    return LatticeBasis(basis.base, mode=basis.mode, flow=flow)


def matrix_metric(g, h) -> float:
    """Sup-norm distance max_ij |g_ij - h_ij| between two matrices."""
    a = np.asarray(g, dtype=float)
    b = np.asarray(h, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatchError(a.shape[0], b.shape[0], "matrix dimension")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def shortest_vector(
    basis: LatticeBasis,
    norm: str = "sup",
    *,
    condition_limit: float = CONDITION_LIMIT,
    mp_spread: float = MP_SPREAD,
    dps: int = MP_DPS,
) -> ShortVectorResult:
    """Exact shortest nonzero vector of the lattice in the chosen norm.

    The basis is LLL-reduced over integer coefficient vectors, then every
    coefficient vector whose image could beat the shortest reduced column is
    enumerated.  The enumeration box comes from the dual norms of the rows of
    the inverse reduced basis: |c_i| <= ||row_i(G^-1)||_dual * ||y||.
    """
    if norm not in NORMS:
        raise ContractError(f"Unknown norm {norm!r}; expected one of {NORMS}")
    if basis.mode == "exact" or basis.spread > mp_spread:
        digits = max(dps, int(math.ceil(1.5 * basis.spread / math.log(10))) + 30)
        with mpmath.workdps(digits):
            return _Reducer(basis, norm, _MpArith(), condition_limit).run()
    return _Reducer(basis, norm, _FloatArith(), condition_limit).run()


def delta(basis: LatticeBasis, norm: str = "sup", **kwargs) -> float:
    """Length of the shortest nonzero lattice vector."""
    return shortest_vector(basis, norm, **kwargs).norm


def mahler_in_K_rho(basis: LatticeBasis, rho: float, norm: str = "sup", **kwargs) -> bool:
    """True iff the lattice lies in K_rho, i.e. its shortest vector is >= rho."""
    if not rho > 0:
        raise ContractError(f"rho must be positive, got {rho}")
    return shortest_vector(basis, norm, **kwargs).norm >= rho


# -- reduction internals ---------------------------------------------------


class _FloatArith:
    def num(self, x):
        return float(x)

    def exp(self, x):
        return math.exp(x)

    def fsum(self, values):
        return math.fsum(values)

    def nint(self, x) -> int:
        return int(round(x))


class _MpArith:
    def num(self, x):
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        return mpmath.mpf(x)

    def exp(self, x):
        return mpmath.exp(mpmath.mpf(x))

    def fsum(self, values):
        return mpmath.fsum(values)

    def nint(self, x) -> int:
        return int(mpmath.nint(x))


class _Reducer:
    def __init__(self, basis: LatticeBasis, norm: str, arith, condition_limit: float) -> None:
        self.basis = basis
        self.norm = norm
        self.arith = arith
        self.k = basis.k
        self.condition_limit = condition_limit
        flow = basis.flow.t if basis.flow is not None else (0.0,) * self.k
        self.scale = [arith.exp(x) for x in flow]

    def image(self, coeffs: Sequence[int]) -> List:
        out = []
        for i, row in enumerate(self.basis.base):
            if self.basis.mode == "exact":
                exact = sum((a * c for a, c in zip(row, coeffs) if c), Fraction(0))
                out.append(self.arith.num(exact) * self.scale[i])
            else:
                out.append(self.arith.fsum(self.arith.num(a) * c for a, c in zip(row, coeffs) if c) * self.scale[i])
        return out

    def _norm(self, vec) -> Any:
        if self.norm == "sup":
            return max(abs(x) for x in vec)
        return self.arith.fsum(x * x for x in vec) ** 0.5

    def _gram_schmidt(self, vecs):
        k = self.k
        bstar, lengths = [], []
        mu = [[0] * k for _ in range(k)]
        for i in range(k):
            v = list(vecs[i])
            for j in range(i):
                mu[i][j] = self.arith.fsum(a * b for a, b in zip(vecs[i], bstar[j])) / lengths[j]
                v = [a - mu[i][j] * b for a, b in zip(v, bstar[j])]
            sq = self.arith.fsum(a * a for a in v)
            if not sq > 0:
                raise IllConditionedError("Basis vectors are linearly dependent to working precision")
            bstar.append(v)
            lengths.append(sq)
        return mu, lengths

    def _lll(self):
        k = self.k
        coeffs = [tuple(1 if i == j else 0 for i in range(k)) for j in range(k)]
        images = [self.image(c) for c in coeffs]
        mu, lengths = self._gram_schmidt(images)
        idx, steps = 1, 0
        while idx < k:
            steps += 1
            if steps > 10_000 * k:
                raise NumericError("Lattice reduction did not terminate")
            for j in range(idx - 1, -1, -1):
                q = self.arith.nint(mu[idx][j])
                if q:
                    coeffs[idx] = tuple(a - q * b for a, b in zip(coeffs[idx], coeffs[j]))
                    images[idx] = self.image(coeffs[idx])
                    mu, lengths = self._gram_schmidt(images)
            if lengths[idx] >= (LLL_DELTA - mu[idx][idx - 1] ** 2) * lengths[idx - 1]:
                idx += 1
            else:
                coeffs[idx], coeffs[idx - 1] = coeffs[idx - 1], coeffs[idx]
                images[idx], images[idx - 1] = images[idx - 1], images[idx]
                mu, lengths = self._gram_schmidt(images)
                idx = max(idx - 1, 1)
        return coeffs, images

    def _inverse_rows(self, images):
        """Rows of G^-1 (G = reduced images as columns), row-equilibrated."""
        k = self.k
        if isinstance(self.arith, _FloatArith):
            g = np.array([[float(images[j][i]) for j in range(k)] for i in range(k)])
            row_scale = np.max(np.abs(g), axis=1)
            if np.any(row_scale == 0) or not np.all(np.isfinite(g)):
                raise IllConditionedError("Basis has a zero or non-finite row")
            geq = g / row_scale[:, None]
            cond = np.linalg.cond(geq)
            if not np.isfinite(cond) or cond > self.condition_limit:
                raise IllConditionedError(f"Basis condition estimate {cond:.3e} exceeds {self.condition_limit:.1e}")
            return np.linalg.inv(geq) / row_scale[None, :]
        g = mpmath.matrix(k, k)
        for i in range(k):
            for j in range(k):
                g[i, j] = images[j][i]
        scales = [max(abs(g[i, j]) for j in range(k)) for i in range(k)]
        if any(s == 0 for s in scales):
            raise IllConditionedError("Basis has a zero row")
        geq = mpmath.matrix(k, k)
        for i in range(k):
            for j in range(k):
                geq[i, j] = g[i, j] / scales[i]
        inv = mpmath.inverse(geq)
        cond = mpmath.mnorm(geq, 1) * mpmath.mnorm(inv, 1)
        if cond > self.condition_limit:
            raise IllConditionedError(f"Basis condition estimate {float(cond):.3e} exceeds {self.condition_limit:.1e}")
        return [[inv[i, j] / scales[j] for j in range(k)] for i in range(k)]

    def run(self) -> ShortVectorResult:
        coeffs, images = self._lll()
        radius = min(self._norm(img) for img in images)
        inv_rows = self._inverse_rows(images)
        bounds = []
        for i in range(self.k):
            row = [abs(x) for x in inv_rows[i]]
            dual = self.arith.fsum(row) if self.norm == "sup" else self.arith.fsum(x * x for x in row) ** 0.5
            bounds.append(int(math.floor(float(radius * dual) * (1 + 1e-9) + 1e-9)))
        box = 1
        for b in bounds:
            box *= 2 * b + 1
        if box > ENUMERATION_LIMIT:
            raise NumericError(f"Enumeration box of {box} points exceeds limit {ENUMERATION_LIMIT}")
        umat = [[coeffs[j][i] for j in range(self.k)] for i in range(self.k)]
        if isinstance(self.arith, _FloatArith):
            candidates = self._enumerate_float(images, bounds, radius)
        else:
            candidates = self._enumerate_mp(images, bounds, radius)
        best = None
        for c in candidates:
            x = tuple(sum(umat[i][j] * c[j] for j in range(self.k)) for i in range(self.k))
            x = _normalize_sign(x)
            img = self.image(x)
            value = self._norm(img)
            key = (value, x)
            if best is None or value < best[0] * (1 - 1e-12) or (value <= best[0] * (1 + 1e-12) and x < best[1]):
                best = key + (img,)
        if best is None:
            raise NumericError("Enumeration found no nonzero lattice vector")
        value, x, img = best
        return ShortVectorResult(vector=x, image=tuple(float(a) for a in img), norm=float(value))

    def _enumerate_float(self, images, bounds, radius):
        k = self.k
        g = np.array([[float(images[j][i]) for j in range(k)] for i in range(k)])
        ranges = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
        first, rest = ranges[0], ranges[1:]
        tail = np.array(list(itertools.product(*rest)), dtype=np.int64).reshape(-1, k - 1)
        best_value = float(radius)
        found: List[np.ndarray] = []
        for start in range(0, len(first), max(1, _CHUNK // max(1, len(tail)))):
            heads = first[start:start + max(1, _CHUNK // max(1, len(tail)))]
            c = np.concatenate([np.repeat(heads, len(tail))[:, None], np.tile(tail, (len(heads), 1))], axis=1)
            c = c[np.any(c != 0, axis=1)]
            if not len(c):
                continue
            y = g @ c.T
            if self.norm == "sup":
                values = np.max(np.abs(y), axis=0)
            else:
                values = np.sqrt(np.sum(y * y, axis=0))
            keep = values <= best_value * (1 + 1e-9)
            if np.any(keep):
                chunk_min = float(values[keep].min())
                best_value = min(best_value, chunk_min)
                found.append(c[keep][values[keep] <= best_value * (1 + 1e-9)])
        rows = [row for block in found for row in block]
        return [tuple(int(a) for a in row) for row in rows if
                self._approx_norm(g, row) <= best_value * (1 + 1e-9)]

    def _approx_norm(self, g, c) -> float:
        y = g @ np.asarray(c, dtype=float)
        return float(np.max(np.abs(y)) if self.norm == "sup" else np.sqrt(np.sum(y * y)))

    def _enumerate_mp(self, images, bounds, radius):
        best_value = radius
        found = []
        for c in itertools.product(*[range(-b, b + 1) for b in bounds]):
            if not any(c):
                continue
            y = [self.arith.fsum(images[j][i] * c[j] for j in range(self.k) if c[j]) for i in range(self.k)]
            value = self._norm(y)
            if value <= best_value * (1 + mpmath.mpf("1e-12")):
                best_value = min(best_value, value)
                found.append((value, c))
        return [c for value, c in found if value <= best_value * (1 + mpmath.mpf("1e-12"))]


def _normalize_sign(x: Tuple[int, ...]) -> Tuple[int, ...]:
    for a in x:
        if a:
            return x if a > 0 else tuple(-b for b in x)
    return x


def _determinant(rows, mode: str):
    if mode == "exact":
        matrix = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in rows])
        det = matrix.det()
        return Fraction(int(det.p), int(det.q))
    return float(np.linalg.det(np.array(rows, dtype=float)))


def _check_dim(expected: int, got: int, what: str) -> None:
    if expected != got:
        raise DimensionMismatchError(expected, got, what)
