"""Products of k linear forms f_m(x) = prod_i m_i(x)."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import mpmath
import numpy as np

from .console import ProgressCallback, notify
from .errors import BudgetError, ContractError, DimensionMismatchError
from .lattice import DET_TOLERANCE, DiagParam, LatticeBasis, apply_diag, shortest_vector

SCAN_BUDGET = 1e9
CUBIC_DEFAULT = (1, 0, -3, 1)


@dataclass(frozen=True, eq=False)
class FormsMatrix:
    """A unimodular matrix whose rows are linear forms."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
            raise ContractError(f"Forms matrix must be square with k >= 2, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ContractError("Forms matrix entries must be finite")
        det = float(np.linalg.det(arr))
        if abs(det - 1.0) > DET_TOLERANCE:
            raise ContractError(f"Forms matrix is not unimodular: det = {det!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    def lattice(self) -> LatticeBasis:
        return LatticeBasis.from_matrix(self.matrix)

    def flowed(self, a: DiagParam) -> "FormsMatrix":
        """alpha^a m: the i-th form multiplied by e^{a_i}."""
        if a.k != self.k:
            raise DimensionMismatchError(self.k, a.k, "DiagParam")
        return FormsMatrix(a.exp()[:, None] * self.matrix)

    def to_json(self) -> dict:
        return {"k": self.k, "rows": [[float(x) for x in row] for row in self.matrix]}

    @classmethod
    def from_json(cls, data: dict) -> "FormsMatrix":
        if "cubic" in data:
            return cubic_unit_forms(tuple(int(c) for c in data["cubic"]))
        if "rows" in data:
            return cls(np.array(data["rows"], dtype=float))
        if "columns" in data:
            return cls(np.array(data["columns"], dtype=float).T)
        raise ContractError("Forms JSON needs a 'rows' or 'columns' entry")


@dataclass(frozen=True)
class FormsScanResult:
    min_value: float
    argmin: Tuple[int, ...]
    evaluations: int
    shells: int

    def as_dict(self) -> dict:
        return {"min": self.min_value, "argmin": list(self.argmin), "evaluations": self.evaluations}


@dataclass(frozen=True)
class FormWitness:
    x: Tuple[int, ...]
    value: float
    bound: float


def f_m_eval(m: FormsMatrix, x: Sequence[int]) -> float:
    if len(x) != m.k:
        raise DimensionMismatchError(m.k, len(x), "vector length")
    return math.prod(math.fsum(a * b for a, b in zip(row, x)) for row in m.matrix)


def shell_vectors(k: int, h: int) -> np.ndarray:
    """Integer vectors with sup norm h whose first nonzero coordinate is positive."""
    if h == 0:
        return np.zeros((0, k), dtype=np.int64)
    parts = []
    inner = np.arange(-(h - 1), h, dtype=np.int64)
    outer = np.arange(-h, h + 1, dtype=np.int64)
    for i in range(k):
        axes = [inner] * i + [np.array([-h, h], dtype=np.int64)] + [outer] * (k - i - 1)
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
        parts.append(grid)
    vectors = np.concatenate(parts)
    nonzero = vectors != 0
    first = vectors[np.arange(len(vectors)), np.argmax(nonzero, axis=1)]
    vectors = vectors[first > 0]
    order = np.lexsort(vectors.T[::-1])
    return vectors[order]


def _scan_shell(matrix: np.ndarray, h: int) -> Tuple[float, Tuple[int, ...], int]:
    vectors = shell_vectors(matrix.shape[0], h)
    values = np.abs(np.prod(vectors.astype(np.float64) @ matrix.T, axis=1))
    idx = int(np.argmin(values))
    return float(values[idx]), tuple(int(a) for a in vectors[idx]), len(vectors)


def forms_min_scan(
    m: FormsMatrix,
    N: int,
    *,
    threads: int = 1,
    budget: float = SCAN_BUDGET,
    progress_callback: Optional[ProgressCallback] = None,
) -> FormsScanResult:
    """min |f_m(x)| over 0 < ||x||_inf <= N, scanning shells of increasing sup norm.

    Ties go to the earlier shell, then to the lexicographically smallest
    sign-normalized vector.  The scan stops after a shell that attains 0.
    """
    if N < 1:
        raise ContractError(f"N must be at least 1, got {N}")
    if float(N) ** m.k > budget:
        raise BudgetError(f"Box of N^k = {float(N) ** m.k:.3g} points exceeds budget {budget:.3g}")
    best: Optional[Tuple[float, Tuple[int, ...]]] = None
    evaluations = 0
    shells = 0
    batch = max(1, threads)
    with ThreadPoolExecutor(max_workers=batch) as pool:
        for start in range(1, N + 1, batch):
            heights = range(start, min(N, start + batch - 1) + 1)
            for value, argmin, count in pool.map(lambda h: _scan_shell(m.matrix, h), heights):
                evaluations += count
                shells += 1
                if best is None or value < best[0]:
                    best = (value, argmin)
            notify(progress_callback, f"Shells <= {heights[-1]}: min |f| = {best[0]:.6g}")
            if best[0] == 0.0:
                break
    return FormsScanResult(min_value=best[0], argmin=best[1], evaluations=evaluations, shells=shells)


def orbit_to_form_witness(m: FormsMatrix, a: DiagParam, eps: float, **shortest_kwargs) -> Optional[FormWitness]:
    """x with |f_m(x)| < eps^k from a short vector of alpha^a m, or None."""
    if not eps > 0:
        raise ContractError(f"eps must be positive, got {eps}")
    result = shortest_vector(apply_diag(a, m.lattice()), "sup", **shortest_kwargs)
    if result.norm >= eps:
        return None
    value = abs(f_m_eval(m, result.vector))
    return FormWitness(x=result.vector, value=value, bound=eps ** m.k)


def cubic_unit_forms(coefficients: Sequence[int] = CUBIC_DEFAULT, dps: int = 40) -> FormsMatrix:
    """Normalized real embeddings of (1, theta, theta^2) for a totally real cubic.

    Row i is |det|^{-1/3} (1, theta_i, theta_i^2), so f_m(x) is the field norm
    of x_1 + x_2 theta + x_3 theta^2 divided by |det| = sqrt(disc).
    """
    if len(coefficients) != 4 or coefficients[0] == 0:
        raise ContractError("A cubic needs four coefficients with a nonzero leading term")
    with mpmath.workdps(dps):
        roots = mpmath.polyroots([mpmath.mpf(c) for c in coefficients], maxsteps=200, extraprec=2 * dps)
        if any(abs(mpmath.im(r)) > mpmath.mpf(10) ** (-dps // 2) for r in roots):
            raise ContractError(f"Cubic {list(coefficients)} is not totally real")
        real = sorted(mpmath.re(r) for r in roots)
        if min(abs(real[i] - real[j]) for i, j in itertools.combinations(range(3), 2)) < mpmath.mpf(10) ** (-dps // 2):
            raise ContractError(f"Cubic {list(coefficients)} has a repeated root")
        rows = mpmath.matrix([[1, r, r * r] for r in real])
        det = mpmath.det(rows)
        scale = abs(det) ** (mpmath.mpf(-1) / 3)
        matrix = np.array([[float(rows[i, j] * scale) for j in range(3)] for i in range(3)])
    if det < 0:
        matrix[0] = -matrix[0]
    return FormsMatrix(matrix)


def cubic_discriminant_scale(coefficients: Sequence[int] = CUBIC_DEFAULT) -> float:
    """|det| of the unnormalized embedding matrix (sqrt of the discriminant)."""
    a, b, c, d = (int(x) for x in coefficients)
    disc = 18 * a * b * c * d - 4 * b ** 3 * d + b ** 2 * c ** 2 - 4 * a * c ** 3 - 27 * a ** 2 * d ** 2
    if disc <= 0:
        raise ContractError(f"Cubic {list(coefficients)} is not totally real with distinct roots")
    return math.sqrt(disc) / abs(a) ** 2
