"""Diagonal-flow orbits and the unstable/stable/central splitting."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .console import ProgressCallback, notify
from .errors import ContractError, DimensionMismatchError, NumericError
from .lattice import DiagParam, LatticeBasis, apply_diag, matrix_metric, shortest_vector

PIVOT_TOLERANCE = 1e-10
MEMBERSHIP_TOLERANCE = 1e-12
DEFAULT_STEP = 0.05


class DecompositionError(NumericError):
    """Raised when g lies outside the neighborhood where g = g_C g_U g_V exists."""


@dataclass(frozen=True)
class FlowSpec:
    """The diagonal element a = alpha^t and the induced index-pair split."""

    a: DiagParam

    @property
    def k(self) -> int:
        return self.a.k

    def _gap(self, i: int, j: int) -> float:
        return self.a.t[i] - self.a.t[j]

    def expanded_pairs(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(self.k) for j in range(self.k) if self._gap(i, j) > MEMBERSHIP_TOLERANCE]

    def contracted_pairs(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(self.k) for j in range(self.k) if self._gap(i, j) < -MEMBERSHIP_TOLERANCE]

    def central_pairs(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(self.k) for j in range(self.k) if abs(self._gap(i, j)) <= MEMBERSHIP_TOLERANCE]

    @property
    def rate(self) -> float:
        """lambda = exp(min positive t_i - t_j)."""
        gaps = [self._gap(i, j) for i, j in self.expanded_pairs()]
        if not gaps:
            raise ContractError("The diagonal element has no expanded directions")
        return math.exp(min(gaps))

    def blocks(self) -> List[List[int]]:
        """Index groups with equal t, ordered by decreasing t."""
        order = sorted(range(self.k), key=lambda i: (-self.a.t[i], i))
        groups: List[List[int]] = []
        for idx in order:
            if groups and abs(self.a.t[groups[-1][0]] - self.a.t[idx]) <= MEMBERSHIP_TOLERANCE:
                groups[-1].append(idx)
            else:
                groups.append([idx])
        return groups


@dataclass(frozen=True)
class CUVFactors:
    c: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def product(self) -> np.ndarray:
        return self.c @ self.u @ self.v


@dataclass(frozen=True)
class OrbitSample:
    times: Tuple[float, ...]
    delta: float
    in_k_rho: bool


@dataclass
class OrbitTrace:
    """delta sampled over a grid of cone parameters, in lexicographic grid order."""

    rho: float
    samples: List[OrbitSample] = field(default_factory=list)

    @property
    def all_in_k_rho(self) -> bool:
        return all(sample.in_k_rho for sample in self.samples)

    @property
    def min_delta(self) -> float:
        return min(sample.delta for sample in self.samples)

    def headers(self) -> List[str]:
        m = len(self.samples[0].times) if self.samples else 0
        return [f"time_{i + 1}" for i in range(m)] + ["delta", "in_K_rho"]

    def rows(self) -> List[List]:
        return [list(s.times) + [s.delta, "true" if s.in_k_rho else "false"] for s in self.samples]


def _as_square(g, k: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(g, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractError(f"Expected a square matrix, got shape {arr.shape}")
    if k is not None and arr.shape[0] != k:
        raise DimensionMismatchError(k, arr.shape[0])
    return arr


def conjugate_diag(t: DiagParam, g) -> np.ndarray:
    """alpha^t g alpha^-t, entry (i, j) scaled by e^{t_i - t_j}."""
    arr = _as_square(g, t.k)
    tt = np.array(t.t)
    return np.exp(tt[:, None] - tt[None, :]) * arr


def cuv_decompose(spec: FlowSpec, g) -> CUVFactors:
    """Factor g = g_C g_U g_V.

    Indices are ordered by decreasing t, which makes U block upper and V block
    lower unipotent.  W = g_C g_U is then obtained by block elimination from
    the last block upward (W V = g), and g_C is the block diagonal of W.
    """
    arr = _as_square(g, spec.k)
    groups = spec.blocks()
    perm = [i for group in groups for i in group]
    sizes = [len(group) for group in groups]
    offsets = np.cumsum([0] + sizes)
    gp = arr[np.ix_(perm, perm)].copy()
    k = spec.k
    w = np.zeros((k, k))
    v = np.eye(k)
    work = gp.copy()
    for b in range(len(groups) - 1, -1, -1):
        lo, hi = offsets[b], offsets[b + 1]
        pivot = work[lo:hi, lo:hi]
        if abs(np.linalg.det(pivot)) < PIVOT_TOLERANCE:
            raise DecompositionError(f"Pivot block {b} is singular (|det| < {PIVOT_TOLERANCE})")
        w[lo:hi, lo:hi] = pivot
        if lo == 0:
            break
        w[:lo, lo:hi] = work[:lo, lo:hi]
        v[lo:hi, :lo] = np.linalg.solve(pivot, work[lo:hi, :lo])
        work[:lo, :lo] = work[:lo, :lo] - work[:lo, lo:hi] @ v[lo:hi, :lo]
    c = np.zeros((k, k))
    for b in range(len(groups)):
        lo, hi = offsets[b], offsets[b + 1]
        c[lo:hi, lo:hi] = w[lo:hi, lo:hi]
    u = np.linalg.solve(c, w)
    inv = np.argsort(perm)
    back = lambda m: m[np.ix_(inv, inv)]
    return CUVFactors(c=back(c), u=back(u), v=back(v))


def in_unstable(spec: FlowSpec, f) -> bool:
    arr = _as_square(f, spec.k)
    eye = np.eye(spec.k)
    allowed = set(spec.expanded_pairs())
    return all(
        abs(arr[i, j] - eye[i, j]) <= MEMBERSHIP_TOLERANCE
        for i in range(spec.k) for j in range(spec.k) if (i, j) not in allowed
    )


def expansion_check(spec: FlowSpec, f, n: int) -> float:
    """||a^n f a^-n - I|| / ||f - I|| for f in the unstable subgroup."""
    if n < 0:
        raise ContractError(f"n must be non-negative, got {n}")
    arr = _as_square(f, spec.k)
    if not in_unstable(spec, arr):
        raise ContractError("f is not in the unstable subgroup U")
    eye = np.eye(spec.k)
    base = matrix_metric(arr, eye)
    if base == 0:
        raise ContractError("Expansion ratio is undefined for f = I")
    return matrix_metric(conjugate_diag(spec.a.scaled(n), arr), eye) / base


@dataclass(frozen=True)
class EscapeResult:
    n: int
    distance: float
    constant: float


def two_sided_escape(spec: FlowSpec, f, eps: float, n_max: int = 200) -> Optional[EscapeResult]:
    """Smallest |n| at which a^n f a^-n leaves the eps-ball around I.

    Positive n is tried before -n at each step.  ``constant`` is
    distance / (lambda^|n| * ||f - I||).
    """
    arr = _as_square(f, spec.k)
    eye = np.eye(spec.k)
    base = matrix_metric(arr, eye)
    if base == 0:
        raise ContractError("f = I never escapes")
    lam = spec.rate
    for n in range(0, n_max + 1):
        for signed in ((n, -n) if n else (0,)):
            dist = matrix_metric(conjugate_diag(spec.a.scaled(signed), arr), eye)
            if dist >= eps:
                return EscapeResult(n=signed, distance=dist, constant=dist / (lam ** n * base))
    return None


def _random_near_identity(rng: np.random.Generator, k: int, radius: float) -> np.ndarray:
    return np.eye(k) + rng.uniform(-radius, radius, size=(k, k))


def metric_comparison_constant(spec: FlowSpec, samples: int = 200, radius: float = 0.05, seed: int = 0) -> float:
    """Empirical c1 with c1^-1 ||g-I|| <= max factor distance <= c1 ||g-I||."""
    rng = np.random.default_rng(seed)
    eye = np.eye(spec.k)
    worst = 1.0
    for _ in range(samples):
        g = _random_near_identity(rng, spec.k, radius)
        factors = cuv_decompose(spec, g)
        dist = matrix_metric(g, eye)
        factor_dist = max(matrix_metric(m, eye) for m in (factors.c, factors.u, factors.v))
        worst = max(worst, factor_dist / dist, dist / factor_dist)
    return worst


def random_unstable(spec: FlowSpec, rng: np.random.Generator, radius: float) -> np.ndarray:
    f = np.eye(spec.k)
    for i, j in spec.expanded_pairs():
        f[i, j] = rng.uniform(-radius, radius)
    return f


def expansion_constants(spec: FlowSpec, samples: int = 100, n_max: int = 20, radius: float = 1e-6, seed: int = 0) -> float:
    """min over seeded f in U and n <= n_max of expansion ratio / lambda^n."""
    rng = np.random.default_rng(seed)
    lam = spec.rate
    best = math.inf
    for _ in range(samples):
        f = random_unstable(spec, rng, radius)
        if matrix_metric(f, np.eye(spec.k)) == 0:
            continue
        for n in range(n_max + 1):
            best = min(best, expansion_check(spec, f, n) / lam ** n)
    return best


def grid_axis(extent: float, step: float = DEFAULT_STEP) -> np.ndarray:
    if not step > 0:
        raise ContractError(f"Grid step must be positive, got {step}")
    if extent < 0 or not math.isfinite(extent):
        raise ContractError(f"Grid extent must be finite and non-negative, got {extent}")
    count = int(math.floor(extent / step + 1e-9)) + 1
    return np.arange(count) * step


def orbit_trace_cone(
    x0: LatticeBasis,
    directions: Sequence[DiagParam],
    extent: Union[float, Sequence[float]],
    rho: float,
    *,
    step: float = DEFAULT_STEP,
    norm: str = "sup",
    threads: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
    **shortest_kwargs,
) -> OrbitTrace:
    """Evaluate delta(alpha^{s_1 t_1 + ... } x0) over a grid of s in [0, extent]."""
    if not rho > 0:
        raise ContractError(f"rho must be positive, got {rho}")
    if not directions:
        raise ContractError("At least one cone direction is required")
    for d in directions:
        if d.k != x0.k:
            raise DimensionMismatchError(x0.k, d.k, "cone direction")
    dmat = np.array([d.t for d in directions])
    if len(directions) > x0.k - 1 or np.linalg.matrix_rank(dmat) < len(directions):
        raise ContractError("Cone directions must be linearly independent in the trace-zero space")
    extents = [float(extent)] * len(directions) if np.isscalar(extent) else [float(e) for e in extent]
    if len(extents) != len(directions):
        raise DimensionMismatchError(len(directions), len(extents), "grid extents")
    axes = [grid_axis(e, step) for e in extents]
    points = [tuple(float(x) for x in p) for p in itertools.product(*axes)]
    notify(progress_callback, f"Tracing {len(points)} grid points (rho={rho}, step={step})")

    def _evaluate(times: Tuple[float, ...]) -> OrbitSample:
        param = DiagParam(tuple(float(x) for x in np.asarray(times) @ dmat))
        value = shortest_vector(apply_diag(param, x0), norm, **shortest_kwargs).norm
        return OrbitSample(times=times, delta=value, in_k_rho=value >= rho)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        samples = list(pool.map(_evaluate, points))
    trace = OrbitTrace(rho=rho, samples=samples)
    notify(progress_callback, f"Minimum delta on grid: {trace.min_delta:.6g}")
    return trace
