"""Separated-set estimators: box dimension, topological entropy and
transversal scans of bounded-orbit pairs.

Separated sets are maximal, built greedily in input order under the sup
metric (optionally on a torus).  A maximal eps-separated set has between
b_{2 eps} and b_eps points, which is the estimator's bias.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .console import ProgressCallback, notify, log_warning
from .errors import ConfigError, ContractError
from .flow import orbit_trace_cone
from .littlewood import QUADRANT_DIRECTIONS, tau

RESIDUAL_WARNING = 0.1
SCHEDULE_RATIO = 0.5
MIN_SCHEDULE = 4
_SHRINK = 1 - 1e-12
_U_SHIFT = (math.sqrt(5) - 1) / 2
_V_SHIFT = math.sqrt(2) - 1


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    period: Optional[float] = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.points, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or (arr.size and arr.shape[1] < 1):
            raise ContractError(f"Point cloud must be an (n, d) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ContractError("Point cloud contains non-finite coordinates")
        if self.period is not None:
            if not self.period > 0:
                raise ContractError(f"period must be positive, got {self.period}")
            arr = np.mod(arr, self.period)
            arr[arr >= self.period] = 0.0
        object.__setattr__(self, "points", arr)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1] if self.points.ndim == 2 else 0

    def union(self, other: "PointCloud") -> "PointCloud":
        return PointCloud(np.concatenate([self.points, other.points]), self.period)


@dataclass
class SeparatedSetStats:
    headers: List[str]
    rows: List[Tuple] = field(default_factory=list)
    slope: float = math.nan
    intercept: float = math.nan
    residuals: List[float] = field(default_factory=list)
    warning: bool = False


@dataclass
class EntropyEstimate:
    rate: float
    stats: SeparatedSetStats
    escaped: int = 0


@dataclass
class TransversalScan:
    rho: float
    horizon: float
    grid: int
    survivors: PointCloud
    estimate: Optional[SeparatedSetStats]
    method: str
    note: str = ""

    @property
    def slope(self) -> float:
        return self.estimate.slope if self.estimate is not None else math.nan


@dataclass(frozen=True)
class HausdorffBound:
    bound: float
    note: str


def _tree(cloud: PointCloud) -> cKDTree:
    if cloud.period is None:
        return cKDTree(cloud.points)
    return cKDTree(cloud.points, boxsize=cloud.period)


def greedy_separated_subset(cloud: PointCloud, eps: float) -> np.ndarray:
    """Indices of a maximal eps-separated subset chosen in input order."""
    if not eps > 0:
        raise ContractError(f"eps must be positive, got {eps}")
    if len(cloud) == 0:
        return np.zeros(0, dtype=np.int64)
    tree = _tree(cloud)
    blocked = np.zeros(len(cloud), dtype=bool)
    selected = []
    for idx in range(len(cloud)):
        if blocked[idx]:
            continue
        selected.append(idx)
        blocked[tree.query_ball_point(cloud.points[idx], r=eps * _SHRINK, p=np.inf)] = True
    return np.array(selected, dtype=np.int64)


def separated_count(cloud: PointCloud, eps: float) -> int:
    return len(greedy_separated_subset(cloud, eps))


def geometric_schedule(eps_max: float, count: int, ratio: float = SCHEDULE_RATIO) -> List[float]:
    if not eps_max > 0 or not 0 < ratio < 1:
        raise ConfigError(f"Invalid schedule: eps_max={eps_max}, ratio={ratio}")
    return [eps_max * ratio ** i for i in range(count)]


def _check_schedule(schedule: Sequence[float]) -> List[float]:
    eps = [float(e) for e in schedule]
    if len(eps) < MIN_SCHEDULE:
        raise ConfigError(f"An eps schedule needs at least {MIN_SCHEDULE} values, got {len(eps)}")
    if any(not e > 0 for e in eps):
        raise ConfigError("Schedule values must be positive")
    ratios = [b / a for a, b in zip(eps, eps[1:])]
    if not all(0 < q < 1 for q in ratios) or max(ratios) - min(ratios) > 1e-9 * max(ratios):
        raise ConfigError("Schedule must be a decreasing geometric sequence")
    return eps


def _fit(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float, List[float]]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept), [float(r) for r in y - (slope * x + intercept)]


def box_dim_estimate(
    cloud: PointCloud,
    schedule: Sequence[float],
    *,
    threads: int = 1,
    residual_warning: float = RESIDUAL_WARNING,
) -> SeparatedSetStats:
    """Least-squares slope of log b_eps against |log eps|."""
    eps = _check_schedule(schedule)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        counts = list(pool.map(lambda e: separated_count(cloud, e), eps))
    stats = SeparatedSetStats(headers=["epsilon", "count"], rows=list(zip(eps, counts)))
    if not len(cloud):
        return stats
    stats.slope, stats.intercept, stats.residuals = _fit([abs(math.log(e)) for e in eps], [math.log(c) for c in counts])
    stats.warning = max(abs(r) for r in stats.residuals) > residual_warning
    if stats.warning:
        log_warning(f"Box-dimension fit residual exceeds {residual_warning}")
    return stats


def top_entropy_estimate(
    step: Callable[[np.ndarray], np.ndarray],
    seed: PointCloud,
    N: int,
    eps: float,
    *,
    region: Optional[Tuple[float, float]] = None,
    threads: int = 1,
) -> EntropyEstimate:
    """Greedy (n, eps)-separated counts under the Bowen metric for n = 1..N.

    The Bowen metric is the sup metric on the concatenated orbit segment
    (x, Tx, ..., T^{n-1} x).  Points whose orbit leaves ``region`` (or turns
    non-finite) are dropped and counted as escaped.
    """
    if N < 2:
        raise ContractError(f"N must be at least 2, got {N}")
    if not eps > 0:
        raise ContractError(f"eps must be positive, got {eps}")
    orbit = [seed.points]
    for _ in range(N - 1):
        nxt = np.asarray(step(orbit[-1]), dtype=float).reshape(orbit[-1].shape)
        if seed.period is not None:
            nxt = np.mod(nxt, seed.period)
        orbit.append(nxt)
    alive = np.ones(len(seed), dtype=bool)
    for points in orbit:
        alive &= np.all(np.isfinite(points), axis=1)
        if region is not None:
            alive &= np.all((points >= region[0]) & (points <= region[1]), axis=1)
    escaped = int((~alive).sum())
    segments = np.concatenate([points[alive] for points in orbit], axis=1) if alive.any() else np.zeros((0, seed.dim * N))

    def _row(n: int) -> Tuple[int, float, int, float, int]:
        cloud = PointCloud(segments[:, : seed.dim * n], seed.period)
        count = separated_count(cloud, eps)
        return (n, eps, count, math.log(count) / n if count else 0.0, escaped)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(_row, range(1, N + 1)))
    stats = SeparatedSetStats(headers=["N", "epsilon", "count", "rate", "escaped"], rows=rows)
    if escaped:
        stats.warning = True
        log_warning(f"{escaped} orbit(s) left the sampled region and were dropped")
    if all(row[2] > 0 for row in rows):
        stats.slope, stats.intercept, stats.residuals = _fit([row[0] for row in rows], [math.log(row[2]) for row in rows])
    return EntropyEstimate(rate=rows[-1][3], stats=stats, escaped=escaped)


def cantor_endpoints(level: int) -> PointCloud:
    """Endpoints of the 2^level intervals of the middle-thirds construction."""
    if level < 0:
        raise ContractError(f"level must be non-negative, got {level}")
    lefts = np.zeros(1)
    for k in range(1, level + 1):
        lefts = np.concatenate([lefts, lefts + 2.0 / 3 ** k])
    length = 3.0 ** -level
    return PointCloud(np.sort(np.concatenate([lefts, lefts + length])))


def interval_grid(count: int) -> PointCloud:
    """count equally spaced points j/(count - 1) on [0, 1]."""
    if count < 2:
        raise ContractError(f"count must be at least 2, got {count}")
    return PointCloud(np.arange(count) / (count - 1))


def circle_grid(count: int) -> PointCloud:
    """j/count on the circle R/Z."""
    if count < 1:
        raise ContractError(f"count must be at least 1, got {count}")
    return PointCloud(np.arange(count) / count, period=1.0)


def doubling_map(points: np.ndarray) -> np.ndarray:
    return np.mod(2.0 * points, 1.0)


def rotation_map(angle: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda points: np.mod(points + angle, 1.0)


def transversal_grid(grid: int) -> Tuple[np.ndarray, np.ndarray]:
    """u_i = (i + 1/phi) / G and v_j = (j + sqrt(2) - 1) / G."""
    if grid < 1:
        raise ContractError(f"grid must be at least 1, got {grid}")
    idx = np.arange(grid, dtype=float)
    return (idx + _U_SHIFT) / grid, (idx + _V_SHIFT) / grid


def _reach(dist: np.ndarray, rho: float, horizon: float) -> np.ndarray:
    """sup r in [0, T] with e^r * dist < rho; -inf where dist >= rho."""
    with np.errstate(divide="ignore"):
        reach = np.minimum(horizon, np.log(rho / dist))
    return np.where(dist < rho, reach, -np.inf)


def _killed_exact(u: np.ndarray, v: np.ndarray, rho: float, horizon: float, chunk: int = 2048) -> np.ndarray:
    """Pairs whose A+ orbit over [0, T]^2 has a lattice vector shorter than rho.

    For n >= 1 the best vector is (n, -round(nu), -round(nv)); it is shorter
    than rho at some (r, s) iff both residues are below rho and
    R + S > log(n / rho), with R, S the reaches of the residues.
    """
    killed = np.zeros((len(u), len(v)), dtype=bool)
    if rho > 1:
        killed[:] = True
        return killed
    n_max = int(math.floor(rho * math.exp(2 * horizon)))
    for start in range(1, n_max + 1, chunk):
        ns = np.arange(start, min(n_max, start + chunk - 1) + 1, dtype=np.float64)
        du = np.abs(ns[:, None] * u[None, :] - np.rint(ns[:, None] * u[None, :]))
        dv = np.abs(ns[:, None] * v[None, :] - np.rint(ns[:, None] * v[None, :]))
        reach_u = _reach(du, rho, horizon)
        reach_v = _reach(dv, rho, horizon)
        need = np.log(ns / rho)[:, None]
        cand_u = reach_u > need - horizon
        cand_v = reach_v > need - horizon
        rows = np.nonzero(cand_u.any(axis=1) & cand_v.any(axis=1))[0]
        for row in rows:
            iu = np.nonzero(cand_u[row])[0]
            iv = np.nonzero(cand_v[row])[0]
            hit = reach_u[row, iu][:, None] + reach_v[row, iv][None, :] > need[row, 0]
            killed[np.ix_(iu, iv)] |= hit
    return killed


def _killed_sampled(u: np.ndarray, v: np.ndarray, rho: float, horizon: float, step: float, threads: int) -> np.ndarray:
    killed = np.zeros((len(u), len(v)), dtype=bool)
    for i, uu in enumerate(u):
        for j, vv in enumerate(v):
            trace = orbit_trace_cone(tau(float(uu), float(vv)), QUADRANT_DIRECTIONS, horizon, rho, step=step, threads=threads)
            killed[i, j] = not trace.all_in_k_rho
    return killed


def default_transversal_schedule(grid: int) -> List[float]:
    """eps = 1/4, 1/8, ... down to the grid spacing scale 2/G (at least 4 values)."""
    count = max(MIN_SCHEDULE, int(math.floor(math.log2(grid / 2.0))) - 1)
    return geometric_schedule(0.25, count)


def transversal_bad_scan(
    rho: float,
    horizon: float,
    grid: int,
    *,
    method: str = "exact",
    step: float = 0.05,
    schedule: Optional[Sequence[float]] = None,
    threads: int = 1,
    progress_callback: Optional[ProgressCallback] = None,
) -> TransversalScan:
    """Grid pairs (u, v) whose orbit over the quadrant [0, T]^2 stays in K_rho."""
    if not rho > 0:
        raise ContractError(f"rho must be positive, got {rho}")
    if horizon < 0 or not math.isfinite(horizon):
        raise ContractError(f"horizon must be finite and non-negative, got {horizon}")
    if method not in ("exact", "sampled"):
        raise ContractError(f"Unknown scan method {method!r}; expected 'exact' or 'sampled'")
    u, v = transversal_grid(grid)
    notify(progress_callback, f"Scanning {grid}x{grid} pairs (rho={rho}, T={horizon}, method={method})")
    if method == "exact":
        killed = _killed_exact(u, v, rho, horizon)
    else:
        killed = _killed_sampled(u, v, rho, horizon, step, threads)
    iu, iv = np.nonzero(~killed)
    survivors = PointCloud(np.column_stack([u[iu], v[iv]]) if len(iu) else np.zeros((0, 2)))
    notify(progress_callback, f"{len(survivors)} survivor(s) of {grid * grid}")
    if len(survivors) < 2:
        note = "no survivors; slope undefined" if not len(survivors) else "single survivor; slope 0"
        return TransversalScan(rho, horizon, grid, survivors, None, method, note)
    estimate = box_dim_estimate(survivors, schedule or default_transversal_schedule(grid), threads=threads)
    return TransversalScan(rho, horizon, grid, survivors, estimate, method)


def hausdorff_note(slope: float) -> HausdorffBound:
    """Upper bound dim_H <= dim_box from a box-dimension slope."""
    if math.isnan(slope):
        return HausdorffBound(bound=math.nan, note="slope undefined; no bound")
    bound = max(slope, 0.0)
    return HausdorffBound(bound=bound, note=f"dim_H <= {bound:.4f} (upper box-dimension estimate, not certified)")
