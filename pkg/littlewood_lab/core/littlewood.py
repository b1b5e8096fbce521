"""Littlewood products n<nu><nv> and their lattice-orbit counterparts.

A pair (u, v) corresponds to the lattice tau(u, v) spanned by (1, u, v),
(0, 1, 0), (0, 0, 1).  A short vector of alpha^{(-r-s, r, s)} tau(u, v) in the
sup norm has the form (e^{-r-s} n, e^r (nu + m1), e^s (nv + m2)); multiplying
its entries bounds |n (nu + m1)(nv + m2)|.  The converse direction chooses
(r, s) from a witness after an optional Dirichlet correction.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from .console import ProgressCallback, notify
from .errors import ContractError, NumericError
from .expressions import parse_expression
from .flow import orbit_trace_cone
from .lattice import DiagParam, LatticeBasis, apply_diag, frac_dist, shortest_vector

PairValue = Union[Fraction, mpmath.mpf, float]

R_MAX = 40.0
CHUNK = 1_000_000
WITNESS_DPS = 60
_TWO64 = 1 << 64
_INT64_SAFE = 1 << 31


@dataclass(frozen=True)
class TargetPair:
    u: PairValue
    v: PairValue

    def __post_init__(self) -> None:
        for name in ("u", "v"):
            value = getattr(self, name)
            if isinstance(value, int):
                object.__setattr__(self, name, Fraction(value))
            elif not isinstance(value, (Fraction, mpmath.mpf, float)):
                object.__setattr__(self, name, parse_expression(value))
            if not math.isfinite(float(getattr(self, name))):
                raise ContractError(f"Pair component {name} must be finite")

    @classmethod
    def parse(cls, u_text: str, v_text: str) -> "TargetPair":
        return cls(parse_expression(u_text), parse_expression(v_text))

    @property
    def is_exact(self) -> bool:
        return isinstance(self.u, Fraction) and isinstance(self.v, Fraction)

    def swapped(self) -> "TargetPair":
        return TargetPair(self.v, self.u)

    def describe(self) -> str:
        return f"u={_fmt(self.u)}, v={_fmt(self.v)}"


@dataclass(frozen=True)
class ScanRecord:
    n: int
    du: float
    dv: float
    product: float
    is_record: bool


@dataclass
class ScanResult:
    min_product: float
    argmin: int
    records: List[ScanRecord] = field(default_factory=list)
    evaluated: int = 0

    def rows(self) -> List[List]:
        return [[r.n, r.du, r.dv, r.product, "true" if r.is_record else "false"] for r in self.records]


@dataclass(frozen=True)
class Witness:
    n: int
    m1: int
    m2: int
    product: float

    def __post_init__(self) -> None:
        if not (self.n or self.m1 or self.m2):
            raise ContractError("A witness must be a nonzero integer vector")


@dataclass(frozen=True)
class OrbitPoint:
    """(r, s) reached from a witness, with the verified delta bound."""

    r: float
    s: float
    delta: float
    theta: float
    constant: float = 1.0


def _fmt(value: PairValue) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return mpmath.nstr(mpmath.mpf(value), 20) if isinstance(value, mpmath.mpf) else repr(value)


def _to_mp(value: PairValue) -> mpmath.mpf:
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpf(value)


def tau(u: PairValue, v: PairValue) -> LatticeBasis:
    """The lattice spanned by (1, u, v), (0, 1, 0), (0, 0, 1)."""
    pair = TargetPair(u, v)
    if pair.is_exact:
        rows = ((Fraction(1), Fraction(0), Fraction(0)), (pair.u, Fraction(1), Fraction(0)), (pair.v, Fraction(0), Fraction(1)))
        return LatticeBasis(rows, mode="exact")
    return LatticeBasis(((1.0, 0.0, 0.0), (float(pair.u), 1.0, 0.0), (float(pair.v), 0.0, 1.0)), mode="float")


def pair_basis(pair: TargetPair) -> LatticeBasis:
    return tau(pair.u, pair.v)


# -- residues ---------------------------------------------------------------


class _Residues:
    """<n w> for integer arrays n, exact for rationals and 64-bit fixed point otherwise."""

    def __init__(self, value: PairValue) -> None:
        self.rational: Optional[Tuple[int, int]] = None
        if isinstance(value, float):
            value = Fraction(value)
        if isinstance(value, Fraction):
            p, q = value.numerator % value.denominator, value.denominator
            if q < _INT64_SAFE:
                self.rational = (p, q)
                return
            self.fixed = np.uint64((p * _TWO64 * 2 + q) // (2 * q) % _TWO64)
            return
        with mpmath.workdps(WITNESS_DPS):
            frac = value - mpmath.floor(value)
            self.fixed = np.uint64(int(mpmath.nint(frac * _TWO64)) % _TWO64)

    def distances(self, ns: np.ndarray) -> np.ndarray:
        if self.rational is not None:
            p, q = self.rational
            r = (ns.astype(np.int64) % q) * p % q
            return np.minimum(r, q - r).astype(np.float64) / q
        x = ns.astype(np.uint64) * self.fixed
        neg = (~x) + np.uint64(1)
        return np.minimum(x, neg).astype(np.float64) * 2.0 ** -64


def littlewood_scan(
    pair: TargetPair,
    N: int,
    *,
    chunk: int = CHUNK,
    progress_callback: Optional[ProgressCallback] = None,
) -> ScanResult:
    """min over 1 <= n <= N of n<nu><nv>, with the running-minimum records."""
    if N < 1:
        raise ContractError(f"N must be at least 1, got {N}")
    if N > 10 ** 12:
        raise ContractError(f"N={N} exceeds the supported scan length")
    res_u, res_v = _Residues(pair.u), _Residues(pair.v)
    best = math.inf
    argmin = 1
    records: List[ScanRecord] = []
    for start in range(1, N + 1, chunk):
        ns = np.arange(start, min(N, start + chunk - 1) + 1, dtype=np.int64)
        du = res_u.distances(ns)
        dv = res_v.distances(ns)
        products = ns.astype(np.float64) * (du * dv)
        running = np.minimum.accumulate(products)
        previous = np.concatenate(([best], np.minimum(running[:-1], best)))
        for idx in np.nonzero(products < previous)[0]:
            records.append(ScanRecord(int(ns[idx]), float(du[idx]), float(dv[idx]), float(products[idx]), True))
        if running[-1] < best:
            best = float(running[-1])
            argmin = records[-1].n
        notify(progress_callback, f"Scanned n <= {ns[-1]}: min product {best:.6g}")
    return ScanResult(min_product=best, argmin=argmin, records=records, evaluated=N)


def dirichlet_scan_1d(u: PairValue, N: int, *, chunk: int = CHUNK) -> Tuple[float, int]:
    """min over 1 <= n <= N of n<nu> and the first n attaining it."""
    if N < 1:
        raise ContractError(f"N must be at least 1, got {N}")
    residues = _Residues(u)
    best, argmin = math.inf, 1
    for start in range(1, N + 1, chunk):
        ns = np.arange(start, min(N, start + chunk - 1) + 1, dtype=np.int64)
        values = ns.astype(np.float64) * residues.distances(ns)
        idx = int(np.argmin(values))
        if values[idx] < best:
            best, argmin = float(values[idx]), int(ns[idx])
    return best, argmin


def approximation_profile(u: PairValue, ns: Sequence[int]) -> List[float]:
    """n<nu> for each given n."""
    arr = np.asarray(list(ns), dtype=np.int64)
    if np.any(arr < 1):
        raise ContractError("approximation_profile needs positive n")
    return [float(x) for x in arr.astype(np.float64) * _Residues(u).distances(arr)]


def fibonacci_numbers(limit: int) -> List[int]:
    out, a, b = [], 1, 2
    while a <= limit:
        out.append(a)
        a, b = b, a + b
    return out


# -- continued fractions ----------------------------------------------------


def continued_fraction_value(quotients: Sequence[int]) -> Fraction:
    """Exact value of [a0; a1, ..., an]."""
    if not quotients:
        raise ContractError("A continued fraction needs at least one term")
    value = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        if value == 0:
            raise ContractError("Partial quotients after a0 must be positive")
        value = a + 1 / value
    return value


def continued_fraction_terms(x: PairValue, max_terms: int = 64) -> List[int]:
    if isinstance(x, Fraction):
        terms = []
        while len(terms) < max_terms:
            a = math.floor(x)
            terms.append(int(a))
            x -= a
            if x == 0:
                break
            x = 1 / x
        return terms
    with mpmath.workdps(WITNESS_DPS):
        y = _to_mp(x)
        tolerance = mpmath.mpf(2) ** (-mpmath.mp.prec // 2)
        terms = []
        while len(terms) < max_terms:
            a = mpmath.floor(y)
            terms.append(int(a))
            y -= a
            if y < tolerance:
                break
            y = 1 / y
        return terms


def convergents(x: PairValue, max_den: Optional[int] = None, max_terms: int = 64) -> List[Tuple[int, int]]:
    """Convergents p/q of x, stopping before q exceeds max_den."""
    out: List[Tuple[int, int]] = []
    p_prev, q_prev, p, q = 0, 1, 1, 0
    for a in continued_fraction_terms(x, max_terms):
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        if max_den is not None and q > max_den:
            break
        out.append((p, q))
    return out


def bad_approx_quotients(bound: int, length: int, seed: int = 0) -> List[int]:
    if bound < 1:
        raise ContractError(f"bound must be at least 1, got {bound}")
    if length < 1:
        raise ContractError(f"length must be at least 1, got {length}")
    rng = random.Random(seed)
    return [rng.randint(1, bound) for _ in range(length)]


def bad_approx_generate(bound: int, length: int, seed: int = 0) -> Fraction:
    """[0; a1, ..., a_length] with seeded partial quotients in [1, bound]."""
    return continued_fraction_value([0] + bad_approx_quotients(bound, length, seed))


# -- correspondence ---------------------------------------------------------


def witness_factors(pair: TargetPair, n: int, m1: int, m2: int) -> Tuple[mpmath.mpf, mpmath.mpf]:
    """(nu + m1, nv + m2) at extended precision; rational components are exact."""
    with mpmath.workdps(WITNESS_DPS):
        return _linear(n, pair.u, m1), _linear(n, pair.v, m2)


def _linear(n: int, w: PairValue, m: int) -> mpmath.mpf:
    if isinstance(w, Fraction):
        return _to_mp(n * w + m)
    return +(n * _to_mp(w) + m)


def make_witness(pair: TargetPair, n: int, m1: int, m2: int) -> Witness:
    a, b = witness_factors(pair, n, m1, m2)
    with mpmath.workdps(WITNESS_DPS):
        product = abs(n * a * b)
    return Witness(n=n, m1=m1, m2=m2, product=float(product))


def orbit_to_witness(pair: TargetPair, r: float, s: float, eps: float, **shortest_kwargs) -> Optional[Witness]:
    """Witness from a short vector of alpha^{(-r-s, r, s)} tau(u, v), or None."""
    if r < 0 or s < 0:
        raise ContractError(f"(r, s) must lie in the positive quadrant, got ({r}, {s})")
    if not eps > 0:
        raise ContractError(f"eps must be positive, got {eps}")
    result = shortest_vector(apply_diag(DiagParam.quadrant(r, s), pair_basis(pair)), "sup", **shortest_kwargs)
    if result.norm >= eps:
        return None
    n, m1, m2 = result.vector
    if n == 0:
        raise ContractError(f"Short vector has n = 0 at eps={eps}; eps must not exceed 1")
    return make_witness(pair, n, m1, m2)


def _best_multiplier(x: PairValue, eps: float) -> Tuple[int, int]:
    """q < 1/eps with <q x> < eps, and round(q x); convergents first, then all q."""
    q_limit = math.ceil(1 / eps) - 1
    with mpmath.workdps(WITNESS_DPS):
        xm = _to_mp(x)
        best: Optional[Tuple[mpmath.mpf, int]] = None
        for _, q in convergents(x, max_den=q_limit):
            dist = frac_dist(q * xm)
            if best is None or dist < best[0]:
                best = (dist, q)
        if best is None or best[0] >= eps:
            for q in range(1, q_limit + 1):
                dist = frac_dist(q * xm)
                if best is None or dist < best[0]:
                    best = (dist, q)
        if best is None or best[0] >= eps:
            raise NumericError(f"No q < {1 / eps:g} with <q x> < {eps}")
        q = best[1]
        return q, int(mpmath.nint(q * xm))


def dirichlet_fix(pair: TargetPair, w: Witness, eps: float) -> Witness:
    """Rescale a witness so both |nu + m1| and |nv + m2| are below eps."""
    if not 0 < eps < 1:
        raise ContractError(f"eps must lie in (0, 1), got {eps}")
    if w.n <= 0:
        raise ContractError("Witness must have n > 0")
    a, b = witness_factors(pair, w.n, w.m1, w.m2)
    if not w.product < eps ** 5:
        raise ContractError(f"Witness product {w.product:.3e} is not below eps^5")
    if max(abs(a), abs(b)) < eps:
        return w
    if abs(b) >= eps:
        with mpmath.workdps(WITNESS_DPS):
            q, nearest = _best_multiplier(w.n * _to_mp(pair.v), eps)
        fixed = make_witness(pair, q * w.n, q * w.m1, -nearest)
    else:
        with mpmath.workdps(WITNESS_DPS):
            q, nearest = _best_multiplier(w.n * _to_mp(pair.u), eps)
        fixed = make_witness(pair, q * w.n, -nearest, q * w.m2)
    a, b = witness_factors(pair, fixed.n, fixed.m1, fixed.m2)
    if not (max(abs(a), abs(b)) < eps and fixed.product < eps ** 3):
        raise NumericError(f"Dirichlet step produced a witness outside the target box: {fixed}")
    return fixed


def witness_to_orbit(pair: TargetPair, w: Witness, eps: float, *, r_max: float = R_MAX, **shortest_kwargs) -> OrbitPoint:
    """(r, s) with e^r|nu + m1| = e^s|nv + m2| = theta*eps, verified by a shortest-vector computation.

    theta is the midpoint between the smallest admissible margin and 1; it
    keeps every entry of the scaled witness vector strictly below eps.
    """
    if not 0 < eps < 1:
        raise ContractError(f"eps must lie in (0, 1), got {eps}")
    if w.n <= 0:
        raise ContractError("Witness must have n > 0")
    a, b = witness_factors(pair, w.n, w.m1, w.m2)
    if not (max(abs(a), abs(b)) < eps and w.product < eps ** 3):
        raise ContractError("Witness must satisfy max(|nu+m1|, |nv+m2|) < eps and product < eps^3")
    with mpmath.workdps(WITNESS_DPS):
        floor = max(mpmath.sqrt(mpmath.mpf(w.product) / eps ** 3), abs(a) / eps, abs(b) / eps)
        theta = (floor + 1) / 2
        r = float(mpmath.log(theta * eps / abs(a))) if a != 0 else r_max
        s = float(mpmath.log(theta * eps / abs(b))) if b != 0 else r_max
    value = shortest_vector(apply_diag(DiagParam.quadrant(r, s), pair_basis(pair)), "sup", **shortest_kwargs).norm
    if not value < eps:
        raise NumericError(f"delta={value:.6g} at (r, s)=({r:.6g}, {s:.6g}) is not below eps={eps}")
    return OrbitPoint(r=r, s=s, delta=value, theta=float(theta))


# -- round trip -------------------------------------------------------------


QUADRANT_DIRECTIONS = (DiagParam((-1.0, 1.0, 0.0)), DiagParam((-1.0, 0.0, 1.0)))


@dataclass
class RoundTripReport:
    eps: float
    pairs: int = 0
    grid_points: int = 0
    excursions: int = 0
    witnesses: int = 0
    violations_a: int = 0
    candidates_b: int = 0
    violations_b: int = 0
    constant_c: float = 1.0
    theta_max: float = 0.0
    rows: List[List] = field(default_factory=list)

    HEADERS = ["pair", "u", "v", "r", "s", "delta", "n", "m1", "m2", "product", "back_delta"]

    def as_dict(self) -> Dict:
        return {
            "eps": self.eps,
            "pairs": self.pairs,
            "grid_points": self.grid_points,
            "excursions": self.excursions,
            "witnesses": self.witnesses,
            "violations_a": self.violations_a,
            "candidates_b": self.candidates_b,
            "violations_b": self.violations_b,
            "constant_c": self.constant_c,
            "theta_max": self.theta_max,
        }


def random_pairs(count: int, seed: int = 0) -> List[TargetPair]:
    rng = np.random.default_rng(seed)
    return [TargetPair(float(u), float(v)) for u, v in rng.uniform(0.0, 1.0, size=(count, 2))]


def roundtrip_check(
    pairs: Sequence[TargetPair],
    eps: float = 0.1,
    *,
    extent: float = 4.0,
    step: float = 0.25,
    threads: int = 1,
    r_max: float = R_MAX,
    progress_callback: Optional[ProgressCallback] = None,
    **shortest_kwargs,
) -> RoundTripReport:
    """Run both correspondence directions over an A+ grid for every pair."""
    report = RoundTripReport(eps=eps)
    for index, pair in enumerate(pairs):
        report.pairs += 1
        trace = orbit_trace_cone(
            pair_basis(pair), QUADRANT_DIRECTIONS, extent, eps,
            step=step, threads=threads, **shortest_kwargs,
        )
        report.grid_points += len(trace.samples)
        seen: Dict[Tuple[int, int, int], Witness] = {}
        for sample in trace.samples:
            if sample.in_k_rho:
                continue
            report.excursions += 1
            r, s = sample.times
            w = orbit_to_witness(pair, r, s, eps, **shortest_kwargs)
            if w is None or not w.product < eps ** 3:
                report.violations_a += 1
                continue
            key = (w.n, w.m1, w.m2)
            if key in seen:
                continue
            seen[key] = w
            report.witnesses += 1
            back = math.nan
            if w.product < eps ** 5:
                report.candidates_b += 1
                try:
                    point = witness_to_orbit(pair, dirichlet_fix(pair, w, eps), eps, r_max=r_max, **shortest_kwargs)
                    back = point.delta
                    report.theta_max = max(report.theta_max, point.theta)
                except NumericError:
                    report.violations_b += 1
            report.rows.append([index, _fmt(pair.u), _fmt(pair.v), r, s, sample.delta, w.n, w.m1, w.m2, w.product, back])
        notify(progress_callback, f"Pair {index + 1}/{len(pairs)}: {len(seen)} distinct witnesses")
    return report
