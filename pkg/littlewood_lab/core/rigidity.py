"""Finite algebra behind the rigidity arguments.

``exceptional_check`` decides, in exact arithmetic, whether an integer matrix
of determinant one is (1) diagonalizable over R, (2) free of the eigenvalues
+1 and -1, and (3) has exactly one double eigenvalue with all others simple.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from .console import ProgressCallback, notify
from .errors import BudgetError, ContractError, DimensionMismatchError
from .lattice import DET_TOLERANCE, DiagParam

_X = sympy.Symbol("x")
SCAN_LIMIT = 1e8
CONDITIONS = ("real_diagonalizable", "no_unit_eigenvalue", "one_double_eigenvalue")


@dataclass(frozen=True)
class ExceptionalDiagnostics:
    charpoly: Tuple[int, ...]
    real_diagonalizable: bool
    no_unit_eigenvalue: bool
    one_double_eigenvalue: bool

    @property
    def failed(self) -> Tuple[str, ...]:
        return tuple(name for name in CONDITIONS if not getattr(self, name))


def _integer_matrix(gamma) -> sympy.Matrix:
    rows = [list(row) for row in gamma]
    k = len(rows)
    if k < 2 or any(len(row) != k for row in rows):
        raise ContractError("gamma must be a square integer matrix")
    if any(int(x) != x for row in rows for x in row):
        raise ContractError("gamma must have integer entries")
    matrix = sympy.Matrix([[int(x) for x in row] for row in rows])
    if matrix.det() != 1:
        raise ContractError(f"gamma must have determinant 1, got {matrix.det()}")
    return matrix


def sturm_chain(poly: sympy.Poly) -> List[sympy.Poly]:
    chain = [poly, poly.diff(_X)]
    while not chain[-1].is_zero and chain[-1].degree() > 0:
        remainder = -chain[-2].rem(chain[-1])
        if remainder.is_zero:
            break
        chain.append(remainder)
    return chain


def _sign_changes(signs: Sequence[int]) -> int:
    nonzero = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(nonzero, nonzero[1:]) if a != b)


def count_real_roots(poly: sympy.Poly) -> int:
    """Number of distinct real roots, from the Sturm chain signs at -inf and +inf."""
    if poly.degree() <= 0:
        return 0
    chain = sturm_chain(poly)
    at_pos = [int(sympy.sign(p.LC())) for p in chain]
    at_neg = [int(sympy.sign(p.LC())) * (-1) ** p.degree() for p in chain]
    return _sign_changes(at_neg) - _sign_changes(at_pos)


def exceptional_check(gamma) -> Tuple[bool, ExceptionalDiagnostics]:
    """All three exceptional-return conditions, in exact arithmetic."""
    matrix = _integer_matrix(gamma)
    k = matrix.shape[0]
    poly = sympy.Poly(matrix.charpoly(_X).as_expr(), _X)
    reduced = sympy.Poly(sympy.quo(poly, sympy.gcd(poly, poly.diff(_X))), _X)

    real_rooted = count_real_roots(reduced) == reduced.degree()
    value = sympy.zeros(k, k)
    for coeff in reduced.all_coeffs():
        value = value * matrix + coeff * sympy.eye(k)
    diagonalizable = real_rooted and value.is_zero_matrix

    no_unit = poly.eval(1) != 0 and poly.eval(-1) != 0

    _, factors = sympy.sqf_list(poly)
    repeated = [(f, mult) for f, mult in factors if mult > 1]
    one_double = len(repeated) == 1 and repeated[0][1] == 2 and sympy.Poly(repeated[0][0], _X).degree() == 1

    diagnostics = ExceptionalDiagnostics(
        charpoly=tuple(int(c) for c in poly.all_coeffs()),
        real_diagonalizable=bool(diagonalizable),
        no_unit_eigenvalue=bool(no_unit),
        one_double_eigenvalue=bool(one_double),
    )
    return not diagnostics.failed, diagnostics


@dataclass
class ExceptionalScanReport:
    k: int
    entry_bound: int
    enumerated: int = 0
    unimodular: int = 0
    fully_checked: int = 0
    failures: Dict[str, int] = field(default_factory=lambda: {name: 0 for name in CONDITIONS})
    hits: List[List[List[int]]] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "entry_bound": self.entry_bound,
            "enumerated": self.enumerated,
            "unimodular": self.unimodular,
            "fully_checked": self.fully_checked,
            "failures": dict(self.failures),
            "hits": self.hits,
        }


def _scan_first_row(first: Tuple[int, ...], bound: int) -> dict:
    """Prefilter every SL(3, Z) matrix with the given first row.

    Survivors of det == 1, p(1) != 0, p(-1) != 0 and a vanishing
    discriminant go through the full exact check.
    """
    values = np.arange(-bound, bound + 1, dtype=np.int64)
    rest = np.array(list(itertools.product(values, repeat=6)), dtype=np.int64)
    a, b, c = first
    d, e, f, g, h, i = rest.T
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    keep = det == 1
    d, e, f, g, h, i = d[keep], e[keep], f[keep], g[keep], h[keep], i[keep]
    trace = a + e + i
    minors = (a * e - b * d) + (a * i - c * g) + (e * i - f * h)
    p_plus = minors - trace
    p_minus = -2 - trace - minors
    unit = (p_plus == 0) | (p_minus == 0)
    # x^3 + B x^2 + C x + D with B = -trace, C = minors, D = -1
    B, C, D = -trace, minors, -1
    disc = 18 * B * C * D - 4 * B ** 3 * D + B ** 2 * C ** 2 - 4 * C ** 3 - 27 * D ** 2
    simple = disc != 0
    survivors = np.nonzero(~unit & ~simple)[0]
    hits, full_failures = [], {name: 0 for name in CONDITIONS}
    for idx in survivors:
        gamma = [[a, b, c], [int(d[idx]), int(e[idx]), int(f[idx])], [int(g[idx]), int(h[idx]), int(i[idx])]]
        ok, diag = exceptional_check(gamma)
        for name in diag.failed:
            full_failures[name] += 1
        if ok:
            hits.append(gamma)
    return {
        "enumerated": len(rest),
        "unimodular": int(keep.sum()),
        "unit": int(unit.sum()),
        "simple": int((simple & ~unit).sum()),
        "checked": len(survivors),
        "full_failures": full_failures,
        "hits": hits,
    }


def _scan_generic(k: int, bound: int) -> dict:
    values = range(-bound, bound + 1)
    out = {"enumerated": 0, "unimodular": 0, "unit": 0, "simple": 0, "checked": 0,
           "full_failures": {name: 0 for name in CONDITIONS}, "hits": []}
    for entries in itertools.product(values, repeat=k * k):
        out["enumerated"] += 1
        gamma = [list(entries[r * k:(r + 1) * k]) for r in range(k)]
        if round(np.linalg.det(np.array(gamma, dtype=float))) != 1 or sympy.Matrix(gamma).det() != 1:
            continue
        out["unimodular"] += 1
        out["checked"] += 1
        ok, diag = exceptional_check(gamma)
        for name in diag.failed:
            out["full_failures"][name] += 1
        if ok:
            out["hits"].append(gamma)
    return out


def exceptional_scan(
    k: int = 3,
    entry_bound: int = 2,
    *,
    threads: int = 1,
    budget: float = SCAN_LIMIT,
    progress_callback: Optional[ProgressCallback] = None,
) -> ExceptionalScanReport:
    """Run exceptional_check over every SL(k, Z) matrix with entries in [-bound, bound]."""
    if k < 2:
        raise ContractError(f"k must be at least 2, got {k}")
    if entry_bound < 0:
        raise ContractError(f"entry bound must be non-negative, got {entry_bound}")
    size = float(2 * entry_bound + 1) ** (k * k)
    if size > budget:
        raise BudgetError(f"{size:.3g} matrices exceed the scan budget {budget:.3g}")
    report = ExceptionalScanReport(k=k, entry_bound=entry_bound)
    if k == 3:
        firsts = list(itertools.product(range(-entry_bound, entry_bound + 1), repeat=3))
        notify(progress_callback, f"Scanning {len(firsts)} first rows with {threads} worker(s)")
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            parts = list(pool.map(lambda row: _scan_first_row(row, entry_bound), firsts))
    else:
        parts = [_scan_generic(k, entry_bound)]
    for part in parts:
        report.enumerated += part["enumerated"]
        report.unimodular += part["unimodular"]
        report.fully_checked += part["checked"]
        report.failures["no_unit_eigenvalue"] += part["unit"]
        report.failures["one_double_eigenvalue"] += part["simple"]
        for name, count in part["full_failures"].items():
            report.failures[name] += count
        report.hits.extend(part["hits"])
    notify(progress_callback, f"{report.unimodular} unimodular matrices, {len(report.hits)} exceptional")
    return report


# -- eigenvalue perturbation ------------------------------------------------


@dataclass(frozen=True)
class EigenCheck:
    lam_prime: Tuple[float, ...]
    ok: bool
    max_shift: float
    note: str = ""


def perturbed_eigs_check(lam: Sequence[float], h) -> EigenCheck:
    """Eigenvalues e^{lam'} of h diag(e^lam), compared with lam after sorting descending."""
    lam = np.array(lam, dtype=float)
    m = len(lam)
    h = np.asarray(h, dtype=float)
    if h.shape != (m, m):
        raise DimensionMismatchError(m, h.shape[0], "h dimension")
    for i, j in itertools.combinations(range(m), 2):
        if not abs(lam[i] - lam[j]) > 1:
            raise ContractError(f"Eigenvalue gaps must exceed 1; |{lam[i]} - {lam[j]}| does not")
    det = float(np.linalg.det(h))
    if abs(det - 1.0) > DET_TOLERANCE:
        raise ContractError(f"h must be unimodular, det = {det!r}")
    eigs = np.linalg.eigvals(h @ np.diag(np.exp(lam)))
    if np.any(np.abs(eigs.imag) > 1e-12 * np.abs(eigs)):
        return EigenCheck(lam_prime=(), ok=False, max_shift=math.inf, note="complex eigenvalues")
    real = eigs.real
    if np.any(real <= 0):
        return EigenCheck(lam_prime=(), ok=False, max_shift=math.inf, note="non-positive eigenvalue")
    lam_prime = np.sort(np.log(real))[::-1]
    shift = float(np.max(np.abs(lam_prime - np.sort(lam)[::-1])))
    return EigenCheck(lam_prime=tuple(float(x) for x in lam_prime), ok=shift < 0.5, max_shift=shift)


@dataclass(frozen=True)
class EigenTrialReport:
    trials: int
    passed: int
    max_shift: float


def random_unimodular_near_identity(rng: np.random.Generator, k: int, radius: float) -> np.ndarray:
    h = np.eye(k) + rng.uniform(-radius, radius, size=(k, k)) * 0.5
    return h / np.linalg.det(h) ** (1.0 / k)


def eigen_lemma_trials(lam: Sequence[float], trials: int = 500, radius: float = 0.01, seed: int = 0) -> EigenTrialReport:
    rng = np.random.default_rng(seed)
    passed, worst = 0, 0.0
    for _ in range(trials):
        result = perturbed_eigs_check(lam, random_unimodular_near_identity(rng, len(lam), radius))
        passed += result.ok
        worst = max(worst, result.max_shift)
    return EigenTrialReport(trials=trials, passed=passed, max_shift=worst)


# -- entropy formula --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EntropyData:
    s: np.ndarray
    t: DiagParam
    symmetric: bool = False

    def __post_init__(self) -> None:
        s = np.array(self.s, dtype=float)
        k = self.t.k
        if s.shape != (k, k):
            raise DimensionMismatchError(k, s.shape[0], "s dimension")
        if np.any(s < 0) or np.any(s > 1):
            raise ContractError("s entries must lie in [0, 1]")
        if np.any(np.diag(s) != 0):
            raise ContractError("s must have a zero diagonal")
        if self.symmetric and not np.array_equal(s, s.T):
            raise ContractError("s must be symmetric (s_ij = s_ji)")
        object.__setattr__(self, "s", s)


def entropy_contributions(data: EntropyData) -> List[Tuple[int, int, float, float, float]]:
    """(i, j, s_ij, t_i - t_j, s_ij (t_i - t_j)^+) for every pair with a positive term."""
    out = []
    t = data.t.t
    for i in range(data.t.k):
        for j in range(data.t.k):
            gap = t[i] - t[j]
            term = data.s[i, j] * max(0.0, gap)
            if term > 0:
                out.append((i, j, float(data.s[i, j]), gap, float(term)))
    return out


def entropy_formula(data: EntropyData) -> float:
    """sum_ij s_ij (t_i - t_j)^+."""
    return math.fsum(term for *_, term in entropy_contributions(data))
