"""k-separability tests on density-matrix elements of n-qubit states.

Two inequalities must hold for every k-separable state::

    (2^k - 2) A <= B          (GHZ-type test)
    C <= D + (n - k) E        (W-type test)

Inverting them gives effective separability degrees ``k_eff1`` and ``k_eff2``;
a value below k certifies k-nonseparability and a value below 2 genuine
multipartite entanglement.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import bisect

from .qstate import DensityMatrix, state_factory

VIOLATION_TOL = 1e-12

SCAN_COLUMNS = (
    "family", "n", "k", "param1", "param2",
    "A", "B", "C", "D", "E",
    "ghz_violated", "w_violated", "k_eff1", "k_eff2",
)


@dataclass(frozen=True)
class CriterionTerms:
    A: float
    B: float
    C: float
    D: float
    E: float
    n: int


@dataclass(frozen=True)
class SeparabilityVerdict:
    k: int
    ghz_test_violated: bool
    w_test_violated: bool
    k_eff1: float
    k_eff2: float

    @property
    def k_nonseparable(self) -> bool:
        return self.ghz_test_violated or self.w_test_violated

    def uninformative(self, n: int) -> tuple[bool, bool]:
        """Flags for k_eff values above n, which say nothing about the state."""
        return self.k_eff1 > n, self.k_eff2 > n


def _qubits(rho: DensityMatrix) -> int:
    if any(d != 2 for d in rho.dims):
        raise ValueError("separability tests need qubit sites")
    return rho.n


def criterion_terms(rho: DensityMatrix) -> CriterionTerms:
    """Read A..E off the matrix elements (1-based indices in the formulas)."""
    n = _qubits(rho)
    m = rho.matrix
    N = 2**n
    diag = np.real(np.diag(m))
    # rho_{i,j} (1-based) is m[i-1, j-1]
    A = abs(m[0, N - 1])
    B = sum(math.sqrt(max(diag[i - 1], 0.0) * max(diag[N - i], 0.0)) for i in range(2, N))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    C = sum(abs(m[2**i, 2**j]) for i, j in pairs)
    D = sum(math.sqrt(max(diag[0], 0.0) * max(diag[2**i + 2**j], 0.0)) for i, j in pairs)
    E = sum(abs(m[2**i, 2**i]) for i in range(n))
    return CriterionTerms(float(A), float(B), float(C), float(D), float(E), n)


def _check_k(k: int, n: int):
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")


def ghz_margin(terms: CriterionTerms, k: int) -> float:
    """``(2^k - 2) A - B``; positive means the GHZ-type test is violated."""
    return (2**k - 2) * terms.A - terms.B


def w_margin(terms: CriterionTerms, k: int) -> float:
    """``C - D - (n - k) E``; positive means the W-type test is violated."""
    return terms.C - terms.D - (terms.n - k) * terms.E


def ghz_criterion(rho: DensityMatrix, k: int, terms: CriterionTerms | None = None) -> bool:
    """True when ``(2^k - 2) A > B``, i.e. ``rho`` is k-nonseparable."""
    terms = criterion_terms(rho) if terms is None else terms
    _check_k(k, terms.n)
    return ghz_margin(terms, k) > VIOLATION_TOL


def w_criterion(rho: DensityMatrix, k: int, terms: CriterionTerms | None = None) -> bool:
    """True when ``C > D + (n - k) E``, i.e. ``rho`` is k-nonseparable."""
    terms = criterion_terms(rho) if terms is None else terms
    _check_k(k, terms.n)
    return w_margin(terms, k) > VIOLATION_TOL


def k_eff_from_terms(terms: CriterionTerms) -> tuple[float, float]:
    k1 = math.log2(2 + terms.B / terms.A) if terms.A > 0 else math.inf
    k2 = terms.n - (terms.C - terms.D) / terms.E if terms.E > 0 else math.inf
    return k1, k2


def k_eff(rho: DensityMatrix) -> tuple[float, float]:
    """Effective separability degrees ``(log2(2 + B/A), n - (C - D)/E)``.

    Either is ``inf`` when its denominator vanishes (the test is silent).
    """
    return k_eff_from_terms(criterion_terms(rho))


def verdict(rho: DensityMatrix, k: int) -> SeparabilityVerdict:
    terms = criterion_terms(rho)
    _check_k(k, terms.n)
    k1, k2 = k_eff_from_terms(terms)
    return SeparabilityVerdict(k, ghz_margin(terms, k) > VIOLATION_TOL, w_margin(terms, k) > VIOLATION_TOL, k1, k2)


# -- scans --------------------------------------------------------------------


def _grid_points(grid: Mapping[str, Sequence[float]]) -> tuple[list[str], list[tuple[float, ...]]]:
    names = list(grid)
    if len(names) > 2:
        raise ValueError("scans take at most two parameters")
    points = list(itertools.product(*(list(map(float, grid[k])) for k in names)))
    return names, points


def detection_scan(family: str, n: int, ks: int | Sequence[int], grid: Mapping[str, Sequence[float]]) -> list[dict]:
    """One row per (k, grid point) in deterministic order.

    Rows are ordered by k, then by the grid's Cartesian product (first
    parameter outermost). Points outside the family's parameter range (for
    example ``a + b > 1``) are skipped.
    """
    ks = [ks] if isinstance(ks, int) else list(ks)
    names, points = _grid_points(grid)
    family = family.replace("-", "_")
    rows = []
    cache: dict[tuple[float, ...], CriterionTerms | None] = {}
    for k in ks:
        _check_k(k, n)
        for pt in points:
            if pt not in cache:
                try:
                    rho = state_factory(family, n, **dict(zip(names, pt)))
                except ValueError:
                    cache[pt] = None
                else:
                    cache[pt] = criterion_terms(rho)
            terms = cache[pt]
            if terms is None:
                continue
            k1, k2 = k_eff_from_terms(terms)
            rows.append({
                "family": family,
                "n": n,
                "k": k,
                "param1": pt[0] if pt else None,
                "param2": pt[1] if len(pt) > 1 else None,
                "A": terms.A, "B": terms.B, "C": terms.C, "D": terms.D, "E": terms.E,
                "ghz_violated": ghz_margin(terms, k) > VIOLATION_TOL,
                "w_violated": w_margin(terms, k) > VIOLATION_TOL,
                "k_eff1": k1,
                "k_eff2": k2,
            })
    return rows


def switch_points(rows: Sequence[dict], column: str) -> list[tuple[float, float]]:
    """Adjacent ``param1`` pairs between which a boolean column flips.

    Only meaningful for one-parameter scans with a single k.
    """
    out = []
    for r0, r1 in zip(rows, rows[1:]):
        if r0["k"] == r1["k"] and r0[column] != r1[column]:
            out.append((r0["param1"], r1["param1"]))
    return out


def threshold(family: str, n: int, k: int, param: str, test: str = "ghz",
              lo: float = 0.0, hi: float = 1.0, fixed: Mapping[str, float] | None = None,
              xtol: float = 1e-12) -> float:
    """Root of the chosen test's margin in ``param`` on ``[lo, hi]``.

    The margin must change sign on the interval; the root is where the state
    starts to be detected as k-nonseparable.
    """
    fixed = dict(fixed or {})
    margin = ghz_margin if test == "ghz" else w_margin

    def f(x):
        return margin(criterion_terms(state_factory(family, n, **{param: x}, **fixed)), k)

    return bisect(f, lo, hi, xtol=xtol)


def verdict_record(v: SeparabilityVerdict) -> dict:
    rec = asdict(v)
    rec["k_nonseparable"] = v.k_nonseparable
    return rec
