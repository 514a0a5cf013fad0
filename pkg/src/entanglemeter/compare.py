"""Other genuine-entanglement measures, for side-by-side comparison.

* concurrence fill: Heron area of the triangle whose sides are the squared
  one-vs-rest concurrences of a three-qubit pure state;
* GqC: geometric mean of the q-concurrences over every bipartition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .measures import Q, kernel, q_gme_pure, schmidt_spectra
from .partitions import partition_list
from .qstate import PureState, phi_theta_vector

CLAMP_TOL = 1e-10
ROUNDOFF = 16 * np.finfo(float).eps

COMPARE_COLUMNS = ("theta", "q", "c_q_gme", "gqc", "fill")


@dataclass(frozen=True)
class ComparisonRow:
    theta: float
    q: float
    c_q_gme: float
    gqc: float
    fill: float

    def as_dict(self) -> dict:
        return {"theta": self.theta, "q": self.q, "c_q_gme": self.c_q_gme, "gqc": self.gqc, "fill": self.fill}


def squared_concurrences(psi: PureState) -> np.ndarray:
    """``2 (1 - Tr rho_i^2)`` for each single site i of a pure state."""
    v = psi.amplitudes[None, :]
    return np.array([2 * (1 - np.sum(schmidt_spectra(v, psi.dims, (i,))[0] ** 2)) for i in range(1, psi.n + 1)])


def concurrence_fill(psi: PureState) -> float:
    """Concurrence fill of a three-qubit pure state."""
    if psi.dims != (2, 2, 2):
        raise ValueError("concurrence fill is defined for three qubits only")
    c2 = squared_concurrences(psi)
    P = c2.sum() / 2
    sides = P - c2
    # differences of O(1) numbers below a few ulps carry no digits; the
    # quartic root would otherwise turn 1e-30 noise into 1e-8
    sides[np.abs(sides) <= ROUNDOFF * max(P, 1.0)] = 0.0
    inner = 16 / 3 * P * np.prod(sides)
    if inner < -CLAMP_TOL:
        raise ArithmeticError(f"Heron product is negative ({inner:.3e}); triangle inequality violated")
    return float(max(inner, 0.0) ** 0.25)


def gqc(psi: PureState, q: float) -> float:
    """Geometric mean of ``1 - Tr rho_A^q`` over all ``2^(n-1) - 1`` cuts.

    Returns 0 as soon as one cut has vanishing q-concurrence.
    """
    if psi.n < 2:
        raise ValueError("GqC needs at least 2 sites")
    cuts = partition_list(psi.n, 2)
    v = psi.amplitudes[None, :]
    vals = np.array([kernel(schmidt_spectra(v, psi.dims, p.blocks[0])[0], Q, q) for p in cuts])
    if np.any(vals <= 0):
        return 0.0
    return float(np.exp(np.mean(np.log(vals))))


def comparison_row(psi: PureState, q: float, theta: float = math.nan) -> ComparisonRow:
    c, _ = q_gme_pure(psi, q)
    fill = concurrence_fill(psi) if psi.dims == (2, 2, 2) else math.nan
    return ComparisonRow(float(theta), float(q), max(c, 0.0), gqc(psi, q), fill)


def example4_table(theta_grid: Sequence[float], q: float = 3.0) -> list[ComparisonRow]:
    """q-GME concurrence, GqC and fill along the ``phi_theta`` family."""
    rows = []
    for theta in theta_grid:
        psi = PureState.from_vector(phi_theta_vector(theta), (2, 2, 2))
        rows.append(comparison_row(psi, q, theta))
    return rows


def default_theta_grid(points: int = 721) -> np.ndarray:
    return np.linspace(0.0, math.pi, points)


def ordering_flips(rows: Sequence[ComparisonRow], against: Sequence[str] = ("gqc", "fill"),
                   margin: float = 1e-9) -> list[tuple[float, float]]:
    """Pairs ``(theta1, theta2)`` ordered one way by q-GME and the other way by the rest.

    A pair qualifies when ``c(theta1) < c(theta2)`` while every measure in
    ``against`` prefers ``theta1``, each difference exceeding ``margin``.
    """
    c = np.array([r.c_q_gme for r in rows])
    thetas = np.array([r.theta for r in rows])
    ok = c[None, :] - c[:, None] > margin
    for name in against:
        other = np.array([getattr(r, name) for r in rows])
        ok &= other[:, None] - other[None, :] > margin
    i, j = np.nonzero(ok)
    return [(float(thetas[a]), float(thetas[b])) for a, b in zip(i, j)]
