"""Certified lower bounds from partial-transpose negativity and realignment.

Every function here is optimization free: it reads spectra or singular values
of ``rho`` and plugs them into a closed-form inequality. A bound that comes out
negative carries no information for a nonnegative measure, so it is clamped to
0 and marked ``vacuous``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .partitions import Partition
from .qstate import DensityMatrix, partial_transpose, realign

# Lower edge of the m = 2 regime of the second Wei bound (taken as printed).
S_CONST = 2.4721

POSITIVE_TOL = 1e-10


class RegimeError(ValueError):
    """The requested bound does not cover this parameter / dimension regime."""


@dataclass
class BoundReport:
    """A named bound value with its certification status and inputs."""

    name: str
    value: float
    certified: bool
    inputs: dict = field(default_factory=dict)
    vacuous: bool = False

    def to_row(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "certified": bool(self.certified),
            "params": json.dumps(self.inputs, sort_keys=True),
        }

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "value": float(self.value),
            "certified": bool(self.certified),
            "vacuous": bool(self.vacuous),
            "inputs": self.inputs,
        }


def _report(name: str, raw: float, inputs: dict) -> BoundReport:
    vacuous = not raw > 0
    return BoundReport(name, max(float(raw), 0.0), True, inputs, vacuous)


def trace_norm_hermitian(mat: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(mat))))


def trace_norm(mat: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(mat, compute_uv=False)))


def global_negativity(rho: DensityMatrix, p: int) -> float:
    """``(||rho^{T_p}||_1 - 1) / (d_p - 1)`` for the cut ``p | rest``."""
    if not 1 <= int(p) <= rho.n:
        raise ValueError(f"site {p} out of range 1..{rho.n}")
    lam = np.linalg.eigvalsh(partial_transpose(rho, int(p)))
    neg = lam[lam < 0].sum()
    return max(0.0, float(-2 * neg / (rho.dims[int(p) - 1] - 1)))


def negativities(rho: DensityMatrix) -> list[float]:
    return [global_negativity(rho, p) for p in range(1, rho.n + 1)]


def _cut(rho: DensityMatrix, bipart) -> tuple[Partition, int, float, float]:
    if not isinstance(bipart, Partition):
        bipart = Partition(tuple(tuple(b) for b in bipart))
    if bipart.k != 2 or bipart.n != rho.n:
        raise ValueError(f"{bipart} is not a bipartition of {rho.n} sites")
    a, b = bipart.blocks
    da = math.prod(rho.dims[s - 1] for s in a)
    db = math.prod(rho.dims[s - 1] for s in b)
    pt = trace_norm_hermitian(partial_transpose(rho, a))
    re = trace_norm(realign(rho, bipart))
    return bipart, min(da, db), pt, re


def q_bipartite_bound(rho: DensityMatrix, bipart, q: float) -> BoundReport:
    """PPT / realignment bound on the q-concurrence of a cut.

    ``[max(||rho^{T_A}||^{q-1}, ||R(rho)||^{q-1}) - 1]^2 / (m^{2q-2} - m^{q-1})``
    with ``m`` the smaller block dimension. The bracket is clamped at 0.
    """
    if not q >= 2:
        raise ValueError(f"q must be >= 2, got {q}")
    bipart, m, pt, re = _cut(rho, bipart)
    bracket = max(pt ** (q - 1), re ** (q - 1)) - 1
    raw = max(bracket, 0.0) ** 2 / (m ** (2 * q - 2) - m ** (q - 1)) if bracket > 0 else 0.0
    inputs = {"q": q, "m": m, "cut": str(bipart), "pt_norm": pt, "realign_norm": re}
    return _report("q-bipartite", raw, inputs)


def wei_bipartite_bound(rho: DensityMatrix, bipart, q: float) -> BoundReport:
    """Sharper q-concurrence bound with ``T = max(||rho^{T_A}||, ||R||) - 1``.

    ``(1 - m^{1-q}) / (m-1)^2 * T^2`` when ``q >= 2, m >= 3`` or ``q >= 3, m = 2``;
    ``(1 - 2^{1-q}) / (2 - 2^{2-s}) * T^2`` when ``s <= q < 3, m = 2``.
    """
    bipart, m, pt, re = _cut(rho, bipart)
    T = max(max(pt, re) - 1, 0.0)
    inputs = {"q": q, "m": m, "cut": str(bipart), "pt_norm": pt, "realign_norm": re}
    if (q >= 2 and m >= 3) or (q >= 3 and m == 2):
        coef = (1 - m ** (1 - q)) / (m - 1) ** 2
        inputs["regime"] = "m>=3 or q>=3"
    elif m == 2 and S_CONST <= q < 3:
        coef = (1 - 2 ** (1 - q)) / (2 - 2 ** (2 - S_CONST))
        inputs["regime"] = "s<=q<3"
    else:
        raise RegimeError(f"regime not covered: q={q}, m={m}")
    return _report("wei-bipartite", coef * T**2, inputs)


def _equal_dim(rho: DensityMatrix) -> int:
    if len(set(rho.dims)) != 1:
        raise ValueError(f"bound needs equal local dimensions, got {rho.dims}")
    return rho.dims[0]


def qn_bound_qubit(rho: DensityMatrix, q: float) -> BoundReport:
    """``sum_k [(N^k + 1)^{q-1} - 1]^2 / (n (2^{2q-2} - 2^{q-1}))`` on C_{q-n}."""
    if any(d != 2 for d in rho.dims):
        raise ValueError("qn_bound_qubit needs qubit sites")
    if not q >= 2:
        raise ValueError(f"q must be >= 2, got {q}")
    N = negativities(rho)
    n = rho.n
    raw = sum(((x + 1) ** (q - 1) - 1) ** 2 for x in N) / (n * (2 ** (2 * q - 2) - 2 ** (q - 1)))
    return _report("qn-qubit", raw, {"q": q, "n": n, "m": 2, "negativities": N})


def qn_bound_qudit(rho: DensityMatrix, q: float) -> BoundReport:
    """Equal-dimension generalization: ``(N + 1)`` becomes ``((m-1) N + 1)``."""
    m = _equal_dim(rho)
    if not q >= 2:
        raise ValueError(f"q must be >= 2, got {q}")
    N = negativities(rho)
    n = rho.n
    raw = sum((((m - 1) * x + 1) ** (q - 1) - 1) ** 2 for x in N) / (n * (m ** (2 * q - 2) - m ** (q - 1)))
    return _report("qn-qudit", raw, {"q": q, "n": n, "m": m, "negativities": N})


def qn_bound_improved(rho: DensityMatrix, q: float) -> BoundReport:
    """Quadratic-in-negativity bound on C_{q-n}.

    Qubits: ``(1 - 2^{1-q}) / n * sum (N^k)^2`` for ``q >= 3`` and
    ``(1 - 2^{1-q}) / ((2 - 2^{2-s}) n) * sum (N^k)^2`` for ``s <= q < 3``.
    Equal qudit dimension ``m >= 3``: ``(1 - m^{1-q}) / (n (m-1)^2) * sum (N^k)^2``.
    """
    m = _equal_dim(rho)
    N = negativities(rho)
    n = rho.n
    s2 = sum(x * x for x in N)
    inputs = {"q": q, "n": n, "m": m, "negativities": N}
    if m == 2:
        if q >= 3:
            coef = (2 ** (q - 1) - 1) / (2 ** (q - 1) * n)
            inputs["regime"] = "q>=3"
        elif S_CONST <= q < 3:
            coef = (1 - 2 ** (1 - q)) / ((2 - 2 ** (2 - S_CONST)) * n)
            inputs["regime"] = "s<=q<3"
        else:
            raise RegimeError(f"regime not covered: q={q} with qubits")
    else:
        if not q >= 2:
            raise RegimeError(f"regime not covered: q={q}")
        coef = (1 - m ** (1 - q)) / (n * (m - 1) ** 2)
        inputs["regime"] = "qudit"
    return _report("qn-improved", coef * s2, inputs)


def alphan_bound(rho: DensityMatrix, alpha: float) -> BoundReport:
    """Linear-in-negativity bound on C_{alpha-n}: ``(m^{1-a} - 1) / (n (m-1)) * sum N^k``."""
    if not 0 <= alpha <= 0.5:
        raise ValueError(f"alpha must lie in [0, 1/2], got {alpha}")
    m = _equal_dim(rho)
    N = negativities(rho)
    n = rho.n
    raw = (m ** (1 - alpha) - 1) / (n * (m - 1)) * sum(N)
    return _report("alpha-n", raw, {"alpha": alpha, "n": n, "m": m, "negativities": N})


BOUNDS = {
    "q-bipartite": q_bipartite_bound,
    "wei-bipartite": wei_bipartite_bound,
    "qn-qubit": qn_bound_qubit,
    "qn-qudit": qn_bound_qudit,
    "qn-improved": qn_bound_improved,
    "alpha-n": alphan_bound,
}


@dataclass
class Verdict:
    entangled: bool
    witness: BoundReport | None
    reports: list[BoundReport]

    @property
    def label(self) -> str:
        return "n-nonseparable (entangled)" if self.entangled else "no verdict"


def run_bound(rho: DensityMatrix, name: str, **params) -> BoundReport:
    try:
        fn = BOUNDS[name]
    except KeyError:
        raise ValueError(f"unknown bound {name!r}; choose from {', '.join(BOUNDS)}") from None
    return fn(rho, **params)


def default_bound_specs(rho: DensityMatrix, q: float = 3.0, alpha: float = 0.5) -> list[tuple[str, dict]]:
    """Every n-partite bound that applies to ``rho`` at the given parameters."""
    specs: list[tuple[str, dict]] = []
    if len(set(rho.dims)) != 1:
        return specs
    if all(d == 2 for d in rho.dims):
        specs.append(("qn-qubit", {"q": q}))
    specs.append(("qn-qudit", {"q": q}))
    m = rho.dims[0]
    if m > 2 or q >= S_CONST:
        specs.append(("qn-improved", {"q": q}))
    specs.append(("alpha-n", {"alpha": alpha}))
    return specs


def entanglement_verdict(rho: DensityMatrix, specs: Iterable[tuple[str, dict]] | None = None) -> Verdict:
    """Run bounds and call the state entangled iff a certified one is positive.

    Bounds whose regime does not cover the parameters are skipped.
    """
    specs = default_bound_specs(rho) if specs is None else list(specs)
    reports = []
    for name, params in specs:
        try:
            reports.append(run_bound(rho, name, **params))
        except RegimeError:
            continue
    witness = next((r for r in reports if r.certified and r.value > POSITIVE_TOL), None)
    return Verdict(witness is not None, witness, reports)
