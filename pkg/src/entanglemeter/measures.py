"""q-k-ME and alpha-k-ME concurrences.

For a pure state the measures minimize, over all k-block partitions
``A_1|...|A_k``, the block average of a bipartite kernel evaluated on the
reduced states ``rho_{A_t}``:

* q family (q >= 2):          ``1 - Tr rho_A^q``
* alpha family (0 <= a <= 1/2): ``Tr rho_A^a - 1``

Mixed states are handled by the convex roof. No closed form exists, so
:func:`roof_estimate` searches over decompositions and returns an upper
bound; certified lower bounds live in :mod:`entanglemeter.bounds`.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .bounds import BoundReport
from .partitions import Partition, format_partition, partition_list
from .qstate import (
    DensityMatrix,
    LocalUnitarySet,
    PureState,
    apply_local_unitaries,
    as_pure,
    pi_part,
)

RANK_TOL = 1e-10

_CHUNK_ELEMENTS = 1 << 20

Q = "q"
ALPHA = "alpha"


@dataclass(frozen=True)
class MeasureSpec:
    """Which measure to evaluate: family ``"q"`` or ``"alpha"``, its parameter and k."""

    family: str
    param: float
    k: int = 2

    def __post_init__(self):
        fam = str(self.family).lower()
        if fam in ("a", "α"):
            fam = ALPHA
        if fam not in (Q, ALPHA):
            raise ValueError(f"unknown measure family {self.family!r}")
        param = float(self.param)
        if fam == Q and not param >= 2:
            raise ValueError(f"q must be >= 2, got {param}")
        if fam == ALPHA and not 0 <= param <= 0.5:
            raise ValueError(f"alpha must lie in [0, 1/2], got {param}")
        if int(self.k) < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "param", param)
        object.__setattr__(self, "k", int(self.k))

    def check_n(self, n: int):
        if self.k > n:
            raise ValueError(f"k={self.k} exceeds the number of sites n={n}")

    @property
    def name(self) -> str:
        return "q-k-ME" if self.family == Q else "alpha-k-ME"


# -- spectral kernels ---------------------------------------------------------


def spectrum_power(lam: np.ndarray, p: float) -> np.ndarray:
    """Sum of ``lam**p`` over entries above ``RANK_TOL`` along the last axis.

    With ``p == 0`` this counts the entries above the threshold (the rank).
    """
    lam = np.asarray(lam, dtype=float)
    mask = lam > RANK_TOL
    safe = np.where(mask, lam, 1.0)
    return np.where(mask, safe**p, 0.0).sum(axis=-1)


def kernel(lam: np.ndarray, family: str, param: float) -> np.ndarray:
    s = spectrum_power(lam, param)
    return 1.0 - s if family == Q else s - 1.0


def trace_power(rho: DensityMatrix, p: float) -> float:
    """``Tr rho**p`` via the eigenvalues of ``rho``; rank when ``p == 0``."""
    if p < 0:
        raise ValueError(f"power must be >= 0, got {p}")
    lam = np.linalg.eigvalsh(rho.matrix)
    return float(spectrum_power(lam, p))


def schmidt_spectra(states: np.ndarray, dims: Sequence[int], block: Sequence[int]) -> np.ndarray:
    """Eigenvalues of the reduced state on ``block`` for a batch of pure vectors.

    ``states`` has shape ``(L, D)``; the result has shape ``(L, min(d_A, d_B))``.
    """
    n = len(dims)
    states = np.asarray(states)
    b0 = [s - 1 for s in block]
    rest = [i for i in range(n) if i not in b0]
    t = states.reshape((states.shape[0],) + tuple(dims))
    t = t.transpose([0] + [i + 1 for i in b0] + [i + 1 for i in rest])
    da = math.prod(dims[i] for i in b0)
    t = t.reshape(states.shape[0], da, -1)
    s = np.linalg.svd(t, compute_uv=False)
    return s**2


def _block_index(dims: Sequence[int], block: Sequence[int]) -> np.ndarray:
    """Index map ``idx`` with ``vec[idx]`` the block/rest matrix of a state vector.

    The smaller side comes first, so ``M @ M^dagger`` is the smaller reduced matrix.
    """
    n = len(dims)
    b0 = [s - 1 for s in block]
    rest = [i for i in range(n) if i not in b0]
    da = math.prod(dims[i] for i in b0)
    db = math.prod(dims[i] for i in rest)
    first, second = (b0, rest) if da <= db else (rest, b0)
    grid = np.arange(math.prod(dims)).reshape(tuple(dims)).transpose(first + second)
    return grid.reshape(min(da, db), max(da, db))


@dataclass(frozen=True)
class _PartitionTable:
    partitions: tuple[Partition, ...]
    blocks: tuple[tuple[int, ...], ...]
    incidence: np.ndarray  # (n_partitions, n_blocks), 1 where block is in partition
    groups: tuple[tuple[np.ndarray, np.ndarray], ...]  # (block positions, stacked index maps)


@lru_cache(maxsize=16)
def _partition_table(dims: tuple[int, ...], k: int) -> _PartitionTable:
    parts = partition_list(len(dims), k)
    index: dict[tuple[int, ...], int] = {}
    for p in parts:
        for b in p.blocks:
            index.setdefault(b, len(index))
    inc = np.zeros((len(parts), len(index)))
    for i, p in enumerate(parts):
        for b in p.blocks:
            inc[i, index[b]] = 1.0
    by_shape: dict[tuple[int, int], list[tuple[int, np.ndarray]]] = {}
    for b, j in index.items():
        idx = _block_index(dims, b)
        by_shape.setdefault(idx.shape, []).append((j, idx))
    groups = tuple(
        (np.array([j for j, _ in members]), np.stack([idx for _, idx in members]))
        for members in by_shape.values()
    )
    return _PartitionTable(parts, tuple(index), inc, groups)


def _small_eigvalsh(gram: np.ndarray) -> np.ndarray:
    if gram.shape[-1] == 1:
        return gram[..., 0].real
    if gram.shape[-1] == 2:
        a = gram[..., 0, 0].real
        d = gram[..., 1, 1].real
        half_tr = (a + d) / 2
        disc = np.sqrt(((a - d) / 2) ** 2 + np.abs(gram[..., 0, 1]) ** 2)
        return np.stack([half_tr - disc, half_tr + disc], axis=-1)
    return np.linalg.eigvalsh(gram)


def k_me_values(states: np.ndarray, dims: Sequence[int], spec: MeasureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Pure-state k-ME values for a batch of normalized vectors.

    Returns ``(values, argmin)`` where ``argmin`` indexes the canonical
    k-partition list; the first minimizer wins ties.
    """
    dims = tuple(dims)
    spec.check_n(len(dims))
    table = _partition_table(dims, spec.k)
    states = np.atleast_2d(states)
    L = states.shape[0]
    block_vals = np.empty((len(table.blocks), L))
    chunk = max(1, _CHUNK_ELEMENTS // (L * states.shape[1]))
    for pos_all, idx_all in table.groups:
        for c in range(0, len(pos_all), chunk):
            pos, idx = pos_all[c : c + chunk], idx_all[c : c + chunk]
            m = states[:, idx]  # (L, G, small, large)
            gram = m @ m.conj().swapaxes(-1, -2)
            lam = _small_eigvalsh(gram)
            block_vals[pos] = kernel(lam, spec.family, spec.param).T
    part_vals = table.incidence @ block_vals / spec.k
    idx = np.argmin(part_vals, axis=0)
    return part_vals[idx, np.arange(L)], idx


def k_me_pure(psi: PureState, spec: MeasureSpec) -> tuple[float, Partition]:
    """Minimum block-averaged kernel over all k-partitions, and the minimizer."""
    vals, idx = k_me_values(psi.amplitudes[None, :], psi.dims, spec)
    return float(vals[0]), _partition_table(psi.dims, spec.k).partitions[int(idx[0])]


def _check_bipartition(bipart: Partition, n: int) -> Partition:
    if not isinstance(bipart, Partition):
        bipart = Partition(tuple(tuple(b) for b in bipart))
    if bipart.k != 2 or bipart.n != n:
        raise ValueError(f"{bipart} is not a bipartition of {n} sites")
    return bipart


def q_concurrence(psi: PureState, bipart: Partition, q: float) -> float:
    """``1 - Tr rho_A^q`` across the cut A|B."""
    if not q >= 2:
        raise ValueError(f"q must be >= 2, got {q}")
    bipart = _check_bipartition(bipart, psi.n)
    lam = schmidt_spectra(psi.amplitudes[None, :], psi.dims, bipart.blocks[0])[0]
    return float(kernel(lam, Q, q))


def alpha_concurrence(psi: PureState, bipart: Partition, alpha: float) -> float:
    """``Tr rho_A^alpha - 1`` across the cut A|B."""
    if not 0 <= alpha <= 0.5:
        raise ValueError(f"alpha must lie in [0, 1/2], got {alpha}")
    bipart = _check_bipartition(bipart, psi.n)
    lam = schmidt_spectra(psi.amplitudes[None, :], psi.dims, bipart.blocks[0])[0]
    return float(kernel(lam, ALPHA, alpha))


def q_k_me_pure(psi: PureState, q: float, k: int) -> tuple[float, Partition]:
    return k_me_pure(psi, MeasureSpec(Q, q, k))


def alpha_k_me_pure(psi: PureState, alpha: float, k: int) -> tuple[float, Partition]:
    return k_me_pure(psi, MeasureSpec(ALPHA, alpha, k))


def _gme(psi: PureState, family: str, param: float) -> tuple[float, Partition]:
    # Single-cut minimum: the kernel of one side of each bipartition.
    if psi.n < 2:
        raise ValueError("GME measures need at least 2 sites")
    MeasureSpec(family, param, 2)
    parts = partition_list(psi.n, 2)
    vals = [
        float(kernel(schmidt_spectra(psi.amplitudes[None, :], psi.dims, p.blocks[0])[0], family, param))
        for p in parts
    ]
    i = int(np.argmin(vals))
    return vals[i], parts[i]


def q_gme_pure(psi: PureState, q: float) -> tuple[float, Partition]:
    """q-GME concurrence: min over bipartitions of ``1 - Tr rho_A^q``."""
    return _gme(psi, Q, q)


def alpha_gme_pure(psi: PureState, alpha: float) -> tuple[float, Partition]:
    """alpha-GME concurrence: min over bipartitions of ``Tr rho_A^alpha - 1``."""
    return _gme(psi, ALPHA, alpha)


# -- convex roof --------------------------------------------------------------


@dataclass
class RoofEstimate:
    """Best decomposition found by :func:`roof_estimate` (an upper bound)."""

    value: float
    ensemble_size: int
    restarts: int
    converged: bool
    best_decomposition: list[tuple[float, PureState]] = field(repr=False)

    def reconstruct(self) -> np.ndarray:
        return sum(p * np.outer(s.amplitudes, s.amplitudes.conj()) for p, s in self.best_decomposition)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ENTANGLEMETER_THREADS", "1")))
    except ValueError:
        return 1


class _RoofObjective:
    """Ensemble average of a pure-state measure over decompositions of rho.

    A real vector ``x`` of length ``2*L*r`` is read as a complex ``L x r``
    matrix and orthonormalized (QR) into an isometry ``U``. The subnormalized
    ensemble vectors are the rows of ``U @ diag(sqrt(lam)) @ E^T`` with
    ``rho = E diag(lam) E^dagger``. Every size-L ensemble arises this way.
    """

    def __init__(self, rho: DensityMatrix, spec: MeasureSpec, L: int):
        lam, vec = np.linalg.eigh(rho.matrix)
        keep = lam > RANK_TOL
        self.r = int(keep.sum())
        self.L = L
        self.dims = rho.dims
        self.spec = spec
        self.base = np.sqrt(lam[keep])[:, None] * vec[:, keep].T  # (r, D)

    def isometry(self, x: np.ndarray) -> np.ndarray:
        Lr = self.L * self.r
        z = (x[:Lr] + 1j * x[Lr:]).reshape(self.L, self.r)
        # Cholesky QR: z = q c^H with c c^H = z^H z; plain QR if z is singular.
        try:
            c = np.linalg.cholesky(z.conj().T @ z)
        except np.linalg.LinAlgError:
            return np.linalg.qr(z)[0]
        return z @ np.linalg.inv(c).conj().T

    def ensemble(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        psi = self.isometry(x) @ self.base
        p = np.sum(np.abs(psi) ** 2, axis=1)
        live = p > 1e-15
        return p[live], psi[live] / np.sqrt(p[live])[:, None]

    def __call__(self, x: np.ndarray) -> float:
        p, states = self.ensemble(x)
        vals, _ = k_me_values(states, self.dims, self.spec)
        return float(p @ vals)

    def start(self, restart: int, rng: np.random.Generator) -> np.ndarray:
        if restart == 0:
            z = np.zeros((self.L, self.r), dtype=complex)
            z[: self.r, : self.r] = np.eye(self.r)
        else:
            z = rng.standard_normal((self.L, self.r)) + 1j * rng.standard_normal((self.L, self.r))
        return np.concatenate([z.real.ravel(), z.imag.ravel()])


def _nelder_mead(f, x0, scale, max_iters, tol):
    dim = x0.size
    simplex = np.vstack([x0, x0 + scale * np.eye(dim)])
    return minimize(
        f,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "maxiter": max_iters,
            "maxfev": 2 * max_iters,
            "xatol": math.sqrt(tol),
            "fatol": tol,
            "adaptive": dim > 10,
        },
    )


def _one_restart(obj: _RoofObjective, restart: int, seed: int, max_iters: int, tol: float):
    rng = np.random.default_rng([seed, restart])
    res = _nelder_mead(obj, obj.start(restart, rng), 0.3, max_iters, tol)
    best_x, best_f = res.x, res.fun
    # Re-seed a smaller simplex around the incumbent until it stops improving;
    # "converged" means the last re-seed gained less than tol.
    converged = False
    for scale in (0.1, 0.03, 0.01):
        res = _nelder_mead(obj, best_x, scale, max(1, max_iters // 2), tol)
        gain = best_f - res.fun
        if gain > 0:
            best_x, best_f = res.x, res.fun
        if gain < tol:
            converged = True
            break
    return best_f, best_x, converged


def roof_estimate(
    rho: DensityMatrix,
    spec: MeasureSpec,
    ensemble_size: int | None = None,
    restarts: int = 16,
    seed: int = 42,
    max_iters: int = 2000,
    tol: float = 1e-8,
) -> RoofEstimate:
    """Upper-bound the convex roof of a k-ME concurrence by local search.

    Restart 0 starts from the eigen-decomposition; the others from random
    isometries seeded by ``(seed, restart)``. Rank-one inputs are evaluated
    exactly without any search.
    """
    spec.check_n(rho.n)
    psi = as_pure(rho)
    if psi is not None:
        value, _ = k_me_pure(psi, spec)
        return RoofEstimate(value, 1, 0, True, [(1.0, psi)])
    obj = _RoofObjective(rho, spec, 0)
    L = obj.r + 2 if ensemble_size is None else int(ensemble_size)
    if L < obj.r:
        raise ValueError(f"ensemble_size {L} is smaller than rank {obj.r}")
    obj.L = L
    restarts = max(1, int(restarts))

    def run(i):
        return _one_restart(obj, i, seed, max_iters, tol)

    workers = min(_threads(), restarts)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(i) for i in range(restarts)]
    best = min(range(restarts), key=lambda i: results[i][0])
    f, x, converged = results[best]
    p, states = obj.ensemble(x)
    decomposition = [(float(pi), PureState.from_vector(s, rho.dims)) for pi, s in zip(p, states)]
    return RoofEstimate(max(0.0, float(f)), L, restarts, bool(converged), decomposition)


def pi_lower_bound(
    rho: DensityMatrix,
    spec: MeasureSpec,
    restarts: int = 8,
    seed: int = 42,
    max_iters: int = 2000,
    roof_restarts: int = 4,
) -> BoundReport:
    """Sampled version of ``max_U C(rho_U^PI)`` over local unitaries ``U``.

    The identity is always tried first; ``restarts`` Haar-random local
    unitary sets follow. Each PI part is evaluated exactly when it is pure and
    with :func:`roof_estimate` otherwise, so the report is only certified
    when the maximizing PI part is pure.
    """
    if len(set(rho.dims)) != 1:
        raise ValueError(f"pi_lower_bound needs equal local dimensions, got {rho.dims}")
    spec.check_n(rho.n)
    rng = np.random.default_rng(seed)
    candidates = [LocalUnitarySet.identity(rho.dims)]
    candidates += [LocalUnitarySet.random(rho.dims, rng) for _ in range(restarts)]
    best_val, best_cert, best_i = -np.inf, False, 0
    for i, u in enumerate(candidates):
        sym = pi_part(apply_local_unitaries(rho, u))
        psi = as_pure(sym)
        if psi is not None:
            val, certified = k_me_pure(psi, spec)[0], True
        else:
            est = roof_estimate(sym, spec, restarts=roof_restarts, seed=seed + i, max_iters=max_iters)
            val, certified = est.value, False
        if val > best_val:
            best_val, best_cert, best_i = val, certified, i
    return BoundReport(
        name=f"pi-{spec.family}-k",
        value=float(max(best_val, 0.0)),
        certified=best_cert,
        inputs={
            "family": spec.family,
            "param": spec.param,
            "k": spec.k,
            "n": rho.n,
            "unitary_samples": len(candidates),
            "best_sample": best_i,
        },
    )


def result_record(spec: MeasureSpec, value: float, partition: Partition | None, certified: bool) -> dict:
    """JSON-ready record for a measure evaluation."""
    rec: dict = {"measure": spec.name, spec.family: spec.param, "k": spec.k, "value": float(value)}
    rec["argmin_partition"] = format_partition(partition) if partition is not None else None
    rec["certified"] = bool(certified)
    return rec
