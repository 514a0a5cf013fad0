"""Dense pure and mixed n-qudit states and the linear algebra built on them.

Sites are labelled ``1..n``. The computational basis is row-major: site 1 is
the most significant digit of the basis index, so basis vector ``i`` (0-based)
of a qubit register is the binary expansion of ``i`` read from site 1 to n.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
UNITARY_TOL = 1e-10

MAX_PI_SITES = 8


class StateFormatError(ValueError):
    """A state file or literal could not be parsed."""


def check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    """Validate local dimensions and return them as a tuple."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 1:
        raise ValueError("at least one site is required")
    if any(d < 2 for d in dims):
        raise ValueError(f"every local dimension must be >= 2, got {dims}")
    return dims


def _sites(sites: int | Iterable[int], n: int) -> tuple[int, ...]:
    if isinstance(sites, (int, np.integer)):
        sites = (int(sites),)
    sites = tuple(sorted({int(s) for s in sites}))
    for s in sites:
        if not 1 <= s <= n:
            raise ValueError(f"site {s} out of range 1..{n}")
    return sites


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over ``prod(dims)`` basis states."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = check_dims(self.dims)
        vec = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if vec.size != math.prod(dims):
            raise ValueError(
                f"amplitude vector has length {vec.size}, dims {dims} need {math.prod(dims)}"
            )
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        vec.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", vec)

    @classmethod
    def from_vector(cls, vec, dims: Sequence[int], normalize: bool = True) -> "PureState":
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            vec = vec / norm
        return cls(tuple(dims), vec)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator.

    Construction checks all three properties and raises ``ValueError`` when any
    fails; nothing is silently repaired.
    """

    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = check_dims(self.dims)
        mat = np.array(self.matrix, dtype=complex)
        d = math.prod(dims)
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
        herm_dev = np.max(np.abs(mat - mat.conj().T)) if d else 0.0
        if herm_dev > HERMITIAN_TOL:
            raise ValueError(f"matrix is not Hermitian (max deviation {herm_dev:.3e})")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace is {tr!r}, expected 1")
        lam_min = np.linalg.eigvalsh(mat)[0]
        if lam_min < -PSD_TOL:
            raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {lam_min:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def rank(self, tol: float = 1e-10) -> int:
        return int(np.count_nonzero(self.eigvalsh() > tol))

    def tensor(self) -> np.ndarray:
        return self.matrix.reshape(self.dims + self.dims)


@dataclass(frozen=True, eq=False)
class LocalUnitarySet:
    """One unitary per site; the i-th acts on site i+1."""

    dims: tuple[int, ...]
    unitaries: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        dims = check_dims(self.dims)
        us = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        if len(us) != len(dims):
            raise ValueError(f"need {len(dims)} unitaries, got {len(us)}")
        for i, (u, d) in enumerate(zip(us, dims), start=1):
            if u.shape != (d, d):
                raise ValueError(f"unitary on site {i} has shape {u.shape}, expected {(d, d)}")
            if np.max(np.abs(u @ u.conj().T - np.eye(d))) > UNITARY_TOL:
                raise ValueError(f"matrix on site {i} is not unitary")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "unitaries", us)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "LocalUnitarySet":
        return cls(tuple(dims), tuple(np.eye(d) for d in dims))

    @classmethod
    def random(cls, dims: Sequence[int], rng: np.random.Generator) -> "LocalUnitarySet":
        return cls(tuple(dims), tuple(random_unitary(d, rng) for d in dims))


def _trusted_density(dims, mat) -> DensityMatrix:
    # Skips validation for matrices produced by exact operations on valid inputs.
    obj = object.__new__(DensityMatrix)
    mat = np.asarray(mat, dtype=complex)
    mat.setflags(write=False)
    object.__setattr__(obj, "dims", tuple(dims))
    object.__setattr__(obj, "matrix", mat)
    return obj


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random d x d unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_pure_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    d = math.prod(dims)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState.from_vector(v, dims)


def random_density(dims: Sequence[int], rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random mixed state of the given rank (full rank by default)."""
    d = math.prod(dims)
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    mat = g @ g.conj().T
    mat = mat / np.trace(mat).real
    return DensityMatrix(tuple(dims), (mat + mat.conj().T) / 2)


def product_state(factors: Sequence[PureState | np.ndarray]) -> PureState:
    """Tensor product of single- or multi-site pure factors, in order."""
    vec = np.ones(1, dtype=complex)
    dims: list[int] = []
    for f in factors:
        if isinstance(f, PureState):
            vec = np.kron(vec, f.amplitudes)
            dims.extend(f.dims)
        else:
            f = np.asarray(f, dtype=complex).reshape(-1)
            vec = np.kron(vec, f / np.linalg.norm(f))
            dims.append(f.size)
    return PureState.from_vector(vec, dims)


def to_density(psi: PureState) -> DensityMatrix:
    """Return the projector |psi><psi|."""
    v = psi.amplitudes
    return _trusted_density(psi.dims, np.outer(v, v.conj()))


def mixture(weights: Sequence[float], states: Sequence[PureState | DensityMatrix]) -> DensityMatrix:
    """Convex combination of states with the given nonnegative weights."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")
    dims = states[0].dims
    mat = np.zeros((math.prod(dims),) * 2, dtype=complex)
    for w, s in zip(weights, states):
        if s.dims != dims:
            raise ValueError("all states in a mixture need the same dims")
        mat += w * (to_density(s).matrix if isinstance(s, PureState) else s.matrix)
    return DensityMatrix(dims, mat)


def reduced_matrix(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw matrix, keeping 1-based sites ``keep`` in order."""
    n = len(dims)
    keep0 = [s - 1 for s in keep]
    drop0 = [i for i in range(n) if i not in keep0]
    t = np.asarray(mat).reshape(tuple(dims) * 2)
    t = t.transpose(keep0 + drop0 + [n + i for i in keep0] + [n + i for i in drop0])
    dk = math.prod(dims[i] for i in keep0)
    dd = math.prod(dims[i] for i in drop0)
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def partial_trace(rho: DensityMatrix | PureState, keep: int | Iterable[int]) -> DensityMatrix:
    """Reduced state on the sites in ``keep`` (original site order preserved)."""
    if isinstance(rho, PureState):
        rho = to_density(rho)
    if not isinstance(keep, (int, np.integer)) and len(set(keep)) == 0:
        raise ValueError("empty subsystem")
    keep = _sites(keep, rho.n)
    sub = reduced_matrix(rho.matrix, rho.dims, keep)
    return _trusted_density(tuple(rho.dims[s - 1] for s in keep), sub)


def partial_transpose_matrix(mat: np.ndarray, dims: Sequence[int], sites: Sequence[int]) -> np.ndarray:
    n = len(dims)
    t = np.asarray(mat).reshape(tuple(dims) * 2)
    axes = list(range(2 * n))
    for s in sites:
        axes[s - 1], axes[n + s - 1] = axes[n + s - 1], axes[s - 1]
    return t.transpose(axes).reshape(mat.shape)


def partial_transpose(rho: DensityMatrix, p: int | Iterable[int]) -> np.ndarray:
    """Transpose on site ``p`` (or on every site of an iterable of sites).

    The result is returned as a plain Hermitian matrix since it need not be
    positive.
    """
    sites = _sites(p, rho.n)
    return partial_transpose_matrix(rho.matrix, rho.dims, sites)


def realign(rho: DensityMatrix, bipartition) -> np.ndarray:
    """Realigned matrix ``R_{(i,j),(k,l)} = rho_{(i,k),(j,l)}`` for a cut A|B.

    ``i, j`` index block A and ``k, l`` block B, each in the row-major basis
    of its sites taken in increasing order.
    """
    blocks = getattr(bipartition, "blocks", bipartition)
    if len(blocks) != 2:
        raise ValueError("realignment needs a partition with exactly 2 blocks")
    a, b = (tuple(blk) for blk in blocks)
    if sorted(a + b) != list(range(1, rho.n + 1)):
        raise ValueError(f"{bipartition} is not a bipartition of {rho.n} sites")
    n = rho.n
    order = [s - 1 for s in a + b]
    t = rho.tensor().transpose(order + [n + i for i in order])
    da = math.prod(rho.dims[s - 1] for s in a)
    db = math.prod(rho.dims[s - 1] for s in b)
    t = t.reshape(da, db, da, db).transpose(0, 2, 1, 3)
    return t.reshape(da * da, db * db)


def _check_perm(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{n}")
    return perm


def permute_sites(rho: DensityMatrix, perm: Sequence[int]) -> DensityMatrix:
    """Conjugate by the site permutation that moves site ``perm[i]`` to position ``i+1``."""
    n = rho.n
    perm = _check_perm(perm, n)
    if any(rho.dims[i] != rho.dims[p - 1] for i, p in enumerate(perm)):
        raise ValueError("site permutation is incompatible with the local dimensions")
    axes = [p - 1 for p in perm]
    t = rho.tensor().transpose(axes + [n + a for a in axes])
    return _trusted_density(rho.dims, t.reshape(rho.matrix.shape))


def _check_equal_dims(dims: Sequence[int], what: str):
    if len(set(dims)) != 1:
        raise ValueError(f"{what} needs equal local dimensions, got {tuple(dims)}")


def pi_part_bruteforce(rho: DensityMatrix) -> np.ndarray:
    """Average of ``rho`` over all n! site permutations, summed term by term."""
    n = rho.n
    t = rho.tensor()
    acc = np.zeros_like(t)
    for perm in itertools.permutations(range(n)):
        acc += t.transpose(list(perm) + [n + p for p in perm])
    return acc.reshape(rho.matrix.shape) / math.factorial(n)


def pi_part(rho: DensityMatrix) -> DensityMatrix:
    """Permutationally invariant part of ``rho``.

    The n!-term average is evaluated through the coset chain
    ``S_m = S_{m-1} u (i m) S_{m-1}``: averaging over S_m equals averaging over
    S_{m-1} followed by averaging over the m transpositions ``(i m)`` (and the
    identity). The sum is the same; the work drops to O(n^2) conjugations.
    """
    n = rho.n
    _check_equal_dims(rho.dims, "pi_part")
    if n > MAX_PI_SITES:
        raise ValueError(f"pi_part is limited to n <= {MAX_PI_SITES} sites")
    t = rho.tensor()
    for m in range(1, n):
        acc = t.copy()
        for i in range(m):
            axes = list(range(n))
            axes[i], axes[m] = axes[m], axes[i]
            acc += t.transpose(axes + [n + a for a in axes])
        t = acc / (m + 1)
    mat = t.reshape(rho.matrix.shape)
    return _trusted_density(rho.dims, (mat + mat.conj().T) / 2)


def apply_local_unitaries(rho: DensityMatrix, u: LocalUnitarySet) -> DensityMatrix:
    """Return (U_1 x ... x U_n) rho (U_1 x ... x U_n)^dagger."""
    if u.dims != rho.dims:
        raise ValueError(f"unitary dims {u.dims} do not match state dims {rho.dims}")
    n = rho.n
    t = rho.tensor()
    for i, ui in enumerate(u.unitaries):
        t = np.moveaxis(np.tensordot(ui, t, axes=(1, i)), 0, i)
        t = np.moveaxis(np.tensordot(ui.conj(), t, axes=(1, n + i)), 0, n + i)
    return _trusted_density(rho.dims, t.reshape(rho.matrix.shape))


def apply_local_unitaries_pure(psi: PureState, u: LocalUnitarySet) -> PureState:
    if u.dims != psi.dims:
        raise ValueError(f"unitary dims {u.dims} do not match state dims {psi.dims}")
    t = psi.tensor()
    for i, ui in enumerate(u.unitaries):
        t = np.moveaxis(np.tensordot(ui, t, axes=(1, i)), 0, i)
    return PureState.from_vector(t.reshape(-1), psi.dims)


# -- named families -----------------------------------------------------------


def ghz_vector(n: int, d: int = 2) -> np.ndarray:
    v = np.zeros(d**n, dtype=complex)
    step = sum(d**i for i in range(n))
    v[[j * step for j in range(d)]] = 1 / np.sqrt(d)
    return v


def w_vector(n: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[[2**i for i in range(n)]] = 1 / np.sqrt(n)
    return v


def phi_theta_vector(theta: float) -> np.ndarray:
    """-cos(t)/2 |010> + sqrt(3) cos(t)/2 |100> + sin(t) |011>."""
    v = np.zeros(8, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    v[0b010] = -0.5 * c
    v[0b100] = np.sqrt(3) / 2 * c
    v[0b011] = s
    return v


def _unit(name: str, x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"parameter {name}={x} outside [0, 1]")
    return x


FAMILIES = ("ghz", "w", "ghz_noise", "w_noise", "ghz_w_noise", "phi_theta")

_FAMILY_PARAMS = {
    "ghz": ("d",),
    "w": (),
    "ghz_noise": ("t",),
    "w_noise": ("a",),
    "ghz_w_noise": ("a", "b"),
    "phi_theta": ("theta",),
}


def state_factory(name: str, n: int, **params) -> DensityMatrix:
    """Build one of the named example families.

    ``ghz`` (optional local dimension ``d``), ``w``, ``ghz_noise(t)``,
    ``w_noise(a)``, ``ghz_w_noise(a, b)`` and the three-qubit ``phi_theta(theta)``.
    Noisy families mix in ``I / 2**n`` with the remaining weight.
    """
    key = name.replace("-", "_").lower()
    if key not in _FAMILY_PARAMS:
        raise ValueError(f"unknown state family {name!r}; choose from {', '.join(FAMILIES)}")
    unknown = set(params) - set(_FAMILY_PARAMS[key])
    if unknown:
        raise ValueError(f"family {key} does not take parameters {sorted(unknown)}")
    n = int(n)
    if n < 1 or (key != "ghz" and n > 12):
        raise ValueError(f"n={n} out of range")
    if key == "ghz":
        d = int(params.get("d", 2))
        if d < 2:
            raise ValueError("ghz needs d >= 2")
        return to_density(PureState.from_vector(ghz_vector(n, d), (d,) * n))
    if key == "phi_theta":
        if n != 3:
            raise ValueError("phi_theta is a three-qubit family")
        theta = float(params.get("theta", 0.0))
        return to_density(PureState.from_vector(phi_theta_vector(theta), (2, 2, 2)))
    dims = (2,) * n
    D = 2**n
    noise = np.eye(D) / D
    if key == "w":
        return to_density(PureState.from_vector(w_vector(n), dims))
    ghz = np.outer(ghz_vector(n), ghz_vector(n).conj())
    w = np.outer(w_vector(n), w_vector(n).conj())
    if key == "ghz_noise":
        t = _unit("t", params.get("t", 1.0))
        return DensityMatrix(dims, t * ghz + (1 - t) * noise)
    if key == "w_noise":
        a = _unit("a", params.get("a", 1.0))
        return DensityMatrix(dims, a * w + (1 - a) * noise)
    a = _unit("a", params.get("a", 0.0))
    b = _unit("b", params.get("b", 0.0))
    if a + b > 1.0 + 1e-12:
        raise ValueError(f"a + b = {a + b} exceeds 1")
    return DensityMatrix(dims, a * ghz + b * w + max(0.0, 1 - a - b) * noise)


def pure_state_factory(name: str, n: int, **params) -> PureState:
    """Pure members of the named families (``ghz``, ``w``, ``phi_theta``)."""
    key = name.replace("-", "_").lower()
    if key == "ghz":
        d = int(params.get("d", 2))
        return PureState.from_vector(ghz_vector(n, d), (d,) * n)
    if key == "w":
        return PureState.from_vector(w_vector(n), (2,) * n)
    if key == "phi_theta":
        if n != 3:
            raise ValueError("phi_theta is a three-qubit family")
        return PureState.from_vector(phi_theta_vector(float(params.get("theta", 0.0))), (2, 2, 2))
    raise ValueError(f"{name!r} is not a pure family")


def as_pure(rho: DensityMatrix, tol: float = 1e-10) -> PureState | None:
    """Return the pure state if ``rho`` has rank one, else ``None``."""
    lam, vec = np.linalg.eigh(rho.matrix)
    if lam[-2:-1].size and lam[-2] > tol:
        return None
    v = vec[:, -1]
    k = np.argmax(np.abs(v))
    v = v * (abs(v[k]) / v[k])  # fix global phase
    return PureState.from_vector(v, rho.dims)


# -- file format --------------------------------------------------------------


def state_to_json(state: PureState | DensityMatrix) -> dict:
    if isinstance(state, PureState):
        flat, kind = state.amplitudes, "pure"
    else:
        flat, kind = state.matrix.reshape(-1), "mixed"
    return {
        "dims": list(state.dims),
        "kind": kind,
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def state_from_json(obj) -> PureState | DensityMatrix:
    if not isinstance(obj, dict):
        raise StateFormatError("state file must hold a JSON object")
    for key in ("dims", "kind", "data"):
        if key not in obj:
            raise StateFormatError(f"missing field {key!r}")
    try:
        dims = check_dims(obj["dims"])
    except (TypeError, ValueError) as exc:
        raise StateFormatError(f"field 'dims': {exc}") from exc
    kind = obj["kind"]
    if kind not in ("pure", "mixed"):
        raise StateFormatError(f"field 'kind': expected 'pure' or 'mixed', got {kind!r}")
    data = obj["data"]
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateFormatError(f"field 'data': {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise StateFormatError("field 'data': expected a list of [re, im] pairs")
    flat = arr[:, 0] + 1j * arr[:, 1]
    D = math.prod(dims)
    expected = D if kind == "pure" else D * D
    if flat.size != expected:
        raise StateFormatError(f"field 'data': expected {expected} entries, got {flat.size}")
    try:
        if kind == "pure":
            return PureState(dims, flat)
        return DensityMatrix(dims, flat.reshape(D, D))
    except ValueError as exc:
        raise StateFormatError(f"invalid {kind} state: {exc}") from exc


def load_state(path: str | Path) -> PureState | DensityMatrix:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return state_from_json(obj)
    except StateFormatError as exc:
        raise StateFormatError(f"{path}: {exc}") from exc


def save_state(state: PureState | DensityMatrix, path: str | Path) -> None:
    Path(path).write_text(json.dumps(state_to_json(state)))
