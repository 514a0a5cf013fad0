"""Independent reference implementations used only by the tests.

Nothing here imports the package's linear algebra: partitions come from
sympy, reduced states from explicit einsum contractions.
"""

from __future__ import annotations

import math

import numpy as np
from sympy.utilities.iterables import multiset_partitions

DROP = 1e-10


def set_partitions(n: int, k: int) -> list[list[list[int]]]:
    """All k-block partitions of the sites 1..n (sympy enumeration)."""
    return [[list(b) for b in p] for p in multiset_partitions(list(range(1, n + 1)), k)]


def reduced(vec: np.ndarray, dims, keep) -> np.ndarray:
    """Reduced density matrix on ``keep`` (1-based) by explicit contraction."""
    n = len(dims)
    psi = np.asarray(vec).reshape(dims)
    keep = sorted(keep)
    letters = "abcdefghijklmnop"
    primed = "ABCDEFGHIJKLMNOP"
    ket = "".join(letters[i] for i in range(n))
    bra = "".join(primed[i] if i + 1 in keep else letters[i] for i in range(n))
    out = "".join(letters[i - 1] for i in keep) + "".join(primed[i - 1] for i in keep)
    rho = np.einsum(f"{ket},{bra}->{out}", psi, psi.conj())
    d = math.prod(dims[i - 1] for i in keep)
    return rho.reshape(d, d)


def spectrum(mat: np.ndarray) -> np.ndarray:
    lam = np.linalg.eigvalsh(mat)
    return lam[lam > DROP]


def q_kernel(lam, q):
    return 1 - np.sum(lam**q)


def alpha_kernel(lam, alpha):
    return np.sum(lam**alpha) - 1


def kme(vec, dims, family, param, k) -> float:
    """min over k-partitions of the block-averaged kernel of reduced states."""
    f = q_kernel if family == "q" else alpha_kernel
    best = math.inf
    for part in set_partitions(len(dims), k):
        val = sum(f(spectrum(reduced(vec, dims, b)), param) for b in part) / k
        best = min(best, val)
    return best


def gme_single_cut(vec, dims, family, param) -> float:
    """min over bipartitions of the kernel of one side's reduced state."""
    f = q_kernel if family == "q" else alpha_kernel
    return min(f(spectrum(reduced(vec, dims, p[0])), param) for p in set_partitions(len(dims), 2))


def k_me_concurrence(vec, dims, k) -> float:
    """sqrt(2 - 2/k * sum Tr rho_block^2) minimized over k-partitions."""
    best = math.inf
    for part in set_partitions(len(dims), k):
        s = sum(np.real(np.trace(reduced(vec, dims, b) @ reduced(vec, dims, b))) for b in part)
        best = min(best, math.sqrt(max(2 - 2 * s / k, 0.0)))
    return best


def partial_transpose(mat: np.ndarray, dims, sites) -> np.ndarray:
    n = len(dims)
    t = mat.reshape(tuple(dims) * 2)
    axes = list(range(2 * n))
    for s in sites:
        axes[s - 1], axes[n + s - 1] = axes[n + s - 1], axes[s - 1]
    return t.transpose(axes).reshape(mat.shape)


def negativity(mat: np.ndarray, dims, p) -> float:
    lam = np.linalg.eigvalsh(partial_transpose(mat, dims, [p]))
    return (np.sum(np.abs(lam)) - 1) / (dims[p - 1] - 1)


def wootters(mat: np.ndarray) -> float:
    """Two-qubit concurrence."""
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    r = mat @ yy @ mat.conj() @ yy
    ev = np.sqrt(np.clip(np.sort(np.real(np.linalg.eigvals(r)))[::-1], 0, None))
    return max(0.0, ev[0] - ev[1] - ev[2] - ev[3])


def haar_state(dim, rng) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def haar_unitary(d, rng) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def product_over(part, dims, rng) -> np.ndarray:
    """Random pure state that factors across ``part`` (blocks of 1-based sites)."""
    n = len(dims)
    psi = np.ones(())
    order = []
    for block in part:
        d = math.prod(dims[s - 1] for s in block)
        psi = np.multiply.outer(psi, haar_state(d, rng).reshape([dims[s - 1] for s in block]))
        order += list(block)
    # axis j of psi holds site order[j]; move it back to position order[j]-1
    perm = np.argsort(order)
    return psi.transpose(perm).reshape(-1) if n else psi


# closed forms copied from the source formulas

def example1_negativity(n, a):
    return ((2**n * math.sqrt(n - 1) + n) * a - n) / (n * 2 ** (n - 1))


def example2_threshold(n, k):
    return (2**n - 2) / (2 ** (n + k - 1) - 2)


def example2_keff1(t, n):
    return math.log2((2**n - 2) * (1 - t) / (2 ** (n - 1) * t) + 2)


def example3_terms(n, a, b):
    c = (1 - a - b) / 2**n
    A = a / 2
    B = 2 * n * math.sqrt((b / n + c) * c) + (2 ** (n - 1) - n - 1) * (1 - a - b) / 2 ** (n - 1)
    C = (n - 1) * b
    D = n * (n - 1) * math.sqrt((a / 2 + c) * c)
    E = n * (b / n + c)
    return A, B, C, D, E


def example3_keff2_n4(a, b):
    return 4 - (12 * b - 3 * math.sqrt((1 + 7 * a - b) * (1 - a - b))) / (1 - a + 3 * b)


def example3_keff1_n4(a, b):
    return math.log2(2 / a * (math.sqrt((1 - a + 3 * b) * (1 - a - b)) / 2 + 3 * (1 - a - b) / 8) + 2)


def example4_eigs(theta):
    s2, c2 = math.sin(theta) ** 2, math.cos(theta) ** 2
    r = math.sqrt(max(1 - 3 * s2 * c2, 0.0))
    return (0.25 + 0.75 * s2, 0.75 * c2), ((1 + r) / 2, (1 - r) / 2)


def example4_cq(theta, q):
    e1, e2 = example4_eigs(theta)
    t1 = 1 - (e1[0] ** q + e1[1] ** q)
    t2 = 1 - (e2[0] ** q + e2[1] ** q)
    return min(t1, t2)


def example4_c3_printed(theta):
    _, e2 = example4_eigs(theta)
    return 1 - (e2[0] ** 3 + e2[1] ** 3)


def example4_gq(theta, q):
    e1, e2 = example4_eigs(theta)
    t1 = 1 - (e1[0] ** q + e1[1] ** q)
    t2 = 1 - (e2[0] ** q + e2[1] ** q)
    return max(t1, 0.0) ** (2 / 3) * max(t2, 0.0) ** (1 / 3)


def example4_fill(theta):
    """Two-cut specialization, with P = C1 + C2/2 (sum of squared concurrences over 2)."""
    e1, e2 = example4_eigs(theta)
    C1 = 2 - 2 * (e1[0] ** 2 + e1[1] ** 2)
    C2 = 2 - 2 * (e2[0] ** 2 + e2[1] ** 2)
    P = C1 + C2 / 2
    return max(16 / 3 * P * (P - C1) ** 2 * (P - C2), 0.0) ** 0.25
