"""scikit-learn style wrappers around the measures, bounds and tests.

Inputs are batches of states rather than feature tables:

* pure states: complex array ``(n_samples, D)``, one state vector per row;
* mixed states: complex array ``(n_samples, D, D)``.

``check_array`` rejects complex data, so validation is done by the helpers
below. All estimators are stateless apart from the layout learned in ``fit``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .bounds import BOUNDS, RegimeError
from .detection import VIOLATION_TOL, criterion_terms, ghz_margin, k_eff_from_terms, w_margin
from .measures import MeasureSpec, k_me_values
from .qstate import NORM_TOL, DensityMatrix, check_dims


def infer_dims(D: int) -> tuple[int, ...]:
    """Qubit layout for a Hilbert-space dimension ``D = 2^n``."""
    n = int(round(math.log2(D))) if D > 1 else 0
    if n < 1 or 2**n != D:
        raise ValueError(f"cannot infer qubit layout for dimension {D}; pass dims explicitly")
    return (2,) * n


def check_pure_batch(X, dims: Sequence[int] | None = None, normalize: bool = False) -> tuple[np.ndarray, tuple[int, ...]]:
    """Validate a ``(n_samples, D)`` batch of state vectors."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"expected a non-empty (n_samples, D) array, got shape {X.shape}")
    X = X.astype(complex)
    if not np.all(np.isfinite(X)):
        raise ValueError("state vectors contain NaN or inf")
    dims = infer_dims(X.shape[1]) if dims is None else check_dims(dims)
    if math.prod(dims) != X.shape[1]:
        raise ValueError(f"dims {dims} do not match vector length {X.shape[1]}")
    norms = np.linalg.norm(X, axis=1)
    if normalize:
        if np.any(norms == 0):
            raise ValueError("zero vector in batch")
        X = X / norms[:, None]
    elif np.any(np.abs(norms - 1) > NORM_TOL):
        raise ValueError("state vectors must have unit norm (or pass normalize=True)")
    return X, dims


def check_density_batch(X, dims: Sequence[int] | None = None) -> tuple[list[DensityMatrix], tuple[int, ...]]:
    """Validate a ``(n_samples, D, D)`` batch of density matrices."""
    X = np.asarray(X)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3 or X.shape[0] == 0 or X.shape[1] != X.shape[2]:
        raise ValueError(f"expected a non-empty (n_samples, D, D) array, got shape {X.shape}")
    dims = infer_dims(X.shape[1]) if dims is None else check_dims(dims)
    return [DensityMatrix(dims, m.astype(complex)) for m in X], dims


class _Fitted(BaseEstimator):
    def _fit_layout(self, dims):
        self.dims_ = tuple(dims)
        self.n_features_in_ = math.prod(dims)
        return self

    def _same_layout(self, dims):
        check_is_fitted(self, "dims_")
        if tuple(dims) != self.dims_:
            raise ValueError(f"fitted on dims {self.dims_}, got {tuple(dims)}")


class KMEConcurrence(TransformerMixin, _Fitted):
    """Pure-state q-k-ME / alpha-k-ME concurrence as a one-column transform.

    ``transform`` returns ``(n_samples, 1)`` values; the minimizing
    partition of the last call is kept in ``argmin_``.
    """

    def __init__(self, family: str = "q", param: float = 2.0, k: int = 2, dims=None, normalize: bool = False):
        self.family = family
        self.param = param
        self.k = k
        self.dims = dims
        self.normalize = normalize

    def _spec(self) -> MeasureSpec:
        return MeasureSpec(self.family, self.param, self.k)

    def fit(self, X, y=None):
        _, dims = check_pure_batch(X, self.dims, self.normalize)
        self._spec().check_n(len(dims))
        return self._fit_layout(dims)

    def transform(self, X):
        check_is_fitted(self, "dims_")
        X, dims = check_pure_batch(X, self.dims_, self.normalize)
        vals, arg = k_me_values(X, dims, self._spec())
        self.argmin_ = arg
        return vals[:, None]


class SeparabilityDetector(_Fitted):
    """Matrix-element k-separability tests as a binary classifier.

    ``predict`` is 1 when the chosen test (``"ghz"``, ``"w"`` or ``"either"``)
    certifies k-nonseparability and 0 when it is silent. ``transform`` gives
    the separability degrees ``(k_eff1, k_eff2)``.
    """

    def __init__(self, k: int = 2, test: str = "either"):
        self.k = k
        self.test = test

    def fit(self, X, y=None):
        if self.test not in ("ghz", "w", "either"):
            raise ValueError(f"test must be 'ghz', 'w' or 'either', got {self.test!r}")
        rhos, dims = check_density_batch(X)
        if not 2 <= self.k <= len(dims):
            raise ValueError(f"need 2 <= k <= n, got k={self.k}, n={len(dims)}")
        self.classes_ = np.array([0, 1])
        return self._fit_layout(dims)

    def _terms(self, X):
        rhos, dims = check_density_batch(X)
        self._same_layout(dims)
        return [criterion_terms(r) for r in rhos]

    def predict(self, X):
        out = []
        for t in self._terms(X):
            g = ghz_margin(t, self.k) > VIOLATION_TOL
            w = w_margin(t, self.k) > VIOLATION_TOL
            out.append({"ghz": g, "w": w, "either": g or w}[self.test])
        return np.array(out, dtype=int)

    def transform(self, X):
        return np.array([k_eff_from_terms(t) for t in self._terms(X)])

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)


class NegativityBounds(TransformerMixin, _Fitted):
    """Certified lower bounds as columns, one per name in ``bounds``.

    A bound whose regime does not cover the parameters yields NaN.
    """

    def __init__(self, bounds: Sequence[str] = ("qn-qubit", "qn-improved", "alpha-n"), q: float = 3.0,
                 alpha: float = 0.5):
        self.bounds = bounds
        self.q = q
        self.alpha = alpha

    def fit(self, X, y=None):
        unknown = [b for b in self.bounds if b not in BOUNDS]
        if unknown:
            raise ValueError(f"unknown bounds {unknown}; choose from {', '.join(BOUNDS)}")
        if any(b in ("q-bipartite", "wei-bipartite") for b in self.bounds):
            raise ValueError("bipartite bounds need a cut; call them directly")
        _, dims = check_density_batch(X)
        return self._fit_layout(dims)

    def transform(self, X):
        rhos, dims = check_density_batch(X)
        self._same_layout(dims)
        out = np.full((len(rhos), len(self.bounds)), np.nan)
        for i, rho in enumerate(rhos):
            for j, name in enumerate(self.bounds):
                params = {"alpha": self.alpha} if name == "alpha-n" else {"q": self.q}
                try:
                    out[i, j] = BOUNDS[name](rho, **params).value
                except RegimeError:
                    pass
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(list(self.bounds), dtype=object)
