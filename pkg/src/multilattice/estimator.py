"""scikit-learn style front end for lattice sampling and reconstruction."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .freqset import FrequencySet, WeightSpec, build_AdN, build_In
from .lattice import ConstructionOptions, MultipleRank1Lattice, construct
from .spectral import TrigPolynomial, evaluate_exponentials, reconstruct_coefficients


def check_weight_params(alpha, gamma) -> WeightSpec:
    """Validate smoothness and weights, returning a :class:`WeightSpec`."""
    gamma = np.asarray(gamma, dtype=float).reshape(-1)
    if gamma.size == 0:
        raise ValueError("gamma must contain at least one weight")
    return WeightSpec(float(alpha), tuple(gamma.tolist()))


def check_points(X, d: int) -> np.ndarray:
    """2-D float array of points with ``d`` columns."""
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != d:
        raise ValueError(f"X has {X.shape[1]} features, expected {d}")
    return X


class LatticeApproximator(RegressorMixin, BaseEstimator):
    """Approximate a periodic function from samples on a multiple rank-1 lattice.

    The sampling design is fixed by the parameters: the frequency set is
    either ``A_d(N)`` or the ``n_frequencies`` lowest-weight frequencies, and
    the lattice is drawn with ``random_state``. Call :meth:`design_points` to
    obtain the nodes, evaluate the target there, then :meth:`fit`.

    Parameters
    ----------
    alpha : float, default=2.0
        Smoothness, must exceed 1.
    gamma : sequence of float, default=(1.0, 1.0)
        Coordinate weights in (0, 1], non-increasing; its length is the dimension.
    N : float, optional
        Level of the frequency set ``A_d(N)``. Defaults to 16 when
        ``n_frequencies`` is not given.
    n_frequencies : int, optional
        Use the ``n_frequencies`` frequencies of smallest weight instead.
    random_state : int, default=0
        Seed of the lattice construction.
    max_retries : int, default=20

    Attributes
    ----------
    frequencies_ : FrequencySet
    lattice_ : MultipleRank1Lattice
    coef_ : ndarray of shape (n_frequencies,) or (n_outputs, n_frequencies)
    polynomial_ : TrigPolynomial
        Approximant of the first output.
    n_features_in_ : int
    """

    def __init__(self, alpha=2.0, gamma=(1.0, 1.0), N=None, n_frequencies=None,
                 random_state=0, max_retries=20):
        self.alpha = alpha
        self.gamma = gamma
        self.N = N
        self.n_frequencies = n_frequencies
        self.random_state = random_state
        self.max_retries = max_retries

    def _spec(self) -> WeightSpec:
        return check_weight_params(self.alpha, self.gamma)

    def _design(self) -> tuple[FrequencySet, MultipleRank1Lattice]:
        key = (self.alpha, tuple(np.atleast_1d(self.gamma)), self.N, self.n_frequencies,
               self.random_state, self.max_retries)
        cached = getattr(self, "_design_cache", None)
        if cached is not None and cached[0] == key:
            return cached[1]
        spec = self._spec()
        if self.N is not None and self.n_frequencies is not None:
            raise ValueError("set at most one of N and n_frequencies")
        if self.n_frequencies is not None:
            if int(self.n_frequencies) < 1:
                raise ValueError("n_frequencies must be positive")
            I = build_In(spec, int(self.n_frequencies) + 1)
        else:
            I = build_AdN(spec, 16.0 if self.N is None else float(self.N))
        mlat = construct(I, seed=int(self.random_state),
                         opts=ConstructionOptions(max_retries=int(self.max_retries)))
        self._design_cache = (key, (I, mlat))
        return I, mlat

    def design_points(self) -> np.ndarray:
        """Sampling nodes of all lattices, stacked in lattice order."""
        _, mlat = self._design()
        return np.vstack([lat.nodes() for lat in mlat.lattices])

    def fit(self, X, y):
        """Reconstruct Fourier coefficients from values ``y`` at ``X = design_points()``.

        ``y`` may be real or complex, of shape ``(n_samples,)`` or
        ``(n_samples, n_outputs)``.
        """
        I, mlat = self._design()
        X = check_points(X, I.d)
        nodes = np.vstack([lat.nodes() for lat in mlat.lattices])
        if X.shape != nodes.shape or not np.allclose(X, nodes, rtol=0.0, atol=1e-12):
            raise ValueError("X must be the design points returned by design_points()")
        y = np.asarray(y)
        if y.shape[0] != len(X):
            raise ValueError(f"y has {y.shape[0]} rows, X has {len(X)}")
        if not np.all(np.isfinite(y)):
            raise ValueError("y contains NaN or infinity")
        self._y_is_real = not np.iscomplexobj(y)
        values = y.astype(complex).T
        split = np.cumsum(mlat.sizes)[:-1]
        parts = np.split(values, split, axis=-1)
        self.coef_ = reconstruct_coefficients(parts, mlat)
        self.frequencies_ = I
        self.lattice_ = mlat
        first = self.coef_ if self.coef_.ndim == 1 else self.coef_[0]
        self.polynomial_ = TrigPolynomial(I.freqs.copy(), first)
        self.n_features_in_ = I.d
        return self

    def fit_function(self, func):
        """Sample ``func(points) -> values`` on the design and fit."""
        X = self.design_points()
        return self.fit(X, func(X))

    def predict(self, X):
        """Evaluate the approximant; the real part is returned for real targets."""
        check_is_fitted(self, "coef_")
        X = check_points(X, self.n_features_in_)
        out = evaluate_exponentials(self.frequencies_.freqs, self.coef_.T, X)
        return out.real if self._y_is_real else out
