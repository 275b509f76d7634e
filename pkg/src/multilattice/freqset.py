"""Product weights and the frequency sets they induce.

The weight of a frequency ``h`` in Z^d is

    r(h) = prod_j max(1, |h_j|^alpha / gamma_j),

and the two families of index sets built here are the sublevel sets
``A(N) = {h : r(h) <= N}`` and the sets ``I^n`` holding the ``n - 1``
frequencies of smallest weight.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .zeta import zeta

DEFAULT_MAX_VISITS = 10**8


class EnumerationLimitError(ValueError):
    """Raised when enumerating a frequency set would exceed the visit cap."""


@dataclass(frozen=True)
class WeightSpec:
    """Smoothness ``alpha`` and product weights ``gamma`` of a Korobov space.

    Parameters
    ----------
    alpha : float
        Smoothness, must exceed 1.
    gamma : sequence of float
        Coordinate weights with ``1 >= gamma[0] >= ... >= gamma[d-1] > 0``.
    """

    alpha: float
    gamma: tuple[float, ...]

    def __post_init__(self):
        gamma = tuple(float(g) for g in np.atleast_1d(np.asarray(self.gamma, dtype=float)))
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "alpha", float(self.alpha))
        if not self.alpha > 1.0:
            raise ValueError(f"alpha must be > 1, got {self.alpha}")
        if len(gamma) == 0:
            raise ValueError("gamma must hold at least one weight")
        if not all(g > 0.0 for g in gamma):
            raise ValueError("weights gamma must be positive")
        if gamma[0] > 1.0 or any(a < b for a, b in zip(gamma, gamma[1:])):
            raise ValueError("weights must satisfy 1 >= gamma_1 >= ... >= gamma_d > 0")

    @property
    def d(self) -> int:
        return len(self.gamma)

    @property
    def key(self) -> str:
        """Short stable hash identifying the parameters."""
        text = f"alpha={self.alpha!r};gamma={','.join(repr(g) for g in self.gamma)}"
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def full_sum(self) -> float:
        """Sum of ``1/r(h)`` over all of Z^d."""
        z = zeta(self.alpha)
        return math.prod(1.0 + 2.0 * g * z for g in self.gamma)


@dataclass
class FrequencySet:
    """Ordered finite subset of Z^d.

    ``freqs`` is an ``(n, d)`` integer array. ``weights`` holds ``r(h)`` for
    each row when the set was generated from a :class:`WeightSpec`; sets read
    from arbitrary sources may carry ``weights=None``.
    """

    freqs: np.ndarray
    weights: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.int64)
        if freqs.ndim == 1:
            freqs = freqs.reshape(-1, 1) if freqs.size else freqs.reshape(0, 1)
        if freqs.ndim != 2:
            raise ValueError("freqs must be a 2-d array of shape (n, d)")
        self.freqs = freqs
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != (len(freqs),):
                raise ValueError("weights must be parallel to freqs")
        self._index = None

    def __len__(self) -> int:
        return self.freqs.shape[0]

    def __iter__(self):
        return (tuple(int(v) for v in row) for row in self.freqs)

    def __contains__(self, h) -> bool:
        return self.index_of(h) is not None

    @property
    def d(self) -> int:
        return self.freqs.shape[1]

    def index_of(self, h) -> int | None:
        if self._index is None:
            self._index = {tuple(row): i for i, row in enumerate(self.freqs.tolist())}
        return self._index.get(tuple(int(v) for v in h))

    def as_set(self) -> set[tuple[int, ...]]:
        return {tuple(row) for row in self.freqs.tolist()}

    def has_duplicates(self) -> bool:
        return len(np.unique(self.freqs, axis=0)) != len(self)

    @classmethod
    def from_iterable(cls, freqs: Iterable[Sequence[int]], d: int | None = None,
                      spec: WeightSpec | None = None, meta: dict | None = None) -> "FrequencySet":
        rows = [tuple(int(v) for v in h) for h in freqs]
        if not rows:
            if d is None and spec is None:
                raise ValueError("dimension required for an empty set")
            arr = np.zeros((0, spec.d if spec is not None else d), dtype=np.int64)
        else:
            arr = np.array(rows, dtype=np.int64)
        w = weights(spec, arr) if spec is not None else None
        return cls(arr, w, dict(meta or {}))


def _coordinate_factor(h: np.ndarray, alpha: float, gamma_j: float) -> np.ndarray:
    return np.maximum(1.0, np.abs(h).astype(float) ** alpha / gamma_j)


def weights(spec: WeightSpec, freqs) -> np.ndarray:
    """Vectorised :func:`weight` over the rows of an ``(n, d)`` array.

    The product is accumulated left to right over coordinates, the same order
    used during enumeration, so membership tests agree bit for bit.
    """
    h = np.asarray(freqs, dtype=np.int64)
    if h.ndim == 1:
        h = h.reshape(1, -1)
    if h.shape[1] != spec.d:
        raise ValueError(f"frequency dimension {h.shape[1]} does not match spec.d={spec.d}")
    w = np.ones(h.shape[0])
    for j, g in enumerate(spec.gamma):
        w = w * _coordinate_factor(h[:, j], spec.alpha, g)
    return w


def weight(spec: WeightSpec, h) -> float:
    """Weight ``r(h)`` of a single frequency vector."""
    return float(weights(spec, np.asarray(h, dtype=np.int64).reshape(1, -1))[0])


def canonical_order(freqs: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Permutation sorting by weight, then max-norm, then lexicographically."""
    freqs = np.asarray(freqs)
    if len(freqs) == 0:
        return np.zeros(0, dtype=np.intp)
    linf = np.abs(freqs).max(axis=1)
    keys = [freqs[:, j] for j in range(freqs.shape[1] - 1, -1, -1)]
    return np.lexsort(keys + [linf, w])


def box_radius(spec: WeightSpec, N: float) -> int:
    """Coordinate bound ``floor((gamma_1 N)^(1/alpha))`` of ``A(N)``."""
    b = int(math.floor((spec.gamma[0] * N) ** (1.0 / spec.alpha)))
    # guard the floating root at exact integer boundaries
    while (b + 1) ** spec.alpha <= spec.gamma[0] * N:
        b += 1
    while b > 0 and b**spec.alpha > spec.gamma[0] * N:
        b -= 1
    return b


def _enumerate_sublevel(spec: WeightSpec, N: float, max_visits: int):
    rows = np.zeros((1, 0), dtype=np.int64)
    prod = np.ones(1)
    visits = 0
    for j, g in enumerate(spec.gamma):
        # per-row radius, one extra candidate absorbs rounding in the root
        radius = np.floor((g * N / prod) ** (1.0 / spec.alpha)).astype(np.int64) + 1
        counts = 2 * radius + 1
        visits += int(counts.sum())
        if visits > max_visits:
            raise EnumerationLimitError(
                f"enumeration of A(N) with N={N} exceeds {max_visits} candidate visits"
            )
        parent = np.repeat(np.arange(len(rows)), counts)
        starts = np.repeat(np.cumsum(counts) - counts, counts)
        values = np.arange(int(counts.sum()), dtype=np.int64) - starts - radius[parent]
        new_prod = prod[parent] * _coordinate_factor(values, spec.alpha, g)
        keep = new_prod <= N
        rows = np.column_stack([rows[parent[keep]], values[keep]])
        prod = new_prod[keep]
    return rows, prod


def build_AdN(spec: WeightSpec, N: float, max_visits: int = DEFAULT_MAX_VISITS) -> FrequencySet:
    """All frequencies with ``r(h) <= N``, in canonical weight order.

    Coordinates are expanded one at a time and a branch is dropped as soon as
    its partial product exceeds ``N`` (every remaining factor is >= 1).

    Raises
    ------
    ValueError
        If ``N < 1``.
    EnumerationLimitError
        If more than ``max_visits`` candidates would be generated.
    """
    N = float(N)
    if not N >= 1.0:
        raise ValueError(f"N must be >= 1, got {N}")
    rows, w = _enumerate_sublevel(spec, N, max_visits)
    order = canonical_order(rows, w)
    meta = {"kind": "AdN", "N": N, "spec": spec.key}
    return FrequencySet(rows[order], w[order], meta)


def build_In(spec: WeightSpec, n: int, max_visits: int = DEFAULT_MAX_VISITS) -> FrequencySet:
    """The ``n - 1`` frequencies of smallest weight.

    Ties at the cut weight are broken by max-norm and then lexicographically,
    which makes the set reproducible.
    """
    n = int(n)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    N = 1.0
    pool = build_AdN(spec, N, max_visits)
    while len(pool) < n - 1:
        N *= 2.0
        pool = build_AdN(spec, N, max_visits)
    meta = {"kind": "In", "n": n, "spec": spec.key}
    return FrequencySet(pool.freqs[: n - 1].copy(), pool.weights[: n - 1].copy(), meta)


def in_set_sum(spec: WeightSpec, I: FrequencySet) -> float:
    """``sum_{h in I} 1/r(h)``, correctly rounded."""
    if len(I) == 0:
        return 0.0
    return math.fsum((1.0 / weights(spec, I.freqs)).tolist())


def truncation_error(spec: WeightSpec, I: FrequencySet) -> float:
    """Worst-case truncation error ``sum_{h not in I} 1/r(h)``.

    Evaluated as the factorised full-lattice sum minus the in-set sum.
    """
    if len(I) and I.d != spec.d:
        raise ValueError("dimension of I does not match the weight spec")
    return spec.full_sum() - in_set_sum(spec, I)


def truncation_bound(spec: WeightSpec, cardinality: int, tau: float) -> float:
    """Upper bound on the truncation error of ``A(N)`` in terms of ``|A(N)|``."""
    tau = float(tau)
    if not (1.0 / spec.alpha < tau < 1.0):
        raise ValueError(f"tau must lie in (1/alpha, 1) = ({1.0 / spec.alpha}, 1), got {tau}")
    if cardinality < 1:
        raise ValueError("cardinality must be >= 1")
    z = zeta(spec.alpha * tau)
    prod = math.prod((1.0 + 2.0 * z * g**tau) ** (1.0 / tau) for g in spec.gamma)
    return cardinality ** (-(1.0 / tau - 1.0)) * (tau / (1.0 - tau)) * prod


def cardinality_bounds(spec: WeightSpec, N: float, q: float) -> tuple[float, float]:
    """Lower and upper bounds on ``|A(N)|``, valid for any ``q > 1/alpha``."""
    if not q > 1.0 / spec.alpha:
        raise ValueError("q must exceed 1/alpha")
    lower = (spec.gamma[0] * N) ** (1.0 / spec.alpha)
    z = zeta(spec.alpha * q)
    upper = N**q * math.prod(1.0 + 2.0 * z * g**q for g in spec.gamma)
    return lower, upper


def write_freqset(I: FrequencySet, path) -> None:
    """Write ``d=<d> count=<n>`` followed by one frequency per line."""
    lines = [f"d={I.d} count={len(I)}"]
    lines.extend(" ".join(str(int(v)) for v in row) for row in I.freqs)
    Path(path).write_text("\n".join(lines) + "\n")


def read_freqset(path, spec: WeightSpec | None = None) -> FrequencySet:
    text = Path(path).read_text().splitlines()
    if not text:
        raise ValueError(f"{path}: empty frequency-set file")
    header = dict(part.split("=", 1) for part in text[0].split())
    try:
        d, count = int(header["d"]), int(header["count"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: malformed header {text[0]!r}") from exc
    body = [line for line in text[1:] if line.strip()]
    if len(body) != count:
        raise ValueError(f"{path}: header announces {count} frequencies, found {len(body)}")
    arr = np.array([[int(v) for v in line.split()] for line in body], dtype=np.int64).reshape(count, d)
    if spec is not None and spec.d != d:
        raise ValueError(f"{path}: dimension {d} does not match spec.d={spec.d}")
    w = weights(spec, arr) if spec is not None else None
    return FrequencySet(arr, w, {"source": str(path)})
