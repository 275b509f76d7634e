"""One-dimensional FFTs, trigonometric polynomials and lattice reconstruction.

Every transform here acts along the last axis. ``fft`` handles arbitrary
lengths (the lattice sizes used are prime) with Bluestein's chirp-z
algorithm on top of a power-of-two Cooley-Tukey transform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .freqset import FrequencySet
from .lattice import MultipleRank1Lattice, Rank1Lattice, lattice_hash, partition, residues

_NAIVE_CHUNK = 64
_EVAL_CHUNK_ELEMENTS = 2**22


def dft_naive(v) -> np.ndarray:
    """Direct ``O(M^2)`` evaluation of ``g_t = sum_j v_j exp(-2 pi i j t / M)``."""
    v = np.asarray(v, dtype=complex)
    M = v.shape[-1]
    if M < 1:
        raise ValueError("dft_naive needs a vector of length >= 1")
    roots = np.exp(-2j * np.pi * np.arange(M) / M)
    j = np.arange(M, dtype=np.int64)
    out = np.empty_like(v)
    half = M // 2
    vc = v.conj()
    # row t0 + k of the DFT matrix is row t0 times row k
    block_t = roots[(j[:min(_NAIVE_CHUNK, half + 1), None] * j[None, :]) % M].T.copy()
    # row M - t of the DFT matrix is the conjugate of row t
    for start in range(0, half + 1, _NAIVE_CHUNK):
        t = j[start:min(start + _NAIVE_CHUNK, half + 1)]
        base = roots[(start * j) % M]
        W = block_t[:, :len(t)]
        out[..., t] = (v * base) @ W
        # rows t with 0 < t < M - half also give row M - t
        lo, hi = max(1, start), min(t[-1] + 1, M - half)
        if lo < hi:
            out[..., M - j[lo:hi]] = ((vc * base) @ W[:, lo - start:hi - start]).conj()
    return out


_LEAF = 64


@lru_cache(maxsize=None)
def _dft_matrix(n: int) -> np.ndarray:
    j = np.arange(n, dtype=np.int64)
    return np.exp(-2j * np.pi * ((j[:, None] * j[None, :]) % n) / n)


@lru_cache(maxsize=None)
def _twiddles(n1: int, n2: int) -> np.ndarray:
    n = n1 * n2
    return np.exp(-2j * np.pi * ((np.arange(n2)[:, None] * np.arange(n1)[None, :]) % n) / n)


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    """Power-of-two FFT along the last axis by recursive four-step splitting.

    With ``n = n1 n2`` and ``j = n2 j1 + j2``, length-``n1`` transforms over
    ``j1`` are followed by twiddles ``w^(j2 k1)`` and length-``n2`` transforms
    over ``j2``; output index ``k1 + n1 k2``. Leaves of length ``<= 64`` are
    dense matrix products.
    """
    n = x.shape[-1]
    if n <= _LEAF:
        return x @ _dft_matrix(n)
    n1 = 1 << ((n.bit_length() - 1) // 2)
    n2 = n // n1
    lead = x.shape[:-1]
    b = _fft_pow2(np.swapaxes(x.reshape(lead + (n1, n2)), -1, -2))
    b *= _twiddles(n1, n2)
    c = _fft_pow2(np.swapaxes(b, -1, -2))
    return np.swapaxes(c, -1, -2).reshape(lead + (n,))


def fft(v) -> np.ndarray:
    """Unnormalised forward DFT of arbitrary length along the last axis.

    Lengths that are powers of two use the four-step transform directly; any
    other length ``M`` is embedded as a cyclic convolution of power-of-two
    length ``K >= 2M - 1`` (Bluestein). The chirp phases ``pi j^2 / M`` are
    formed from ``j^2 mod 2M`` to keep them accurate for large ``M``.
    """
    v = np.asarray(v, dtype=complex)
    M = v.shape[-1]
    if M < 1:
        raise ValueError("fft needs a vector of length >= 1")
    if M & (M - 1) == 0:
        return _fft_pow2(v)
    K = 1 << (2 * M - 2).bit_length()
    j = np.arange(M, dtype=np.int64)
    chirp = np.exp(-1j * np.pi * ((j * j) % (2 * M)) / M)
    a = np.zeros(v.shape[:-1] + (K,), dtype=complex)
    a[..., :M] = v * chirp
    b = np.zeros(K, dtype=complex)
    b[:M] = chirp.conj()
    b[K - M + 1:] = chirp[1:][::-1].conj()
    conv = _ifft_pow2(_fft_pow2(a) * _fft_pow2(b)) / K
    return chirp * conv[..., :M]


def _ifft_pow2(x: np.ndarray) -> np.ndarray:
    return _fft_pow2(x.conj()).conj()


def ifft(v) -> np.ndarray:
    """Unnormalised inverse DFT ``v_j = sum_t a_t exp(+2 pi i j t / M)``."""
    v = np.asarray(v, dtype=complex)
    return fft(v.conj()).conj()


def evaluate_exponentials(freqs: np.ndarray, coeffs: np.ndarray, x) -> np.ndarray:
    """``sum_h c_h exp(2 pi i h.x)`` at every row of ``x``.

    ``coeffs`` may be ``(n,)`` or ``(n, k)``; the result is ``(m,)`` or
    ``(m, k)``. Points are processed in chunks to bound memory.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    freqs = np.asarray(freqs, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    if x.shape[1] != freqs.shape[1]:
        raise ValueError(f"points have dimension {x.shape[1]}, frequencies {freqs.shape[1]}")
    out = np.empty((len(x),) + coeffs.shape[1:], dtype=complex)
    step = max(1, _EVAL_CHUNK_ELEMENTS // max(1, len(freqs)))
    for start in range(0, len(x), step):
        phase = x[start:start + step] @ freqs.T
        phase -= np.floor(phase)
        out[start:start + step] = np.exp(2j * np.pi * phase) @ coeffs
    return out


@dataclass
class TrigPolynomial:
    """Sparse trigonometric polynomial ``sum_h c_h exp(2 pi i h.x)``."""

    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=np.int64)
        if self.freqs.ndim != 2:
            raise ValueError("freqs must have shape (n, d)")
        self.coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if len(self.coeffs) != len(self.freqs):
            raise ValueError("coeffs must be parallel to freqs")

    @property
    def d(self) -> int:
        return self.freqs.shape[1]

    def __len__(self) -> int:
        return len(self.coeffs)

    @classmethod
    def from_mapping(cls, coeffs: Mapping[tuple, complex], d: int | None = None) -> "TrigPolynomial":
        keys = list(coeffs)
        if not keys:
            if d is None:
                raise ValueError("dimension required for the zero polynomial")
            return cls(np.zeros((0, d), dtype=np.int64), np.zeros(0, dtype=complex))
        return cls(np.array(keys, dtype=np.int64).reshape(len(keys), -1),
                   np.array([coeffs[k] for k in keys], dtype=complex))

    def to_mapping(self) -> dict[tuple, complex]:
        out: dict[tuple, complex] = {}
        for h, c in zip(self.freqs.tolist(), self.coeffs.tolist()):
            key = tuple(h)
            out[key] = out.get(key, 0.0) + c
        return out

    def canonical(self) -> "TrigPolynomial":
        """Merge repeated frequencies and drop exact zeros."""
        mapping = {k: c for k, c in self.to_mapping().items() if c != 0}
        return TrigPolynomial.from_mapping(mapping, d=self.d)

    def coefficient(self, h) -> complex:
        return self.to_mapping().get(tuple(int(v) for v in h), 0j)

    def __call__(self, x) -> np.ndarray:
        return evaluate_exponentials(self.freqs, self.coeffs, x)

    def _combine(self, other: "TrigPolynomial", sign: float) -> "TrigPolynomial":
        if other.d != self.d:
            raise ValueError("dimension mismatch")
        mapping = self.to_mapping()
        for key, c in other.to_mapping().items():
            mapping[key] = mapping.get(key, 0j) + sign * c
        return TrigPolynomial.from_mapping(mapping, d=self.d)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scalar):
        return TrigPolynomial(self.freqs.copy(), self.coeffs * scalar)

    __rmul__ = __mul__

    def to_json_dict(self) -> dict:
        return {
            "d": self.d,
            "coeffs": [
                {"h": h, "re": c.real, "im": c.imag}
                for h, c in zip(self.freqs.tolist(), self.coeffs.tolist())
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TrigPolynomial":
        d = int(data["d"])
        items = data["coeffs"]
        freqs = np.array([item["h"] for item in items], dtype=np.int64).reshape(len(items), d)
        coeffs = np.array([complex(item["re"], item.get("im", 0.0)) for item in items])
        return cls(freqs, coeffs)


def bucket_sums(p: TrigPolynomial, lat: Rank1Lattice, compensated: bool = False) -> np.ndarray:
    """``a_t = sum_{h : h.z = t mod M} c_h`` for ``t = 0..M-1``.

    Accumulates in the order of ``p.freqs``; ``compensated=True`` switches to
    correctly rounded per-bucket sums.
    """
    res = residues(lat, p.freqs)
    if not compensated:
        re = np.bincount(res, weights=p.coeffs.real, minlength=lat.M)
        im = np.bincount(res, weights=p.coeffs.imag, minlength=lat.M)
        return re + 1j * im
    out = np.zeros(lat.M, dtype=complex)
    order = np.argsort(res, kind="stable")
    res_sorted = res[order]
    bounds = np.flatnonzero(np.diff(res_sorted)) + 1
    for group in np.split(order, bounds):
        if len(group):
            t = res[group[0]]
            out[t] = complex(math.fsum(p.coeffs.real[group]), math.fsum(p.coeffs.imag[group]))
    return out


def evaluate_on_lattice(p: TrigPolynomial, lat: Rank1Lattice, compensated: bool = False) -> np.ndarray:
    """Values ``p(j z / M)`` for ``j = 0..M-1``.

    Coefficients are scattered onto their residue buckets and a single
    inverse FFT of length ``M`` produces all node values.
    """
    if p.d != lat.d:
        raise ValueError(f"polynomial dimension {p.d} does not match lattice dimension {lat.d}")
    return ifft(bucket_sums(p, lat, compensated))


@dataclass
class LatticeSamples:
    """Function values on each rank-1 lattice, ``values[l][j] = f(j z_l / M_l)``."""

    values: list[np.ndarray]
    lattice_hash: str | None = None

    def __post_init__(self):
        self.values = [np.asarray(v, dtype=complex) for v in self.values]

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray],
                      lattices: Sequence[Rank1Lattice] | MultipleRank1Lattice) -> "LatticeSamples":
        """Evaluate a node callback ``func(points) -> values`` on every lattice."""
        lattices = _lattice_list(lattices)
        values = []
        for lat in lattices:
            vals = np.asarray(func(lat.nodes()), dtype=complex).reshape(-1)
            if len(vals) != lat.M:
                raise ValueError(f"callback returned {len(vals)} values for {lat.M} nodes")
            values.append(vals)
        return cls(values, lattice_hash(lattices))

    @classmethod
    def from_polynomial(cls, p: TrigPolynomial,
                        lattices: Sequence[Rank1Lattice] | MultipleRank1Lattice) -> "LatticeSamples":
        """Exact samples of a trigonometric polynomial via :func:`evaluate_on_lattice`."""
        lattices = _lattice_list(lattices)
        return cls([evaluate_on_lattice(p, lat) for lat in lattices], lattice_hash(lattices))

    def check_against(self, lattices, origin_rtol: float = 1e-12) -> None:
        """Raise ValueError on length or origin-value inconsistencies."""
        lattices = _lattice_list(lattices)
        if len(self.values) != len(lattices):
            raise ValueError(f"{len(self.values)} sample vectors for {len(lattices)} lattices")
        for ell, (vals, lat) in enumerate(zip(self.values, lattices)):
            if vals.shape[-1] != lat.M:
                raise ValueError(f"sample vector {ell} has length {vals.shape[-1]}, lattice size is {lat.M}")
        if self.lattice_hash is not None and self.lattice_hash != lattice_hash(lattices):
            raise ValueError("samples were taken on a different lattice")
        if len(self.values) > 1:
            origin = np.array([vals[..., 0] for vals in self.values])
            scale = max(1.0, max(float(np.max(np.abs(v))) for v in self.values))
            spread = float(np.max(np.abs(origin - origin[0])))
            if spread > origin_rtol * scale:
                raise ValueError(f"origin samples disagree across lattices (spread {spread:.3e})")

    def to_json_dict(self) -> dict:
        return {
            "lattice_hash": self.lattice_hash,
            "samples": [[[float(c.real), float(c.imag)] for c in vals] for vals in self.values],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "LatticeSamples":
        values = [np.array([complex(re, im) for re, im in vals]) for vals in data["samples"]]
        return cls(values, data.get("lattice_hash"))

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict()) + "\n")

    @classmethod
    def read(cls, path) -> "LatticeSamples":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _lattice_list(lattices) -> list[Rank1Lattice]:
    if isinstance(lattices, MultipleRank1Lattice):
        return list(lattices.lattices)
    return list(lattices)


def _resolve_partition(mlat: MultipleRank1Lattice, I: FrequencySet | None) -> MultipleRank1Lattice:
    if I is None or I is mlat.target:
        return mlat
    if len(I) == len(mlat.target) and np.array_equal(I.freqs, mlat.target.freqs):
        return mlat
    return partition(mlat.lattices, I)


def reconstruct_coefficients(values: Sequence[np.ndarray], mlat: MultipleRank1Lattice) -> np.ndarray:
    """Approximate Fourier coefficients for every frequency of ``mlat.target``.

    ``values[l]`` has shape ``(..., M_l)``; leading axes are treated as a
    batch and the result has shape ``(..., |I|)``. Each coefficient is read
    from the length-``M_l`` FFT of its own lattice at its residue and divided
    by ``M_l``.
    """
    if not mlat.is_complete:
        missing = len(mlat.target) - mlat.covered_count
        raise ValueError(f"lattice does not reconstruct the frequency set ({missing} frequencies uncovered)")
    if len(values) != mlat.L:
        raise ValueError(f"{len(values)} sample vectors for {mlat.L} lattices")
    lead = np.asarray(values[0]).shape[:-1]
    out = np.zeros(lead + (len(mlat.target),), dtype=complex)
    for ell, (lat, idx) in enumerate(zip(mlat.lattices, mlat.partition)):
        vals = np.asarray(values[ell], dtype=complex)
        if vals.shape[-1] != lat.M:
            raise ValueError(f"sample vector {ell} has length {vals.shape[-1]}, lattice size is {lat.M}")
        if len(idx) == 0:
            continue
        g = fft(vals)
        t = residues(lat, mlat.target.freqs[idx])
        out[..., idx] = g[..., t] / lat.M
    return out


def reconstruct(samples: LatticeSamples, mlat: MultipleRank1Lattice,
                I: FrequencySet | None = None) -> TrigPolynomial:
    """Approximant supported on ``I`` computed from lattice samples.

    Parameters
    ----------
    samples : LatticeSamples
        One vector per lattice, in lattice order.
    mlat : MultipleRank1Lattice
        Must reconstruct ``I``; its stored partition is used.
    I : FrequencySet, optional
        Defaults to ``mlat.target``. A different set triggers a fresh
        partition.

    Raises
    ------
    ValueError
        If the lattice leaves frequencies of ``I`` uncovered, or the sample
        vectors do not match the lattice sizes.
    """
    mlat = _resolve_partition(mlat, I)
    samples.check_against(mlat.lattices)
    coeffs = reconstruct_coefficients(samples.values, mlat)
    return TrigPolynomial(mlat.target.freqs.copy(), coeffs)
