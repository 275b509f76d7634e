"""Rank-1 and multiple rank-1 lattices.

A rank-1 lattice ``Lambda(z, M)`` is the node set ``{j z / M mod 1}``. A
frequency ``h`` aliases with ``k`` on it whenever ``h.z = k.z (mod M)``. A
list of lattices *reconstructs* a frequency set ``I`` when every element of
``I`` has a residue that no other element of ``I`` shares on at least one of
the lattices; the first such lattice is the one that recovers its
coefficient.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .freqset import FrequencySet

_INT64_SAFE_MODULUS = 3_000_000_000  # (M-1)^2 + M - 1 < 2^63


class ConstructionError(RuntimeError):
    """Randomized construction exhausted its retries.

    ``attempts`` holds one record per attempt: the attempt index, the number
    of covered frequencies and a few uncovered examples.
    """

    def __init__(self, message: str, attempts: list[dict]):
        super().__init__(message)
        self.attempts = attempts


@dataclass(frozen=True)
class Rank1Lattice:
    """Generating vector ``z`` (reduced mod ``M``) and lattice size ``M``."""

    z: tuple[int, ...]
    M: int

    def __post_init__(self):
        M = int(self.M)
        if M < 1:
            raise ValueError(f"lattice size must be positive, got {M}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "z", tuple(int(v) % M for v in np.atleast_1d(self.z)))

    @property
    def d(self) -> int:
        return len(self.z)

    def integer_nodes(self) -> np.ndarray:
        """Rows ``j z mod M`` for ``j = 0..M-1``."""
        j = np.arange(self.M, dtype=np.int64)
        if self.M < _INT64_SAFE_MODULUS:
            return (j[:, None] * np.array(self.z, dtype=np.int64)[None, :]) % self.M
        return np.array([[(jj * zz) % self.M for zz in self.z] for jj in range(self.M)], dtype=object)

    def nodes(self) -> np.ndarray:
        """Node coordinates in ``[0, 1)^d``, shape ``(M, d)``."""
        return self.integer_nodes().astype(float) / self.M

    def to_dict(self) -> dict:
        return {"z": list(self.z), "M": self.M}


def residues(lat: Rank1Lattice, I) -> np.ndarray:
    """``h.z mod M`` for every row of ``I``, free of integer overflow.

    Frequencies are reduced into ``[0, M)`` coordinate-wise and every partial
    sum is reduced again, so no intermediate exceeds ``(M-1)^2 + M - 1``.
    """
    freqs = I.freqs if isinstance(I, FrequencySet) else np.asarray(I, dtype=np.int64)
    if freqs.ndim == 1:
        freqs = freqs.reshape(1, -1)
    if freqs.shape[1] != lat.d:
        raise ValueError(f"frequency dimension {freqs.shape[1]} does not match lattice dimension {lat.d}")
    M = lat.M
    if M < _INT64_SAFE_MODULUS:
        acc = np.zeros(len(freqs), dtype=np.int64)
        for j, zj in enumerate(lat.z):
            acc = (acc + (freqs[:, j] % M) * zj) % M
        return acc
    out = []
    for row in freqs.tolist():
        acc = 0
        for hj, zj in zip(row, lat.z):
            acc = (acc + (hj % M) * zj) % M
        out.append(acc)
    return np.array(out, dtype=object)


def unique_residue_mask(res: np.ndarray) -> np.ndarray:
    """True where a residue occurs exactly once."""
    if len(res) == 0:
        return np.zeros(0, dtype=bool)
    _, inverse, counts = np.unique(res, return_inverse=True, return_counts=True)
    return counts[inverse.reshape(-1)] == 1


def reconstructible_subset(lat: Rank1Lattice, I: FrequencySet) -> FrequencySet:
    """Elements of ``I`` whose residue no other element of ``I`` shares."""
    mask = unique_residue_mask(residues(lat, I))
    w = I.weights[mask] if I.weights is not None else None
    return FrequencySet(I.freqs[mask], w, {"kind": "reconstructible", "lattice": lat.to_dict()})


@dataclass
class MultipleRank1Lattice:
    """Union of rank-1 lattices together with its partition of a target set.

    Attributes
    ----------
    lattices : list of Rank1Lattice
    target : FrequencySet
        The set ``I`` the partition refers to.
    partition : list of ndarray
        ``partition[l]`` holds the row indices (into ``target``) of ``I_l``.
    assignment : ndarray of int
        ``assignment[i]`` is the lattice index recovering row ``i``, or -1.
    meta : dict
        Construction record (seed, attempt log, prime window check).
    """

    lattices: list[Rank1Lattice]
    target: FrequencySet
    partition: list[np.ndarray]
    assignment: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def L(self) -> int:
        return len(self.lattices)

    @property
    def d(self) -> int:
        return self.target.d

    @property
    def sizes(self) -> list[int]:
        return [lat.M for lat in self.lattices]

    @property
    def covered(self) -> np.ndarray:
        """Boolean mask over ``target`` of frequencies in some ``I_l``."""
        return self.assignment >= 0

    @property
    def covered_count(self) -> int:
        return int(self.covered.sum())

    @property
    def is_complete(self) -> bool:
        return self.covered_count == len(self.target)

    def part(self, ell: int) -> FrequencySet:
        idx = self.partition[ell]
        w = self.target.weights[idx] if self.target.weights is not None else None
        return FrequencySet(self.target.freqs[idx], w)

    def node_count(self) -> int:
        return node_count(self.lattices)

    def to_dict(self, seed: int | None = None) -> dict:
        return lattice_dict(self.lattices, seed=self.meta.get("seed", seed),
                            covered_count=self.covered_count, d=self.d)


def partition(lattices: Sequence[Rank1Lattice], I: FrequencySet) -> MultipleRank1Lattice:
    """Split ``I`` into disjoint parts ``I_1, ..., I_L``.

    ``I_l`` collects the frequencies that are alias-free within ``I`` on
    lattice ``l`` and were not already claimed by an earlier lattice.
    Frequencies claimed by no lattice keep assignment -1.
    """
    lattices = list(lattices)
    for lat in lattices:
        if lat.d != I.d:
            raise ValueError(f"lattice dimension {lat.d} does not match frequency dimension {I.d}")
    assignment = np.full(len(I), -1, dtype=np.int64)
    parts = []
    for ell, lat in enumerate(lattices):
        fresh = unique_residue_mask(residues(lat, I)) & (assignment < 0)
        idx = np.flatnonzero(fresh)
        assignment[idx] = ell
        parts.append(idx)
    return MultipleRank1Lattice(lattices, I, parts, assignment)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n < 3.3e24."""
    n = int(n)
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime_in(lo: int, hi: int) -> int | None:
    """Smallest prime in ``[lo, hi]``, or None when the interval has none."""
    lo, hi = int(lo), int(hi)
    if not 2 <= lo <= hi:
        raise ValueError(f"need 2 <= lo <= hi, got lo={lo}, hi={hi}")
    for p in range(lo, hi + 1):
        if is_prime(p):
            return p
    return None


def node_count(lattices: Sequence[Rank1Lattice]) -> int:
    """Number of distinct nodes of the union of lattices."""
    lattices = list(lattices)
    if not lattices:
        return 0
    sizes = {lat.M for lat in lattices}
    if len(sizes) == 1 and is_prime(next(iter(sizes))):
        # Lattices of equal prime size are cyclic groups of prime order: two
        # of them coincide (when z' = c z mod P) or meet only at the origin.
        P = next(iter(sizes))
        classes = set()
        for lat in lattices:
            z = lat.z
            lead = next((v for v in z if v), 0)
            if lead == 0:
                continue
            inv = pow(lead, -1, P)
            classes.add(tuple(v * inv % P for v in z))
        return 1 + len(classes) * (P - 1)
    denom = math.lcm(*sizes)
    if denom < 2**62 // max(sizes):
        rows = [lat.integer_nodes().astype(np.int64) * (denom // lat.M) for lat in lattices]
        return int(len(np.unique(np.vstack(rows), axis=0)))
    nodes = set()
    for lat in lattices:
        for row in lat.integer_nodes().tolist():
            nodes.add(tuple(Fraction(int(v), lat.M) for v in row))
    return len(nodes)


@dataclass
class ConstructionOptions:
    """Knobs of the randomized construction.

    ``max_retries`` counts redraws after the first attempt. ``delta_max``
    caps the failure-probability parameter so its logarithm stays defined
    for very small sets.
    """

    max_retries: int = 20
    delta_max: float = 0.99


def lattice_count(cardinality: int, delta_max: float = 0.99) -> tuple[int, float]:
    """Number of lattices ``L = ceil(2 (ln|I| - ln delta))`` and ``delta``."""
    delta = min(math.sqrt(math.e / cardinality), delta_max)
    return max(1, math.ceil(2.0 * (math.log(cardinality) - math.log(delta)))), delta


def _distinct_mod(I: FrequencySet, P: int) -> bool:
    return len(np.unique(I.freqs % P, axis=0)) == len(I)


def choose_prime(I: FrequencySet) -> tuple[int, bool]:
    """Lattice size shared by all lattices of the construction.

    Returns the smallest prime ``P >= 2|I|`` under which the elements of
    ``I`` stay distinct when reduced coordinate-wise, and whether ``P`` lies
    in the window ``[2|I|, 3|I|]``. Outside the window is only possible for
    sets not of the form ``A(N)``.
    """
    n = len(I)
    lo, hi = max(2 * n, 2), 3 * n
    p = lo
    while True:
        if is_prime(p) and _distinct_mod(I, p):
            return p, p <= hi
        p += 1


def construct(I: FrequencySet, seed: int = 0,
              opts: ConstructionOptions | None = None) -> MultipleRank1Lattice:
    """Draw random generating vectors until the lattices reconstruct ``I``.

    All lattices share one prime size ``P`` from ``[2|I|, 3|I|]``; the
    number of lattices is ``ceil(2 (ln|I| - ln delta))`` with
    ``delta = sqrt(e / |I|)``. Each attempt draws all generating vectors
    uniformly from ``[0, P-1]^d`` with a generator seeded by
    ``(seed, attempt)``, so results are reproducible per attempt index.

    Raises
    ------
    ConstructionError
        When no attempt out of ``1 + opts.max_retries`` covers ``I``.
    """
    opts = opts or ConstructionOptions()
    n = len(I)
    if n < 1:
        raise ValueError("cannot construct a lattice for an empty frequency set")
    if I.has_duplicates():
        raise ValueError("frequency set contains duplicates")
    d = I.d
    if n == 1 and not I.freqs.any():
        mlat = partition([Rank1Lattice((1,) * d, 3)], I)
        mlat.meta.update(seed=int(seed), attempts=[{"attempt": 0, "covered": 1}],
                         delta=None, prime_in_window=True)
        return mlat

    L, delta = lattice_count(n, opts.delta_max)
    P, in_window = choose_prime(I)
    log = []
    for attempt in range(opts.max_retries + 1):
        rng = np.random.default_rng([int(seed), attempt])
        zs = rng.integers(0, P, size=(L, d))
        mlat = partition([Rank1Lattice(tuple(z), P) for z in zs], I)
        record = {"attempt": attempt, "covered": mlat.covered_count}
        if mlat.is_complete:
            log.append(record)
            mlat.meta.update(seed=int(seed), attempts=log, delta=delta, prime_in_window=in_window)
            _check_size_bounds(mlat, n, in_window)
            return mlat
        record["uncovered"] = [tuple(int(v) for v in h) for h in I.freqs[~mlat.covered][:5]]
        log.append(record)
    raise ConstructionError(
        f"no reconstructing lattice for |I|={n} after {len(log)} attempts (P={P}, L={L})", log
    )


def _check_size_bounds(mlat: MultipleRank1Lattice, n: int, in_window: bool) -> None:
    if n < 3 or not in_window:
        return
    log_n = math.log(n)
    if mlat.L > 3.0 * log_n:
        raise RuntimeError(f"L={mlat.L} exceeds 3 ln|I| = {3.0 * log_n}")
    nodes = mlat.node_count()
    if not 2 * n < nodes < 9 * n * max(log_n, 1.0):
        raise RuntimeError(f"node count {nodes} outside (2|I|, 9|I| max(ln|I|, 1))")


@dataclass
class VerificationReport:
    ok: bool
    covered: bool
    disjoint: bool
    L: int
    part_sizes: list[int]
    node_count: int
    uncovered: list[tuple[int, ...]]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "covered": self.covered,
            "disjoint": self.disjoint,
            "L": self.L,
            "part_sizes": self.part_sizes,
            "node_count": self.node_count,
            "uncovered": [list(h) for h in self.uncovered],
        }


def verify(lattices, I: FrequencySet) -> VerificationReport:
    """Recompute the partition from scratch and report on it."""
    if isinstance(lattices, MultipleRank1Lattice):
        lattices = lattices.lattices
    lattices = list(lattices)
    mlat = partition(lattices, I)
    sizes = [len(p) for p in mlat.partition]
    union = np.concatenate(mlat.partition) if sizes else np.zeros(0, dtype=np.int64)
    disjoint = len(np.unique(union)) == len(union)
    covered = mlat.is_complete
    uncovered = [tuple(int(v) for v in h) for h in I.freqs[~mlat.covered]]
    return VerificationReport(
        ok=bool(covered and disjoint),
        covered=bool(covered),
        disjoint=bool(disjoint),
        L=len(lattices),
        part_sizes=sizes,
        node_count=node_count(lattices),
        uncovered=uncovered,
    )


def lattice_dict(lattices: Sequence[Rank1Lattice], seed=None, covered_count=None, d=None) -> dict:
    lattices = list(lattices)
    if d is None:
        d = lattices[0].d if lattices else 0
    return {
        "d": d,
        "L": len(lattices),
        "lattices": [lat.to_dict() for lat in lattices],
        "seed": seed,
        "covered_count": covered_count,
    }


def lattice_hash(lattices: Sequence[Rank1Lattice]) -> str:
    """Stable digest of the generating vectors and sizes."""
    payload = json.dumps([lat.to_dict() for lat in lattices], separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def write_lattice(mlat_or_lattices, path, seed=None) -> None:
    if isinstance(mlat_or_lattices, MultipleRank1Lattice):
        data = mlat_or_lattices.to_dict(seed)
    else:
        data = lattice_dict(mlat_or_lattices, seed=seed)
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def read_lattice(path) -> tuple[list[Rank1Lattice], dict]:
    """Return the lattices stored in a JSON lattice file and the raw record."""
    data = json.loads(Path(path).read_text())
    lattices = [Rank1Lattice(tuple(item["z"]), int(item["M"])) for item in data["lattices"]]
    if data.get("L") is not None and int(data["L"]) != len(lattices):
        raise ValueError(f"{path}: L={data['L']} but {len(lattices)} lattices listed")
    for lat in lattices:
        if lat.d != int(data["d"]):
            raise ValueError(f"{path}: lattice dimension {lat.d} does not match d={data['d']}")
    return lattices, data
