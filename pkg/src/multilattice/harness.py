"""Convergence experiments: frequency set, lattice, samples, approximant, error."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .freqset import FrequencySet, WeightSpec, build_AdN, build_In, truncation_error, weights
from .korobov import (approximation_number, choose_rate, hr_norm, measurement_points,
                      sup_error, theorem_bound, wc_error_bound)
from .lattice import ConstructionError, ConstructionOptions, MultipleRank1Lattice, construct
from .spectral import LatticeSamples, TrigPolynomial, reconstruct

FORMAT_VERSION = 1
CSV_COLUMNS = ("N", "card", "L", "M", "sigma_tail", "bound", "err_measured", "a_n", "seconds")
ZOO_NAMES = ("unit-ball", "kernel-slice", "exp")


@dataclass
class ZooFunction:
    """A function known through its exact Fourier coefficients."""

    name: str
    coefficients: TrigPolynomial

    def __call__(self, x) -> np.ndarray:
        return self.coefficients(x)

    def sample(self, lattices) -> LatticeSamples:
        return LatticeSamples.from_polynomial(self.coefficients, lattices)


def zoo(name: str, spec: WeightSpec, **params) -> ZooFunction:
    """Look up a test function by name.

    Parameters
    ----------
    name : {"unit-ball", "kernel-slice", "exp"}
        ``unit-ball``: random polynomial on ``A_d(N)`` (``N``, ``seed``) with
        coefficients ``xi_h / r(h)``, ``xi`` complex Gaussian, rescaled to unit
        ``H_r`` norm. ``kernel-slice``: ``sum_{h in A_d(N)} e_h / r(h)`` with
        ``N`` defaulting to 4096. ``exp``: ``e^{2 pi i h0.x}`` for ``h0``.
    spec : WeightSpec
    """
    if name == "unit-ball":
        A = build_AdN(spec, float(params.get("N", 16.0)))
        rng = np.random.default_rng(params.get("seed", 0))
        xi = rng.standard_normal(len(A)) + 1j * rng.standard_normal(len(A))
        p = TrigPolynomial(A.freqs, xi / weights(spec, A.freqs))
        return ZooFunction(name, p * (1.0 / hr_norm(spec, p)))
    if name == "kernel-slice":
        A = build_AdN(spec, float(params.get("N", 4096.0)))
        return ZooFunction(name, TrigPolynomial(A.freqs, 1.0 / weights(spec, A.freqs)))
    if name == "exp":
        h0 = np.asarray(params.get("h0", [0] * spec.d), dtype=np.int64).reshape(1, -1)
        if h0.shape[1] != spec.d:
            raise ValueError(f"h0 has dimension {h0.shape[1]}, expected {spec.d}")
        return ZooFunction(name, TrigPolynomial(h0, [1.0]))
    raise ValueError(f"unknown test function {name!r}; choose from {', '.join(ZOO_NAMES)}")


def gamma_from_rule(rule, d: int) -> tuple[float, ...]:
    """Weights from a list or a rule string ``power:p`` (``j^-p``) or ``geometric:rho`` (``rho^(j-1)``)."""
    if isinstance(rule, str):
        kind, _, value = rule.partition(":")
        value = float(value)
        if kind == "power":
            return tuple(float(j) ** (-value) for j in range(1, d + 1))
        if kind == "geometric":
            return tuple(value ** (j - 1) for j in range(1, d + 1))
        raise ValueError(f"unknown gamma rule {rule!r}")
    gamma = tuple(float(g) for g in rule)
    if len(gamma) != d:
        raise ValueError(f"{len(gamma)} weights given for d={d}")
    return gamma


@dataclass
class ExperimentConfig:
    """Everything that determines a convergence run.

    ``function_params`` are passed to :func:`zoo`; for ``unit-ball`` the
    support defaults to ``A_d(support_factor * N)`` per row and ``count``
    functions with seeds ``seed, seed + 1, ...`` are measured.
    """

    d: int = 2
    alpha: float = 2.0
    gamma: list | str = field(default_factory=lambda: [1.0, 1.0])
    N_schedule: list = field(default_factory=lambda: [4, 16, 64, 256])
    seed: int = 0
    function: str = "unit-ball"
    function_params: dict = field(default_factory=dict)
    count: int = 1
    support_factor: float = 4.0
    tau: float | None = None
    grid: int = 64
    grid_max_d: int = 2
    n_lowdisc: int = 100_000
    n_random: int = 10_000
    max_retries: int = 20
    timing: bool = False
    csv_path: str | None = None
    json_path: str | None = None

    def spec(self) -> WeightSpec:
        return WeightSpec(self.alpha, gamma_from_rule(self.gamma, self.d))

    def resolved_tau(self) -> float:
        if self.tau is not None:
            return float(self.tau)
        return choose_rate(self.alpha, self.alpha, (self.alpha - 1.0) / 4.0).tau

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def read(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class ConvergenceRecord:
    rows: list[dict]
    slope: float | None
    config: dict
    format_version: int = FORMAT_VERSION

    @property
    def failed(self) -> list[dict]:
        return [r for r in self.rows if r["status"] == "failed"]

    def violations(self) -> list[str]:
        """Invariant breaches: bound domination, monotone M and cardinality."""
        out = []
        ok = [r for r in self.rows if r["status"] == "ok"]
        for r in ok:
            if self.config["function"] == "unit-ball" and r["err_measured"] > r["bound"]:
                out.append(f"N={r['N']}: measured error {r['err_measured']:.3e} exceeds bound {r['bound']:.3e}")
        for prev, cur in zip(ok, ok[1:]):
            if cur["M"] <= prev["M"]:
                out.append(f"N={cur['N']}: node count {cur['M']} not above {prev['M']}")
            if cur["card"] < prev["card"]:
                out.append(f"N={cur['N']}: cardinality decreased")
        return out

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([_fmt(r.get(c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"format_version": self.format_version, "config": self.config,
                "slope": self.slope, "rows": self.rows}

    def write(self, csv_path=None, json_path=None) -> None:
        if csv_path:
            Path(csv_path).write_text(self.csv_text())
        if json_path:
            Path(json_path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def fit_slope(M, err, floor: float = 1e-12) -> float | None:
    """OLS slope of ``ln err`` against ``ln M`` over rows with ``err > floor``."""
    pts = [(math.log(m), math.log(e)) for m, e in zip(M, err) if e is not None and e > floor]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])


def _targets(cfg: ExperimentConfig, spec: WeightSpec, N: float) -> list[ZooFunction]:
    params = dict(cfg.function_params)
    if cfg.function == "unit-ball":
        params.setdefault("N", cfg.support_factor * N)
        base = params.pop("seed", cfg.seed)
        return [zoo("unit-ball", spec, seed=base + k, **params) for k in range(cfg.count)]
    return [zoo(cfg.function, spec, **params)]


def run_row(cfg: ExperimentConfig, spec: WeightSpec, N: float, points: np.ndarray,
            tau: float, targets: list[ZooFunction] | None = None) -> dict:
    start = time.perf_counter()
    A = build_AdN(spec, N)
    row = {"N": N, "card": len(A), "L": None, "M": None, "sigma_tail": truncation_error(spec, A),
           "bound": None, "err_measured": None, "a_n": approximation_number(spec, len(A) + 1),
           "seconds": None, "status": "ok"}
    try:
        mlat = construct(A, seed=cfg.seed, opts=ConstructionOptions(max_retries=cfg.max_retries))
    except ConstructionError as exc:
        row.update(status="failed", error=str(exc), attempts=exc.attempts)
        return row
    budget = wc_error_bound(mlat, spec)
    targets = targets if targets is not None else _targets(cfg, spec, N)
    errors = [f.coefficients - reconstruct(f.sample(mlat), mlat) for f in targets]
    err = sup_error(errors, points)
    row.update(L=mlat.L, M=budget.M, bound=budget.bound, err_measured=float(np.max(err)),
               theorem_bound=theorem_bound(spec, budget.M, tau), attempts=mlat.meta.get("attempts"))
    if cfg.timing:
        row["seconds"] = time.perf_counter() - start
    return row


def run_convergence(cfg: ExperimentConfig, progress: Callable[[dict], None] | None = None) -> ConvergenceRecord:
    """Run the configured schedule and collect one row per ``N``.

    Construction failures produce rows with ``status = "failed"`` and the
    retry log; the run continues with the next ``N``.
    """
    spec = cfg.spec()
    tau = cfg.resolved_tau()
    points = measurement_points(spec.d, seed=cfg.seed, grid=cfg.grid, grid_max_d=cfg.grid_max_d,
                                n_lowdisc=cfg.n_lowdisc, n_random=cfg.n_random)
    shared = None if cfg.function == "unit-ball" else _targets(cfg, spec, 0.0)
    rows = []
    for N in cfg.N_schedule:
        row = run_row(cfg, spec, N, points, tau, shared)
        rows.append(row)
        if progress is not None:
            progress(row)
    ok = [r for r in rows if r["status"] == "ok"]
    slope = fit_slope([r["M"] for r in ok], [r["err_measured"] for r in ok])
    config = asdict(cfg)
    config["tau_resolved"] = tau
    record = ConvergenceRecord(rows, slope, config)
    record.write(cfg.csv_path, cfg.json_path)
    return record
