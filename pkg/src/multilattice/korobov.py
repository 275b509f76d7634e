"""Error bounds, rate parameters and tractability constants in Korobov spaces."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .freqset import FrequencySet, WeightSpec, build_In, in_set_sum, truncation_error, weights
from .lattice import MultipleRank1Lattice, partition
from .spectral import TrigPolynomial, evaluate_exponentials
from .zeta import zeta

RATE_IDENTITY_TOL = 1e-12


class HypothesisViolation(ValueError):
    """Raised when a frequency set leaves the box a bound requires."""


@dataclass(frozen=True)
class RateParams:
    """Parameters giving the convergence rate ``M^{-t}``."""

    alpha: float
    alpha_tilde: float
    t: float
    delta: float
    tau: float
    epsilon: float

    @property
    def rate_exponent(self) -> float:
        """``(1 + delta)/2 - (1 - delta)/(2 tau)``, which equals ``-t``."""
        return (1.0 + self.delta) / 2.0 - (1.0 - self.delta) / (2.0 * self.tau)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rate_exponent"] = self.rate_exponent
        return out


@dataclass(frozen=True)
class ErrorBudget:
    """Worst-case error bound ``(L + 1) sqrt(wc_truncation)`` of a sampling set."""

    wc_truncation: float
    L: int
    bound: float
    M: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TractabilityConstant:
    """Constant in front of ``M^{-t}`` and its dimension-independent majorants.

    Attributes
    ----------
    constant : float
        The full constant for the given weights.
    weight_sum : float
        ``sum_j gamma_j^tau``.
    product : float
        ``prod_j (1 + 2 zeta(alpha tau) gamma_j^tau)^(1/(2 tau))``.
    product_majorant : float
        ``exp(zeta(alpha tau) weight_sum / tau)``, an upper bound for ``product``.
    dimension_free : float
        ``4 3^(at - 1) delta^(-(at + 1)/2) sqrt(2/(at - 1)) product_majorant`` with
        ``at = alpha_tilde``; bounds ``constant`` from above.
    S, beta, c_tilde : float, int, float or None
        Set in ``poly`` mode only: ``S = weight_sum / ln(d + 1)``,
        ``beta = ceil(zeta(alpha tau) S / tau)`` and ``c_tilde = 2^(zeta(alpha tau) S / tau)``.
    poly_constant : float or None
        ``c_tilde`` times the dimension-free prefactor (poly mode); the constant
        is bounded by ``poly_constant * d**beta``.
    """

    mode: str
    constant: float
    weight_sum: float
    product: float
    product_majorant: float
    dimension_free: float
    S: float | None = None
    beta: int | None = None
    c_tilde: float | None = None
    poly_constant: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _exp_or_inf(x: float) -> float:
    # majorants may exceed the float range for large weight sums
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _check_tau(spec: WeightSpec, tau: float) -> None:
    if not 1.0 / spec.alpha < tau < 1.0:
        raise ValueError(f"tau must lie in (1/alpha, 1) = ({1.0 / spec.alpha:.6g}, 1), got {tau}")


def _weight_product(spec: WeightSpec, tau: float) -> float:
    z = zeta(spec.alpha * tau)
    return math.exp(math.fsum(math.log1p(2.0 * z * g ** tau) for g in spec.gamma) / (2.0 * tau))


def wc_error_bound(mlat: MultipleRank1Lattice, spec: WeightSpec,
                   I: FrequencySet | None = None) -> ErrorBudget:
    """``(L + 1) sqrt(sum_{h not in I} 1/r(h))`` for a lattice that reconstructs ``I``."""
    if I is not None and not (len(I) == len(mlat.target) and np.array_equal(I.freqs, mlat.target.freqs)):
        mlat = partition(mlat.lattices, I)
    if not mlat.is_complete:
        missing = len(mlat.target) - mlat.covered_count
        raise ValueError(f"lattice does not reconstruct the frequency set ({missing} frequencies uncovered)")
    tail = truncation_error(spec, mlat.target)
    return ErrorBudget(tail, mlat.L, (mlat.L + 1) * math.sqrt(tail), mlat.node_count())


def theorem_bound(spec: WeightSpec, M: int, tau: float, delta: float | None = None) -> float:
    """Closed-form worst-case bound in terms of the number of samples ``M``.

    Without ``delta`` the logarithmic form
    ``4 3^(1/tau-1) (ln M)^((1+tau)/(2 tau)) M^((tau-1)/(2 tau)) sqrt(tau/(1-tau)) P``
    is returned, with ``P`` the weight product; with ``delta`` in (0, 1) the
    logarithm is replaced by ``M^delta / delta``.
    """
    _check_tau(spec, tau)
    if M < 3:
        raise ValueError(f"M must be at least 3, got {M}")
    base = 4.0 * 3.0 ** (1.0 / tau - 1.0) * math.sqrt(tau / (1.0 - tau)) * _weight_product(spec, tau)
    if delta is None:
        return base * math.log(M) ** ((1.0 + tau) / (2.0 * tau)) * M ** ((tau - 1.0) / (2.0 * tau))
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    exponent = (1.0 + delta) / 2.0 - (1.0 - delta) / (2.0 * tau)
    return base * delta ** (-(1.0 + tau) / (2.0 * tau)) * M ** exponent


def choose_rate(alpha: float, alpha_tilde: float, t: float) -> RateParams:
    """Pick ``(delta, tau)`` so the delta-form bound decays like ``M^{-t}``.

    ``delta`` is the smaller root of ``delta^2 - (2 + at) delta + eps = 0`` with
    ``eps = at - 1 - 2t``, and ``tau = 1/(at - delta)``.
    """
    if not 1.0 < alpha_tilde <= alpha:
        raise ValueError(f"alpha_tilde must lie in (1, alpha], got {alpha_tilde}")
    if not 0.0 < t < (alpha_tilde - 1.0) / 2.0:
        raise ValueError(f"t must lie in (0, {(alpha_tilde - 1.0) / 2.0:.6g}), got {t}")
    eps = alpha_tilde - 1.0 - 2.0 * t
    b = (2.0 + alpha_tilde) / 2.0
    # b - sqrt(b^2 - eps) without cancellation
    delta = eps / (b + math.sqrt(b * b - eps))
    tau = 1.0 / (alpha_tilde - delta)
    params = RateParams(alpha, alpha_tilde, t, delta, tau, eps)
    if abs(params.rate_exponent + t) > RATE_IDENTITY_TOL:
        raise ArithmeticError(f"rate identity off by {params.rate_exponent + t:.3e}")
    if not (0.0 < delta < min(1.0, (alpha_tilde - 1.0) / 2.0)
            and 1.0 / alpha_tilde < tau < 2.0 / (alpha_tilde + 1.0)):
        raise ArithmeticError(f"rate parameters out of range: delta={delta}, tau={tau}")
    return params


def tractability_constant(spec: WeightSpec, params: RateParams, mode: str = "strong") -> TractabilityConstant:
    """Constant ``c`` of the bound ``c M^{-t}`` plus its dimension-robust majorants."""
    if mode not in ("strong", "poly"):
        raise ValueError(f"mode must be 'strong' or 'poly', got {mode!r}")
    if params.alpha != spec.alpha:
        raise ValueError("rate parameters were chosen for a different alpha")
    tau, delta, at = params.tau, params.delta, params.alpha_tilde
    _check_tau(spec, tau)
    z = zeta(spec.alpha * tau)
    product = _weight_product(spec, tau)
    weight_sum = math.fsum(g ** tau for g in spec.gamma)
    constant = (4.0 * 3.0 ** (1.0 / tau - 1.0) * delta ** (-(1.0 + tau) / (2.0 * tau))
                * math.sqrt(tau / (1.0 - tau)) * product)
    prefactor = 4.0 * 3.0 ** (at - 1.0) * delta ** (-(at + 1.0) / 2.0) * math.sqrt(2.0 / (at - 1.0))
    majorant = _exp_or_inf(z * weight_sum / tau)
    record = dict(mode=mode, constant=constant, weight_sum=weight_sum, product=product,
                  product_majorant=majorant, dimension_free=prefactor * majorant)
    if mode == "poly":
        S = weight_sum / math.log(spec.d + 1.0)
        expo = z * S / tau
        c_tilde = _exp_or_inf(expo * math.log(2.0))
        record.update(S=S, beta=math.ceil(expo), c_tilde=c_tilde, poly_constant=prefactor * c_tilde)
    return TractabilityConstant(**record)


def approximation_number(spec: WeightSpec, n: int) -> float:
    """``a_n = sqrt(sum_{j >= n} 1/r(k_j))`` for the weight-sorted enumeration ``k_j``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n == 1:
        return math.sqrt(spec.full_sum())
    return math.sqrt(truncation_error(spec, build_In(spec, n)))


@dataclass(frozen=True)
class SamplingNumberBound:
    """Upper bound ``value`` on the sampling number with ``M_bound`` samples."""

    M_bound: float
    value: float
    a_n: float
    n: int

    def __iter__(self):
        return iter((self.M_bound, self.value))

    def to_dict(self) -> dict:
        return asdict(self)


def sampling_number_bound(spec: WeightSpec, n: int) -> SamplingNumberBound:
    """Bound the sampling number via the approximation number ``a_n``.

    Returns ``M_bound = 9 (n-1) max(ln(n-1), 1)`` and
    ``value = max(3 ln(n-1) + 1, 2) a_n``.

    Raises
    ------
    HypothesisViolation
        If the ``n - 1`` lowest-weight frequencies leave ``[-n+1, n-1]^d``.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    In = build_In(spec, n)
    radius = int(np.max(np.abs(In.freqs))) if len(In) else 0
    if radius > n - 1:
        raise HypothesisViolation(f"frequency of sup-norm {radius} outside [-{n - 1}, {n - 1}]^d")
    m = n - 1
    log_m = math.log(m)
    a_n = math.sqrt(truncation_error(spec, In))
    return SamplingNumberBound(9.0 * m * max(log_m, 1.0), max(3.0 * log_m + 1.0, 2.0) * a_n, a_n, n)


def hr_norm(spec: WeightSpec, p: TrigPolynomial) -> float:
    """``sqrt(sum_h r(h) |c_h|^2)`` for a finitely supported function."""
    w = weights(spec, p.freqs)
    return math.sqrt(math.fsum(w * np.abs(p.coeffs) ** 2))


def measurement_points(d: int, seed: int = 0, grid: int = 64, grid_max_d: int = 2,
                       n_lowdisc: int = 100_000, n_random: int = 10_000) -> np.ndarray:
    """Deterministic evaluation points for empirical sup-norm errors.

    A full tensor grid ``grid^d`` for ``d <= grid_max_d``, otherwise
    ``n_lowdisc`` Halton points; in both cases followed by ``n_random``
    uniform points drawn from ``seed``.
    """
    from scipy.stats import qmc

    if d <= grid_max_d:
        axis = np.arange(grid) / grid
        base = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    else:
        base = qmc.Halton(d=d, scramble=False).random(n_lowdisc)
    rnd = np.random.default_rng(seed).random((n_random, d))
    return np.vstack([base, rnd])


def stack_supports(polys: Sequence[TrigPolynomial]) -> tuple[np.ndarray, np.ndarray]:
    """Common support and coefficient matrix ``(|support|, len(polys))``."""
    if not polys:
        raise ValueError("need at least one polynomial")
    d = polys[0].d
    allf = np.vstack([p.freqs for p in polys]) if polys else np.zeros((0, d), dtype=np.int64)
    support, inverse = np.unique(allf, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    C = np.zeros((len(support), len(polys)), dtype=complex)
    offset = 0
    for col, p in enumerate(polys):
        idx = inverse[offset:offset + len(p)]
        np.add.at(C[:, col], idx, p.coeffs)
        offset += len(p)
    return support, C


def sup_error(errors: Sequence[TrigPolynomial], points: np.ndarray) -> np.ndarray:
    """``max_x |e(x)|`` over ``points`` for each error polynomial ``e``."""
    support, C = stack_supports(list(errors))
    vals = evaluate_exponentials(support, C, points)
    return np.max(np.abs(vals), axis=0)
