"""Sampling and reconstruction of multivariate periodic functions on multiple rank-1 lattices."""

from __future__ import annotations

from .estimator import LatticeApproximator
from .freqset import (FrequencySet, WeightSpec, build_AdN, build_In, truncation_bound,
                      truncation_error, weights)
from .harness import ExperimentConfig, run_convergence, zoo
from .korobov import (approximation_number, choose_rate, sampling_number_bound, theorem_bound,
                      tractability_constant, wc_error_bound)
from .lattice import MultipleRank1Lattice, Rank1Lattice, construct, partition, verify
from .spectral import LatticeSamples, TrigPolynomial, evaluate_on_lattice, fft, ifft, reconstruct
from .zeta import zeta

__version__ = "0.1.0"

__all__ = [
    "FrequencySet", "WeightSpec", "build_AdN", "build_In", "truncation_bound", "truncation_error",
    "weights", "ExperimentConfig", "run_convergence", "zoo", "approximation_number", "choose_rate",
    "sampling_number_bound", "theorem_bound", "tractability_constant", "wc_error_bound",
    "MultipleRank1Lattice", "Rank1Lattice", "construct", "partition", "verify", "LatticeSamples",
    "TrigPolynomial", "evaluate_on_lattice", "fft", "ifft", "reconstruct", "zeta",
    "LatticeApproximator",
]
