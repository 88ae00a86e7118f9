"""Finite-dimensional checks of large-deviation rates.

Three experiments are provided:

* :func:`sanov_arc_rate` computes the exact binomial tail
  ``-(1/n) log P(Bin(n, p) >= a n)`` in log space and compares it with the
  binary relative entropy ``kl(a | p)``;
* :func:`coarse_grain_convergence` tabulates the dyadic coarse-grained
  entropies of a driving measure against its full entropy;
* :func:`hl0_concentration` measures the flat distance between HL(0)
  driving measures and the uniform limit as the particle size shrinks.

All results are :class:`RateExperiment` records that serialize to JSON with
their seeds, so every run can be replayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .conformal import slit_capacity
from .errors import InvalidInputError
from .hl0 import particles_for_capacity, simulate_hl0
from .measures import DrivingMeasure, coarse_grained_entropy, flat_distance, total_entropy


@dataclass
class RateExperiment:
    """Observed values of an experiment against a predicted limit.

    Attributes
    ----------
    description : str
    n_values : ndarray
        Index of each observation (sample size, dyadic level or particle size).
    observed : ndarray
        Observed rate or statistic, aligned with ``n_values``.
    predicted : float
        Limit predicted by the theory.
    tolerance : float
        Tolerance used for ``passed``.
    passed : bool
    extra : dict
        Experiment-specific details (seeds, raw samples, fitted exponents).
    """

    description: str
    n_values: np.ndarray
    observed: np.ndarray
    predicted: float
    tolerance: float
    passed: bool
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.n_values = np.asarray(self.n_values)
        self.observed = np.asarray(self.observed, dtype=float)
        if self.n_values.shape != self.observed.shape:
            raise InvalidInputError("n_values and observed must be aligned")

    @property
    def errors(self) -> np.ndarray:
        return np.abs(self.observed - self.predicted)

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "n_values": self.n_values.tolist(),
            "observed": self.observed.tolist(),
            "predicted": self.predicted,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "extra": _jsonable(self.extra),
        }

    def to_csv(self) -> str:
        rows = ["n,observed,predicted"]
        rows += [f"{n!r},{o!r},{self.predicted!r}" for n, o in zip(self.n_values.tolist(), self.observed.tolist())]
        return "\n".join(rows) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def binary_kl(a: float, p: float) -> float:
    """Relative entropy ``a log(a/p) + (1-a) log((1-a)/(1-p))``."""
    if not (0 < p < 1) or not (0 <= a <= 1):
        raise InvalidInputError("need 0 < p < 1 and 0 <= a <= 1")
    out = 0.0
    if a > 0:
        out += a * math.log(a / p)
    if a < 1:
        out += (1 - a) * math.log((1 - a) / (1 - p))
    return out


def binomial_log_tail(n: int, p: float, a: float) -> float:
    """``log P(Bin(n, p) >= a n)``, summed in log space.

    The threshold is ``k0 = ceil(a n)``; a ``1e-9`` guard keeps products such
    as ``0.7 * 10`` from rounding up to the next integer.
    """
    n = int(n)
    k0 = max(0, math.ceil(a * n - 1e-9))
    if k0 > n:
        return -math.inf
    k = np.arange(k0, n + 1)
    return float(logsumexp(binom.logpmf(k, n, p)))


def sanov_arc_rate(p: float, a: float, ns=(100, 500, 2000), tol: float = 0.01) -> RateExperiment:
    """Exact tail rates ``r_n = -(1/n) log P(Bin(n, p) >= a n)`` against ``kl(a | p)``.

    ``Bin(n, p)`` counts how many of ``n`` uniform angles fall in a fixed arc
    of relative length ``p``. ``passed`` refers to the largest ``n``.
    """
    if not (0 < p < 1) or not (p <= a < 1):
        raise InvalidInputError("need 0 < p <= a < 1")
    ns = np.array(sorted(int(n) for n in ns))
    if ns.size == 0 or ns[0] < 1:
        raise InvalidInputError("sample sizes must be positive")
    rates = np.array([-binomial_log_tail(n, p, a) / n for n in ns])
    kl = binary_kl(a, p)
    return RateExperiment(
        description=f"binomial arc tail p={p!r} a={a!r}",
        n_values=ns,
        observed=rates,
        predicted=kl,
        tolerance=tol,
        passed=bool(abs(rates[-1] - kl) < tol),
        extra={"p": p, "a": a},
    )


def coarse_grain_convergence(mu: DrivingMeasure, dyadic_max: int = 6, rel_tol: float = 0.05) -> RateExperiment:
    """Dyadic coarse-grained entropies ``I_{2^k}`` for ``k = 0..dyadic_max``.

    ``passed`` requires the sequence to be nondecreasing (slack ``1e-9``),
    bounded by the full entropy ``H`` and within ``rel_tol * H`` of it at the
    last level.

    Raises
    ------
    InvalidInputError
        If ``mu`` does not have unit-mass slices.
    """
    if int(dyadic_max) != dyadic_max or dyadic_max < 0:
        raise InvalidInputError("dyadic_max must be a nonnegative integer")
    ks = np.arange(int(dyadic_max) + 1)
    vals = np.array([coarse_grained_entropy(mu, 2**int(k)) for k in ks])
    H = total_entropy(mu)
    monotone = bool(np.all(np.diff(vals) >= -1e-9))
    bounded = bool(np.all(vals <= H + 1e-9))
    gap = H - vals[-1]
    close = bool(gap <= rel_tol * abs(H)) if math.isfinite(H) else False
    return RateExperiment(
        description="dyadic coarse-grained entropy",
        n_values=2**ks,
        observed=vals,
        predicted=H,
        tolerance=rel_tol * abs(H) if math.isfinite(H) else math.inf,
        passed=monotone and bounded and close,
        extra={"monotone": monotone, "bounded": bounded, "final_gap": gap},
    )


def _fit_exponent(x: np.ndarray, y: np.ndarray) -> float:
    """Slope of ``log y`` against ``log x``; ``nan`` if fewer than two positive points."""
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def hl0_concentration(eps_list=(0.2, 0.1, 0.05), seeds=range(20), grid=(64, 32),
                      target: DrivingMeasure | None = None) -> RateExperiment:
    """Median flat distance of HL(0) driving measures to a target.

    For each ``eps`` the run uses ``n = round(1 / c(eps))`` particles, so the
    driving measure lives on ``[0, n c(eps)]``. The default target is the
    uniform measure on the same interval. ``passed`` means the medians
    strictly decrease along ``eps_list`` sorted in decreasing order.

    ``extra`` records the seeds, all distances, the fitted exponent of the
    median against ``eps`` and both large-deviation speeds ``4 / eps^2`` and
    ``1 / c(eps)``, which agree to leading order.
    """
    eps = np.array(sorted((float(e) for e in eps_list), reverse=True))
    seeds = [int(s) for s in seeds]
    if eps.size == 0 or not seeds:
        raise InvalidInputError("need at least one eps and one seed")
    distances = []
    for e in eps:
        n = particles_for_capacity(e)
        row = []
        for s in seeds:
            run = simulate_hl0(n, e, s)
            ref = target if target is not None else DrivingMeasure.uniform(run.mu.T)
            row.append(flat_distance(run.mu, ref, grid))
        distances.append(row)
    distances = np.array(distances)
    med = np.median(distances, axis=1)
    decreasing = bool(np.all(np.diff(med) < 0))
    return RateExperiment(
        description="HL(0) flat distance to target",
        n_values=eps,
        observed=med,
        predicted=0.0,
        tolerance=math.inf,
        passed=decreasing,
        extra={
            "seeds": seeds,
            "grid": list(grid),
            "distances": distances,
            "n_particles": [particles_for_capacity(e) for e in eps],
            "trend_exponent": _fit_exponent(eps, med),
            "speed_eps": (4.0 / eps**2).tolist(),
            "speed_capacity": [1.0 / slit_capacity(e) for e in eps],
            "strictly_decreasing": decreasing,
        },
    )
