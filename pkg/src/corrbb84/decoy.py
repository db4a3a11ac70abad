"""Three-intensity decoy-state estimation.

Converts per-intensity counts of one event class (detections or errors, per
basis) into bounds on the single-photon contribution. The estimate rests on
the counterfactual in which the per-photon-number counts are fixed first and
each event is assigned an intensity with the Bayes posterior
p(mu | m) = p_mu p(m|mu) / sum_nu p_nu p(m|nu); the per-intensity counts are
then Bernoulli sums amenable to :func:`~corrbb84.concentration.binomial_bound_pair`.

The analytic three-intensity bounds require the solvability condition
s(w - v) - w^2 + v^2 > 0, i.e. s > w + v. A full evaluation of one event
class consumes eps_B five times (3 for the lower bound, 2 for the upper);
the four bound evaluations of a protocol run consume 10 eps_B in total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

from .concentration import binomial_bound_pair
from .model import IntensitySet, ProtocolConfig, single_photon_prob

if TYPE_CHECKING:
    from .keyrate import ObservedCounts

BoundPair = Callable[[float, int, int], tuple[float, float]]


class DecoySolvabilityError(ValueError):
    """Intensity set violates s(w - v) - w^2 + v^2 > 0 (or w = v)."""


@dataclass(frozen=True)
class CountTriple:
    """Counts of one event class per intensity, (s, w, v) order."""

    m_s: int
    m_w: int
    m_v: int

    def __post_init__(self):
        if min(self.m_s, self.m_w, self.m_v) < 0:
            raise ValueError(f"counts must be nonnegative, got {self}")

    @property
    def total(self) -> int:
        return self.m_s + self.m_w + self.m_v


@dataclass(frozen=True)
class DecoyBounds:
    """Single-photon count bounds for one protocol run.

    ``z_det_lower/z_det_upper`` bracket the single-photon detections in the
    key basis, ``x_det_lower`` and ``x_err_upper`` bound the test-basis
    detections and errors. ``eps_decoy = 10 * eps_B`` is the union failure
    budget of the four evaluations.
    """

    z_det_lower: float
    z_det_upper: float
    x_det_lower: float
    x_err_upper: float
    eps_decoy: float
    audit: dict = field(default_factory=dict, compare=False)


def intensity_posterior(mu: str, m: int, intensity_set: IntensitySet) -> float:
    """Posterior probability that an m-photon event came from intensity ``mu``.

    ``mu`` is one of the labels "s", "w", "v". Rows sum to 1 over the three
    labels for any fixed m with nonzero support.
    """
    if mu not in ("s", "w", "v"):
        raise ValueError(f"intensity label must be one of s/w/v, got {mu!r}")
    if m < 0:
        raise ValueError(f"photon number must be nonnegative, got {m}")
    weights = {
        label: prob * _poisson_weight(m, value)
        for label, (value, prob) in zip("swv", intensity_set.pairs())
    }
    denom = sum(weights.values())
    if denom <= 0.0:
        raise ValueError(
            f"no intensity has support at photon number {m}; posterior undefined"
        )
    return weights[mu] / denom


def _poisson_weight(m: int, mu: float) -> float:
    if mu == 0.0:
        return 1.0 if m == 0 else 0.0
    return math.exp(-mu + m * math.log(mu) - math.lgamma(m + 1))


def _lower_denominator(iset: IntensitySet) -> float:
    return iset.s * (iset.w - iset.v) - iset.w**2 + iset.v**2


def _single_photon_lower(
    counts: CountTriple,
    iset: IntensitySet,
    eps_B: float,
    bound_pair: BoundPair,
) -> dict:
    denom = _lower_denominator(iset)
    if denom <= 0.0:
        raise DecoySolvabilityError(
            f"s(w-v) - w^2 + v^2 = {denom} must be positive (need s > w + v)"
        )
    total = counts.total
    m_w_lo = bound_pair(eps_B, counts.m_w, total)[0]
    m_v_hi = bound_pair(eps_B, counts.m_v, total)[1]
    m_s_hi = bound_pair(eps_B, counts.m_s, total)[1]
    p1 = single_photon_prob(iset)
    raw = (p1 * iset.s / denom) * (
        math.exp(iset.w) / iset.p_w * m_w_lo
        - math.exp(iset.v) / iset.p_v * m_v_hi
        - (iset.w**2 - iset.v**2) / iset.s**2 * math.exp(iset.s) / iset.p_s * m_s_hi
    )
    return {
        "raw": raw,
        "value": min(max(0.0, raw), float(total)),
        "m_w_lower": m_w_lo,
        "m_v_upper": m_v_hi,
        "m_s_upper": m_s_hi,
    }


def _single_photon_upper(
    counts: CountTriple,
    iset: IntensitySet,
    eps_B: float,
    bound_pair: BoundPair,
) -> dict:
    if iset.w <= iset.v:
        raise DecoySolvabilityError(f"need w > v, got w={iset.w}, v={iset.v}")
    total = counts.total
    m_w_hi = bound_pair(eps_B, counts.m_w, total)[1]
    m_v_lo = bound_pair(eps_B, counts.m_v, total)[0]
    p1 = single_photon_prob(iset)
    raw = (p1 / (iset.w - iset.v)) * (
        math.exp(iset.w) / iset.p_w * m_w_hi - math.exp(iset.v) / iset.p_v * m_v_lo
    )
    return {
        "raw": raw,
        "value": min(max(0.0, raw), float(total)),
        "m_w_upper": m_w_hi,
        "m_v_lower": m_v_lo,
    }


def decoy_single_photon_lower(
    counts: CountTriple,
    intensity_set: IntensitySet,
    eps_B: float,
    bound_pair: BoundPair = binomial_bound_pair,
) -> float:
    """Lower bound on the single-photon share of one event class.

    Holds except with probability 3 * eps_B (three one-sided bound
    substitutions). Clamped to [0, total]; a negative analytic value carries
    no information.
    """
    return _single_photon_lower(counts, intensity_set, eps_B, bound_pair)["value"]


def decoy_single_photon_upper(
    counts: CountTriple,
    intensity_set: IntensitySet,
    eps_B: float,
    bound_pair: BoundPair = binomial_bound_pair,
) -> float:
    """Upper bound on the single-photon share of one event class.

    Holds except with probability 2 * eps_B. Clamped to [0, total].
    """
    return _single_photon_upper(counts, intensity_set, eps_B, bound_pair)["value"]


def apply_decoy_bounds(
    observed: "ObservedCounts",
    config: ProtocolConfig,
    bound_pair: BoundPair = binomial_bound_pair,
) -> DecoyBounds:
    """Evaluate all four single-photon bounds of a protocol run.

    Lower and upper bounds on key-basis detections, lower bound on test-basis
    detections, upper bound on test-basis errors; joint failure probability at
    most ``10 * eps_B``.
    """
    iset = config.intensity_set
    eps_B = config.epsilon_budget.eps_B
    z_lo = _single_photon_lower(observed.z_det, iset, eps_B, bound_pair)
    z_hi = _single_photon_upper(observed.z_det, iset, eps_B, bound_pair)
    x_lo = _single_photon_lower(observed.x_det, iset, eps_B, bound_pair)
    e_hi = _single_photon_upper(observed.x_err, iset, eps_B, bound_pair)
    return DecoyBounds(
        z_det_lower=z_lo["value"],
        z_det_upper=z_hi["value"],
        x_det_lower=x_lo["value"],
        x_err_upper=e_hi["value"],
        eps_decoy=10.0 * eps_B,
        audit={
            "eps_B": eps_B,
            "z_det_lower": z_lo,
            "z_det_upper": z_hi,
            "x_det_lower": x_lo,
            "x_err_upper": e_hi,
        },
    )
