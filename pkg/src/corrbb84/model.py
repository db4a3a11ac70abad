"""Protocol parameter types, Poisson photon-number statistics and validation.

Everything downstream (decoy estimation, coin analysis, key-rate pipeline)
consumes the types defined here. The photon-number distribution is fixed to
Poisson, i.e. phase-randomized coherent pulses; non-Poissonian sources are out
of scope. All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

PROB_SUM_TOL = 1e-12


class ConfigError(ValueError):
    """Raised when a configuration fails validation at a pipeline entry point."""


@dataclass(frozen=True)
class IntensitySet:
    """Three-intensity decoy setting: signal s > weak w > vacuum-like v >= 0.

    ``p_s + p_w + p_v`` must equal 1 within ``PROB_SUM_TOL``. Instances are
    plain containers; use :func:`validate_intensity_set` to obtain the list of
    violated invariants (empty list == valid).
    """

    s: float
    w: float
    v: float
    p_s: float
    p_w: float
    p_v: float

    def intensities(self) -> tuple[float, float, float]:
        return (self.s, self.w, self.v)

    def probabilities(self) -> tuple[float, float, float]:
        return (self.p_s, self.p_w, self.p_v)

    def pairs(self) -> tuple[tuple[float, float], ...]:
        """(intensity, probability) pairs in (s, w, v) order."""
        return ((self.s, self.p_s), (self.w, self.p_w), (self.v, self.p_v))


@dataclass(frozen=True)
class EpsilonBudget:
    """Failure-probability allocation.

    eps_A feeds the martingale deviation terms, eps_B the per-intensity decoy
    bounds, eps_C the trash-round concentration bound, eps_PA privacy
    amplification, eps_EV error verification. ``d`` is the tolerated
    state-truncation error for unbounded correlations (0 when the correlation
    length is exactly bounded).
    """

    eps_A: float
    eps_B: float
    eps_C: float
    eps_PA: float
    eps_EV: float
    d: float = 0.0


@dataclass(frozen=True)
class ProtocolConfig:
    """Everything Alice and Bob fix before running: block size, intensities,
    keep probability and the epsilon budget."""

    N: int
    intensity_set: IntensitySet
    p_keep: float
    epsilon_budget: EpsilonBudget


def poisson_pmf(m: int, mu: float) -> float:
    """P[photon number = m] for mean photon number mu: e^{-mu} mu^m / m!."""
    if mu < 0:
        raise ValueError(f"mean photon number must be nonnegative, got {mu}")
    if m < 0:
        raise ValueError(f"photon number must be nonnegative, got {m}")
    if mu == 0.0:
        return 1.0 if m == 0 else 0.0
    # log-space evaluation keeps large m / small mu stable
    return math.exp(-mu + m * math.log(mu) - math.lgamma(m + 1))


def single_photon_prob(intensity_set: IntensitySet) -> float:
    """Overall single-photon emission probability sum_mu p_mu * mu * e^{-mu}."""
    return sum(p * mu * math.exp(-mu) for mu, p in intensity_set.pairs())


def mean_intensity(intensity_set: IntensitySet) -> float:
    """Probability-weighted mean photon number sum_mu p_mu * mu."""
    return sum(p * mu for mu, p in intensity_set.pairs())


def validate_intensity_set(iset: IntensitySet) -> list[str]:
    """List of violated invariants; empty means the set is usable."""
    problems = []
    if not (iset.s > iset.w > iset.v >= 0.0):
        problems.append(
            f"intensity ordering violated: need s > w > v >= 0, "
            f"got s={iset.s}, w={iset.w}, v={iset.v}"
        )
    for name, p in (("p_s", iset.p_s), ("p_w", iset.p_w), ("p_v", iset.p_v)):
        if not (0.0 < p < 1.0):
            problems.append(f"{name} must lie strictly in (0, 1), got {p}")
    total = iset.p_s + iset.p_w + iset.p_v
    if abs(total - 1.0) > PROB_SUM_TOL:
        # rejected rather than renormalized: silent renormalization would
        # distort the epsilon accounting downstream
        problems.append(
            f"intensity probabilities must sum to 1 within {PROB_SUM_TOL}, got {total!r}"
        )
    return problems


def validate_epsilon_budget(budget: EpsilonBudget) -> list[str]:
    problems = []
    for name in ("eps_A", "eps_B", "eps_C", "eps_PA", "eps_EV"):
        value = getattr(budget, name)
        if not (0.0 < value < 1.0):
            problems.append(f"{name} must lie strictly in (0, 1), got {value}")
    if not (0.0 <= budget.d < 1.0):
        problems.append(f"truncation tolerance d must lie in [0, 1), got {budget.d}")
    return problems


def validate_config(config: ProtocolConfig) -> list[str]:
    """Every violated invariant of the protocol configuration, as messages.

    An empty report means the configuration is runnable. Reporting only;
    callers that must hard-fail raise :class:`ConfigError` themselves.
    """
    problems = []
    if config.N < 1:
        problems.append(f"N must be a positive round count, got {config.N}")
    if not (0.0 < config.p_keep < 1.0):
        # both p_keep and 1 - p_keep appear as divisors in the coin analysis
        problems.append(f"p_keep must lie strictly in (0, 1), got {config.p_keep}")
    problems.extend(validate_intensity_set(config.intensity_set))
    problems.extend(validate_epsilon_budget(config.epsilon_budget))
    return problems


def require_valid(config: ProtocolConfig) -> None:
    """Raise ConfigError listing every violation; no-op for valid configs."""
    problems = validate_config(config)
    if problems:
        raise ConfigError("; ".join(problems))
