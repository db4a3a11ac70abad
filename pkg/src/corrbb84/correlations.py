"""Setting-history correlations of the encoder, and their security inputs.

The encoder is modeled as linear time-invariant: the emitted phase of round k
picks up an additive contribution from the bit/basis choice made l rounds
earlier, and the spread of those contributions at lag l is bounded by
Delta_l = Delta_1 * exp(-C (l-1)). Unbounded tails are handled by truncating
at an effective length l_c_eff and accounting the truncation error as a trace
distance between the actual and truncated source states.

Two families of results live here:

* closed-form bounds used by the key-rate pipeline (``coin_parameter_bound``,
  ``trace_distance_bound``, ``required_truncation_length``), and
* exact brute-force oracles at desk scale (``exact_coin_parameter``,
  ``exact_global_fidelity``) that the bounds are validated against.

Bit/basis settings are indexed as a in {0, 1} and basis Z=0, X=1 throughout;
a flat setting id is ``2*a + basis``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import IntensitySet

Z, X = 0, 1

MAX_ORACLE_LC = 3
MAX_ORACLE_ROUNDS = 8


@dataclass(frozen=True)
class CorrelationModel:
    """Exponentially decaying correlation magnitudes plus truncation choice.

    ``delta_1`` is the nearest-neighbour magnitude (radians, in [0, pi]),
    ``decay_C`` the exponential decay rate (> 0), ``truncation_d`` the
    tolerated truncation error in [0, 1), and ``l_c_eff`` the effective
    correlation length the analysis is run at (0 for an uncorrelated source).
    """

    delta_1: float
    decay_C: float
    truncation_d: float = 0.0
    l_c_eff: int = 0


@dataclass(frozen=True)
class ExplicitDeltas:
    """Explicit per-lag phase contributions delta[lag-1, bit, basis] (radians).

    ``table`` has shape (lags, 2, 2); row l-1 holds the four lag-l values.
    Admissibility against a :class:`CorrelationModel` means the spread of the
    four values at lag l is at most Delta_l.
    """

    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 3 or table.shape[1:] != (2, 2):
            raise ValueError(f"delta table must have shape (lags, 2, 2), got {table.shape}")
        object.__setattr__(self, "table", table)

    @property
    def lags(self) -> int:
        return self.table.shape[0]

    def flat(self) -> np.ndarray:
        """Shape (lags, 4) view indexed by setting id 2*a + basis."""
        return self.table.reshape(self.lags, 4)


def correlation_magnitude(l: int, model: CorrelationModel) -> float:
    """Spread bound Delta_l = Delta_1 * exp(-C (l-1)) at lag l >= 1."""
    if l < 1:
        raise ValueError(f"lag must be >= 1, got {l}")
    return model.delta_1 * math.exp(-model.decay_C * (l - 1))


def tail_sum(l_c: int, model: CorrelationModel) -> float:
    """Geometric tail sum of correlation magnitudes beyond lag l_c,
    Delta_1 * exp(-C l_c) / (1 - exp(-C))."""
    if l_c < 0:
        raise ValueError(f"l_c must be nonnegative, got {l_c}")
    return model.delta_1 * math.exp(-model.decay_C * l_c) / (1.0 - math.exp(-model.decay_C))


def required_truncation_length(N: int, mean_mu: float, model: CorrelationModel) -> int:
    """Smallest truncation length whose tail-induced trace distance is <= d.

    Ceiling of (1/C) ln(sqrt(N mu_bar) Delta_1 / (d (1 - e^-C))), floored at 1.
    Meaningless when d = 0 or Delta_1 = 0 (no truncation needed); callers then
    supply an explicit length instead.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if mean_mu <= 0:
        raise ValueError(f"mean intensity must be positive, got {mean_mu}")
    if model.truncation_d <= 0 or model.delta_1 <= 0:
        raise ValueError(
            "required_truncation_length needs d > 0 and delta_1 > 0; "
            "use an explicit correlation length otherwise"
        )
    arg = (
        math.sqrt(N * mean_mu)
        * model.delta_1
        / (model.truncation_d * (1.0 - math.exp(-model.decay_C)))
    )
    return max(1, math.ceil(math.log(arg) / model.decay_C))


def trace_distance_bound(N: int, mean_mu: float, l_c: int, model: CorrelationModel) -> float:
    """Bound on the trace distance between the actual source state over N
    rounds and the one with correlations truncated at length l_c:
    min(1, sqrt(N mu_bar) * tail_sum(l_c))."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return min(1.0, math.sqrt(N * mean_mu) * tail_sum(l_c, model))


def _lag_overlap_floor(l: int, intensity_set: IntensitySet, model: CorrelationModel) -> float:
    delta_l = correlation_magnitude(l, model)
    return sum(
        p * math.exp(-mu * (1.0 - math.cos(delta_l))) for mu, p in intensity_set.pairs()
    )


def coin_parameter_bound(
    l_c: int, intensity_set: IntensitySet, model: CorrelationModel
) -> float:
    """Worst-case minus probability of the basis-coin measurement on a
    single-photon trash round, for spreads bounded by the model:
    (1/2) [1 - prod_{l=1}^{l_c} sum_mu p_mu exp(-mu (1 - cos Delta_l))].

    Monotone nondecreasing in l_c, Delta_1 and every intensity; in [0, 1/2].
    """
    if l_c < 0:
        raise ValueError(f"l_c must be nonnegative, got {l_c}")
    product = 1.0
    for l in range(1, l_c + 1):
        product *= _lag_overlap_floor(l, intensity_set, model)
    return 0.5 * (1.0 - product)


def _coin_overlap_sum(l_c: int, deltas: ExplicitDeltas, intensity_set: IntensitySet) -> float:
    """Sign-compensated overlap sum S of the four (X-bit, Z-bit) branch pairs.

    The coin-minus probability of a single-photon trash round is (1 - S)/2.
    Only phase *differences* of the two compared round-k settings enter each
    later-round overlap, so the surrounding setting history cancels and S is
    the same for every neighbourhood; the maximum over neighbourhoods is
    therefore S itself, with no enumeration needed.
    """
    if deltas.lags < l_c:
        raise ValueError(f"delta table covers {deltas.lags} lags, need {l_c}")
    total = 0.0
    for a_x in (0, 1):
        for a_z in (0, 1):
            product = 1.0
            for l in range(1, l_c + 1):
                diff = deltas.table[l - 1, a_x, X] - deltas.table[l - 1, a_z, Z]
                product *= sum(
                    p * math.exp(-mu * (1.0 - math.cos(diff)))
                    for mu, p in intensity_set.pairs()
                )
            total += product
    return 0.25 * total


def exact_coin_parameter(
    l_c: int, deltas: ExplicitDeltas, intensity_set: IntensitySet
) -> float:
    """Exact coin-minus probability for an explicit delta table, desk scale.

    Brute-force counterpart of :func:`coin_parameter_bound`; restricted to
    l_c <= 3 (bulk rounds dominate: edge rounds carry fewer overlap factors,
    each of which lies in (0, 1])."""
    if l_c < 0 or l_c > MAX_ORACLE_LC:
        raise ValueError(f"exact oracle supports 0 <= l_c <= {MAX_ORACLE_LC}, got {l_c}")
    return 0.5 * (1.0 - _coin_overlap_sum(l_c, deltas, intensity_set))


def round_minus_probability(
    l_c: int, deltas: ExplicitDeltas, intensity_set: IntensitySet
) -> float:
    """Per-round conditional coin-minus probability for the sampling oracle.

    Identical for every round and neighbourhood under the LTI table (see
    :func:`_coin_overlap_sum`), and equal to :func:`exact_coin_parameter`.
    """
    return exact_coin_parameter(l_c, deltas, intensity_set)


def exact_global_fidelity(
    N: int,
    l_c: int,
    deltas: ExplicitDeltas,
    intensity_set: IntensitySet,
    reference: tuple[int, int] = (0, Z),
) -> float:
    """Exact fidelity between the actual and lag-l_c-truncated source states
    over N rounds, enumerating all 4^N bit/basis histories.

    ``deltas`` must cover lags up to N-1; entries beyond lag l_c are the
    long-range contributions the truncated source replaces by the fixed
    ``reference`` setting. The exact trace distance is sqrt(1 - F^2),
    directly comparable to :func:`trace_distance_bound`.
    """
    if N < 1 or N > MAX_ORACLE_ROUNDS:
        raise ValueError(f"exact oracle supports 1 <= N <= {MAX_ORACLE_ROUNDS}, got {N}")
    if l_c < 0:
        raise ValueError(f"l_c must be nonnegative, got {l_c}")
    if deltas.lags < N - 1:
        raise ValueError(f"delta table covers {deltas.lags} lags, need {N - 1}")
    ref_id = 2 * reference[0] + reference[1]
    n_hist = 4**N
    codes = np.arange(n_hist)
    # digits[k] holds the setting id of round k+1 for every history
    digits = np.empty((N, n_hist), dtype=np.int64)
    for k in range(N):
        digits[k] = (codes // 4**k) % 4
    flat = deltas.flat()
    mus = np.array([mu for mu, _ in intensity_set.pairs()])
    probs = np.array([p for _, p in intensity_set.pairs()])
    total = np.ones(n_hist)
    for k in range(1, N + 1):
        # phase difference of round k: contributions from rounds more than
        # l_c steps back, relative to the fixed reference choice
        if k - 1 <= l_c:
            continue
        dtheta = np.zeros(n_hist)
        for lag in range(l_c + 1, k):
            row = flat[lag - 1]
            dtheta += row[digits[k - lag - 1]] - row[ref_id]
        one_minus_cos = 1.0 - np.cos(dtheta)
        per_round = (probs[:, None] * np.exp(-np.outer(mus, one_minus_cos))).sum(axis=0)
        total *= per_round
    return float(total.mean())


def check_admissible(deltas: ExplicitDeltas, model: CorrelationModel) -> list[str]:
    """Per-lag admissibility report: spread at lag l must not exceed Delta_l."""
    problems = []
    for l in range(1, deltas.lags + 1):
        values = deltas.table[l - 1]
        spread = float(values.max() - values.min())
        limit = correlation_magnitude(l, model)
        if spread > limit + 1e-12:
            problems.append(f"lag {l}: spread {spread} exceeds Delta_l = {limit}")
    return problems


def random_admissible_deltas(
    model: CorrelationModel, lags: int, rng: np.random.Generator
) -> ExplicitDeltas:
    """Uniform draw from [-Delta_l/2, +Delta_l/2] per setting at each lag;
    every pairwise difference then respects the lag's spread bound."""
    half = np.array([correlation_magnitude(l, model) / 2.0 for l in range(1, lags + 1)])
    table = rng.uniform(-1.0, 1.0, size=(lags, 2, 2)) * half[:, None, None]
    return ExplicitDeltas(table)


def extreme_deltas(model: CorrelationModel, lags: int) -> ExplicitDeltas:
    """Admissible table that saturates every X-vs-Z difference at Delta_l,
    which attains the closed-form coin bound exactly."""
    half = np.array([correlation_magnitude(l, model) / 2.0 for l in range(1, lags + 1)])
    table = np.empty((lags, 2, 2))
    table[:, :, Z] = -half[:, None]
    table[:, :, X] = half[:, None]
    return ExplicitDeltas(table)
