"""Honest lossy-channel statistics generator and the coin sampling oracle.

``expected_counts`` produces deterministic rounded expectations,
``sample_counts`` draws one protocol realization; both return the announced
:class:`~corrbb84.keyrate.ObservedCounts` together with a hidden
:class:`GroundTruth` that resolves every tally by photon number (buckets
0, 1, 2+), which the validation oracles need and which no real run could see.

Channel model: per emitted m-photon pulse, a signal click occurs with
probability 1 - (1-eta)^m (bit then decided by the signal, error probability
= misalignment); otherwise either of the two detectors dark-counts with
probability Y0 = 2 p_dark - p_dark^2 (bit random, error probability 1/2;
double clicks are squashed to a random bit, hence the 1/2). The overall
yield is Y_m = 1 - (1 - Y0)(1 - eta)^m.

The honest channel does not emulate any correlation-induced error on Bob's
side; correlations enter the security bound and, optionally, the ground-truth
coin tally through ``coin_minus_prob``. Randomness comes from numpy's
PCG64 via ``default_rng(seed)``; one seed fixes the entire draw order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .correlations import ExplicitDeltas, round_minus_probability
from .keyrate import ObservedCounts
from .model import ProtocolConfig, single_photon_prob
from .decoy import CountTriple

INTENSITY_LABELS = ("s", "w", "v")
PHOTON_BUCKETS = (0, 1, 2)  # 2 stands for ">= 2"


@dataclass(frozen=True)
class ChannelModel:
    """Honest lossy channel with threshold detectors.

    Defaults: 0.2 dB/km fiber, 25% detector efficiency, 1e-7 dark-count
    probability per detector per gate, 1% misalignment, error-correction
    inefficiency 1.16.
    """

    distance_km: float
    attenuation_db_per_km: float = 0.2
    detector_efficiency: float = 0.25
    dark_count_prob: float = 1e-7
    misalignment: float = 0.01
    f_EC: float = 1.16

    @property
    def transmittance(self) -> float:
        """Overall single-photon transmittance eta, detector included."""
        return self.detector_efficiency * 10.0 ** (
            -self.attenuation_db_per_km * self.distance_km / 10.0
        )

    @property
    def dark_click_prob(self) -> float:
        """Probability that at least one of the two detectors dark-counts."""
        p = self.dark_count_prob
        return 2.0 * p - p * p


def validate_channel(channel: ChannelModel) -> list[str]:
    problems = []
    if channel.distance_km < 0:
        problems.append(f"distance must be nonnegative, got {channel.distance_km}")
    if channel.attenuation_db_per_km <= 0:
        problems.append("attenuation must be positive")
    if not (0.0 < channel.transmittance <= 1.0):
        problems.append(f"transmittance {channel.transmittance} outside (0, 1]")
    if not (0.0 <= channel.dark_count_prob < 1.0):
        problems.append("dark count probability outside [0, 1)")
    if not (0.0 <= channel.misalignment <= 0.5):
        problems.append("misalignment outside [0, 0.5]")
    if channel.f_EC < 1.0:
        problems.append("f_EC must be >= 1")
    return problems


@dataclass(frozen=True)
class GroundTruth:
    """Photon-number-resolved tallies hidden from the announced data.

    Each category maps intensity label -> {bucket: count}; buckets are 0, 1
    and 2 (meaning two or more photons). ``trash_minus_single`` counts the
    coin-minus outcomes among all single-photon trash-sifted rounds,
    detected or not.
    """

    z_det: dict = field(default_factory=dict)
    z_err: dict = field(default_factory=dict)
    x_det: dict = field(default_factory=dict)
    x_err: dict = field(default_factory=dict)
    trash_minus_single: int = 0

    def _single(self, category: dict) -> int:
        return sum(category[label][1] for label in INTENSITY_LABELS)

    def z_det_single(self) -> int:
        return self._single(self.z_det)

    def z_err_single(self) -> int:
        return self._single(self.z_err)

    def x_det_single(self) -> int:
        return self._single(self.x_det)

    def x_err_single(self) -> int:
        return self._single(self.x_err)

    def marginal(self, category: dict) -> CountTriple:
        return CountTriple(
            *(sum(category[label].values()) for label in INTENSITY_LABELS)
        )

    def consistent_with(self, observed: ObservedCounts) -> list[str]:
        """Exact marginal check against the announced counts."""
        problems = []
        for name, category, triple in (
            ("z_det", self.z_det, observed.z_det),
            ("z_err", self.z_err, observed.z_err),
            ("x_det", self.x_det, observed.x_det),
            ("x_err", self.x_err, observed.x_err),
        ):
            if self.marginal(category) != triple:
                problems.append(f"{name} marginals disagree with observed counts")
        return problems


def channel_yield(m: int, channel: ChannelModel) -> float:
    """Detection probability of an m-photon pulse,
    Y_m = 1 - (1 - Y0)(1 - eta)^m."""
    if m < 0:
        raise ValueError(f"photon number must be nonnegative, got {m}")
    eta = channel.transmittance
    return 1.0 - (1.0 - channel.dark_click_prob) * (1.0 - eta) ** m


def _bucket_stats(mu: float, channel: ChannelModel) -> list[tuple[float, float]]:
    """Per bucket: (emission probability, signal-click probability within
    the bucket). Bucket 2 aggregates m >= 2 exactly via the Poisson identity
    sum_m p_m (1-eta)^m = exp(-mu eta)."""
    eta = channel.transmittance
    p0 = math.exp(-mu)
    p1 = mu * math.exp(-mu)
    p2 = max(0.0, 1.0 - p0 - p1)
    stats = [(p0, 0.0), (p1, eta)]
    if p2 > 0.0:
        no_click_mass = math.exp(-mu * eta) - p0 - p1 * (1.0 - eta)
        sig2 = min(1.0, max(0.0, (p2 - no_click_mass) / p2))
        stats.append((p2, sig2))
    else:
        stats.append((0.0, 0.0))
    return stats


def _category_pvals(p_keep: float, error_prob: float) -> np.ndarray:
    """Detected-round split [kZ-err, kZ-ok, kX-err, kX-ok, keep-unsifted,
    trash-sifted, trash-unsifted]."""
    quarter = p_keep / 4.0
    pvals = np.array(
        [
            quarter * error_prob,
            quarter * (1.0 - error_prob),
            quarter * error_prob,
            quarter * (1.0 - error_prob),
            p_keep / 2.0,
            (1.0 - p_keep) / 2.0,
            0.0,
        ]
    )
    pvals[-1] = max(0.0, 1.0 - pvals[:-1].sum())
    return pvals


def _empty_category() -> dict:
    return {label: {b: 0 for b in PHOTON_BUCKETS} for label in INTENSITY_LABELS}


def expected_counts(
    config: ProtocolConfig,
    channel: ChannelModel,
    coin_minus_prob: float = 0.0,
) -> tuple[ObservedCounts, GroundTruth]:
    """Deterministic rounded expectations of one protocol run.

    Every ground-truth cell is rounded individually and the announced counts
    are sums of those cells, so the marginal-consistency invariant holds
    exactly. ``n_sifted_det`` is half of the expected detections.
    """
    pk = config.p_keep
    e_mis = channel.misalignment
    y0 = channel.dark_click_prob
    gt = GroundTruth(
        z_det=_empty_category(),
        z_err=_empty_category(),
        x_det=_empty_category(),
        x_err=_empty_category(),
        trash_minus_single=round(
            config.N * single_photon_prob(config.intensity_set)
            * (1.0 - pk) / 2.0 * coin_minus_prob
        ),
    )
    total_detected = 0.0
    for label, (mu, p_mu) in zip(INTENSITY_LABELS, config.intensity_set.pairs()):
        for bucket, (p_bucket, sig_prob) in zip(
            PHOTON_BUCKETS, _bucket_stats(mu, channel)
        ):
            n_cell = config.N * p_mu * p_bucket
            sig = n_cell * sig_prob
            dark = (n_cell - sig) * y0
            detected = sig + dark
            errors = sig * e_mis + dark * 0.5
            total_detected += detected
            det_cell = round(detected * pk / 4.0)
            err_cell = round(errors * pk / 4.0)
            gt.z_det[label][bucket] = det_cell
            gt.z_err[label][bucket] = err_cell
            gt.x_det[label][bucket] = det_cell
            gt.x_err[label][bucket] = err_cell
    keep_sifted = 2 * sum(
        gt.z_det[label][bucket]
        for label in INTENSITY_LABELS
        for bucket in PHOTON_BUCKETS
    )
    # per-cell rounding may nudge keep-sifted sums past detected/2; keep the
    # count invariant keep-sifted <= sifted intact
    n_sifted_det = max(round(total_detected / 2.0), keep_sifted)
    observed = ObservedCounts(
        z_det=gt.marginal(gt.z_det),
        z_err=gt.marginal(gt.z_err),
        x_det=gt.marginal(gt.x_det),
        x_err=gt.marginal(gt.x_err),
        n_sifted_det=n_sifted_det,
    )
    return observed, gt


def sample_counts(
    config: ProtocolConfig,
    channel: ChannelModel,
    seed: int,
    coin_minus_prob: float = 0.0,
) -> tuple[ObservedCounts, GroundTruth]:
    """One sampled protocol realization; deterministic for a fixed seed.

    Sampling is hierarchical over intensity choice, photon-number bucket,
    click type and round classification, which reproduces the per-round
    category model exactly without materializing N rounds.
    """
    rng = np.random.default_rng(seed)
    pk = config.p_keep
    y0 = channel.dark_click_prob
    iset = config.intensity_set
    z_det, z_err = _empty_category(), _empty_category()
    x_det, x_err = _empty_category(), _empty_category()
    n_by_intensity = rng.multinomial(config.N, [iset.p_s, iset.p_w, iset.p_v])
    n_sifted_det = 0
    trash_sifted_single = 0
    sig_pvals = _category_pvals(pk, channel.misalignment)
    dark_pvals = _category_pvals(pk, 0.5)
    for label, n_mu, (mu, _) in zip(INTENSITY_LABELS, n_by_intensity, iset.pairs()):
        stats = _bucket_stats(mu, channel)
        bucket_p = np.array([p for p, _ in stats])
        n_buckets = rng.multinomial(n_mu, bucket_p / bucket_p.sum())
        for bucket, n_cell, (_, sig_prob) in zip(PHOTON_BUCKETS, n_buckets, stats):
            sig = int(rng.binomial(n_cell, sig_prob))
            dark = int(rng.binomial(n_cell - sig, y0))
            split = rng.multinomial(sig, sig_pvals) + rng.multinomial(dark, dark_pvals)
            z_det[label][bucket] = int(split[0] + split[1])
            z_err[label][bucket] = int(split[0])
            x_det[label][bucket] = int(split[2] + split[3])
            x_err[label][bucket] = int(split[2])
            n_sifted_det += int(split[0] + split[1] + split[2] + split[3] + split[5])
            if bucket == 1:
                undetected = n_cell - sig - dark
                trash_sifted_single += int(split[5])
                trash_sifted_single += int(rng.binomial(undetected, (1.0 - pk) / 2.0))
    minus = int(rng.binomial(trash_sifted_single, coin_minus_prob))
    gt = GroundTruth(
        z_det=z_det, z_err=z_err, x_det=x_det, x_err=x_err, trash_minus_single=minus
    )
    observed = ObservedCounts(
        z_det=gt.marginal(gt.z_det),
        z_err=gt.marginal(gt.z_err),
        x_det=gt.marginal(gt.x_det),
        x_err=gt.marginal(gt.x_err),
        n_sifted_det=n_sifted_det,
    )
    return observed, gt


def coin_monte_carlo(
    N: int,
    config: ProtocolConfig,
    deltas: ExplicitDeltas,
    l_c: int,
    trials: int,
    seed: int,
) -> np.ndarray:
    """Empirical distribution of the single-photon trash-sifted coin-minus
    tally over ``trials`` independent runs of N rounds.

    A round qualifies when it emits exactly one photon (probability p1),
    is assigned to trash (1 - p_keep) and sifted (1/2); a qualifying round
    yields minus with the exact conditional probability of its setting
    neighbourhood, which the LTI delta table makes identical for every
    round (see :func:`~corrbb84.correlations.round_minus_probability`), so
    the tally is sampled with nested binomials -- distributionally exact.
    """
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    p_minus = round_minus_probability(l_c, deltas, config.intensity_set)
    p_qualify = (
        single_photon_prob(config.intensity_set) * (1.0 - config.p_keep) / 2.0
    )
    rng = np.random.default_rng(seed)
    qualifying = rng.binomial(N, p_qualify, size=trials)
    return rng.binomial(qualifying, p_minus)
