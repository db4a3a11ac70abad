import math
from dataclasses import replace

import numpy as np
import pytest

from corrbb84.correlations import (
    CorrelationModel,
    ExplicitDeltas,
    exact_coin_parameter,
    extreme_deltas,
    round_minus_probability,
)
from corrbb84.model import single_photon_prob
from corrbb84.simulator import (
    ChannelModel,
    channel_yield,
    coin_monte_carlo,
    expected_counts,
    sample_counts,
    validate_channel,
)
from corrbb84.validation import reference_config

YIELD_EXAMPLE = 0.100009  # m=1, eta=0.1, Y0=1e-5


def _channel_with(eta, dark):
    """Distance-0 channel with a prescribed overall transmittance."""
    return ChannelModel(
        distance_km=0.0,
        detector_efficiency=eta,
        dark_count_prob=dark,
        misalignment=0.01,
    )


def test_yield_no_photons_no_darks():
    channel = _channel_with(0.3, 0.0)
    assert channel_yield(0, channel) == 0.0


def test_yield_unit_transmittance():
    channel = _channel_with(1.0, 0.0)
    for m in (1, 2, 5):
        assert channel_yield(m, channel) == 1.0


def test_yield_known_value():
    dark = 1.0 - math.sqrt(1.0 - 1e-5)  # Y0 = 1e-5 exactly
    channel = _channel_with(0.1, dark)
    assert math.isclose(channel_yield(1, channel), YIELD_EXAMPLE, rel_tol=1e-9)


def test_transmittance_decays_with_distance():
    channel = ChannelModel(distance_km=50.0)
    assert math.isclose(
        channel.transmittance, 0.25 * 10 ** (-0.2 * 50 / 10), rel_tol=1e-12
    )
    assert validate_channel(channel) == []


def test_expected_no_errors_without_noise(config_1e6):
    channel = ChannelModel(
        distance_km=0.0, detector_efficiency=1.0, dark_count_prob=0.0, misalignment=0.0
    )
    observed, truth = expected_counts(config_1e6, channel)
    assert observed.z_err.total == 0 and observed.x_err.total == 0
    assert truth.z_err_single() == 0


def test_expected_vacuum_intensity_sees_only_darks(config_1e6):
    channel = ChannelModel(
        distance_km=0.0, detector_efficiency=1.0, dark_count_prob=1e-4, misalignment=0.0
    )
    observed, _ = expected_counts(config_1e6, channel)
    iset = config_1e6.intensity_set
    dark_floor = (
        config_1e6.N * iset.p_v * channel.dark_click_prob * config_1e6.p_keep / 4.0
    )
    assert observed.z_det.m_v == round(dark_floor)


def test_expected_detection_total_matches_yields(config_1e6, channel_10km):
    observed, truth = expected_counts(config_1e6, channel_10km)
    expected_total = 0.0
    for mu, p_mu in config_1e6.intensity_set.pairs():
        per_pulse = 1.0 - (1.0 - channel_10km.dark_click_prob) * math.exp(
            -mu * channel_10km.transmittance
        )
        expected_total += config_1e6.N * p_mu * per_pulse
    keep_sifted = observed.z_det.total + observed.x_det.total
    # 18 rounded ground-truth cells bound the aggregation error
    assert abs(keep_sifted - expected_total * config_1e6.p_keep / 2.0) <= 9.0
    assert truth.consistent_with(observed) == []


def test_expected_counts_deterministic(config_1e9, channel_10km):
    first, _ = expected_counts(config_1e9, channel_10km)
    second, _ = expected_counts(config_1e9, channel_10km)
    assert first == second


def test_sampled_ground_truth_marginals_exact(config_1e6, channel_10km):
    for seed in (0, 1, 2, 3):
        observed, truth = sample_counts(config_1e6, channel_10km, seed)
        assert truth.consistent_with(observed) == []
        assert observed.validate() == []


def test_sampled_determinism(config_1e6, channel_10km):
    first = sample_counts(config_1e6, channel_10km, seed=42)
    again = sample_counts(config_1e6, channel_10km, seed=42)
    other = sample_counts(config_1e6, channel_10km, seed=43)
    assert first[0] == again[0]
    assert first[1].z_det == again[1].z_det
    assert first[0] != other[0]


def test_sampled_zero_rounds(channel_10km):
    config = replace(reference_config(10**6), N=0)
    observed, truth = sample_counts(config, channel_10km, seed=1)
    assert observed.z_det.total == 0 and observed.n_sifted_det == 0
    assert truth.trash_minus_single == 0


def test_sampled_means_match_expectation(channel_10km):
    config = reference_config(10**6)
    expected, _ = expected_counts(config, channel_10km)
    samples = [sample_counts(config, channel_10km, s)[0] for s in range(200)]
    for pick, target in (
        (lambda o: o.z_det.total, expected.z_det.total),
        (lambda o: o.x_err.total, expected.x_err.total),
        (lambda o: o.n_sifted_det, expected.n_sifted_det),
    ):
        totals = np.array([pick(o) for o in samples])
        spread = totals.std(ddof=1) / math.sqrt(len(totals))
        assert abs(totals.mean() - target) <= 5.0 * max(spread, 1.0)


def test_sampled_coin_tally_present(config_1e6, channel_10km):
    observed, truth = sample_counts(config_1e6, channel_10km, 7, coin_minus_prob=0.01)
    p1 = single_photon_prob(config_1e6.intensity_set)
    mean = config_1e6.N * p1 * (1 - config_1e6.p_keep) / 2.0 * 0.01
    assert truth.trash_minus_single > 0
    assert abs(truth.trash_minus_single - mean) < 10.0 * math.sqrt(mean)


MODEL = CorrelationModel(delta_1=0.3, decay_C=0.5)


def test_coin_mc_ideal_encoder_is_silent(config_1e6):
    deltas = ExplicitDeltas(np.full((1, 2, 2), 0.2))
    tallies = coin_monte_carlo(10**5, config_1e6, deltas, 1, trials=50, seed=3)
    assert (tallies == 0).all()


def test_coin_mc_no_trash_rounds_is_silent():
    config = replace(reference_config(10**6), p_keep=1.0)
    deltas = extreme_deltas(MODEL, 1)
    tallies = coin_monte_carlo(10**5, config, deltas, 1, trials=50, seed=3)
    assert (tallies == 0).all()


def test_coin_mc_deterministic(config_1e6):
    deltas = extreme_deltas(MODEL, 1)
    first = coin_monte_carlo(10**5, config_1e6, deltas, 1, trials=20, seed=11)
    again = coin_monte_carlo(10**5, config_1e6, deltas, 1, trials=20, seed=11)
    assert (first == again).all()


def test_coin_mc_round_probability_matches_exact(config_1e6):
    rng = np.random.default_rng(5)
    table = rng.uniform(-0.1, 0.1, size=(2, 2, 2))
    deltas = ExplicitDeltas(table)
    iset = config_1e6.intensity_set
    assert round_minus_probability(2, deltas, iset) == exact_coin_parameter(2, deltas, iset)


def test_coin_mc_rejects_large_lc(config_1e6):
    deltas = ExplicitDeltas(np.zeros((5, 2, 2)))
    with pytest.raises(ValueError):
        coin_monte_carlo(10**4, config_1e6, deltas, 4, trials=5, seed=1)
