#!/usr/bin/env python3
"""
Photon statistics, threshold detection and the per-pulse random streams

The Poisson and thinning checks are chi-square goodness-of-fit tests against
scipy's pmf. They are probabilistic, so seeds are fixed and alpha is kept
conservative.
"""
import math

import numpy as np
import pytest
from scipy import stats

from src.config import DetectorParams
from src.models import SlotIntensities
from src.stochastic import (
    RngStream, ALICE, BOB, EVE, CHANNEL,
    sample_photon_number, thin, click_probability, detect_slot, detect, route_photons
)


ALPHA = 0.001
N_SAMPLES = 100_000


def _poisson_chisquare(samples: np.ndarray, mu: float) -> float:
    """p-value of samples against Poisson(mu), tail merged so every bin expects >= 5"""
    n = len(samples)
    ks = []
    k = 0
    while n * stats.poisson.sf(k, mu) >= 5:
        ks.append(k)
        k += 1

    counts = np.bincount(samples, minlength=k + 1)
    observed = [counts[i] for i in ks] + [int(np.sum(samples > ks[-1]))]
    expected = [n * stats.poisson.pmf(i, mu) for i in ks] + [n * stats.poisson.sf(ks[-1], mu)]
    _, p_value = stats.chisquare(observed, expected)
    return p_value


@pytest.mark.statistical
@pytest.mark.parametrize("mu", [0.1, 0.5, 1.0, 5.0])
def test_poisson_sampler_fidelity(mu):
    rng = RngStream(seed=1234, stream_id=0).generator()
    samples = np.array([sample_photon_number(mu, rng) for _ in range(N_SAMPLES)])
    p_value = _poisson_chisquare(samples, mu)
    assert p_value > ALPHA, f"Poisson({mu}) chi-square failed: p={p_value:.4g}"


@pytest.mark.statistical
@pytest.mark.parametrize("mu, transmittance", [(1.0, 0.3), (5.0, 0.1), (0.5, 0.8)])
def test_thinning_equivalence(mu, transmittance):
    """Poisson(mu) thinned by T is Poisson(mu*T)"""
    rng = RngStream(seed=99, stream_id=7).generator()
    samples = np.array([thin(sample_photon_number(mu, rng), transmittance, rng) for _ in range(N_SAMPLES)])
    p_value = _poisson_chisquare(samples, mu * transmittance)
    assert p_value > ALPHA, f"thin(Poisson({mu}), {transmittance}) chi-square failed: p={p_value:.4g}"


def test_sampler_edge_cases():
    rng = RngStream(seed=1, stream_id=1).generator()
    assert sample_photon_number(0.0, rng) == 0
    with pytest.raises(ValueError):
        sample_photon_number(-0.1, rng)

    assert thin(0, 0.5, rng) == 0
    assert thin(7, 1.0, rng) == 7
    assert thin(7, 0.0, rng) == 0
    with pytest.raises(ValueError):
        thin(3, 1.5, rng)
    with pytest.raises(ValueError):
        thin(-1, 0.5, rng)


def test_click_probability_closed_form():
    det = DetectorParams(efficiency=0.5, dark_count_prob=0.01)
    assert click_probability(0.0, det) == pytest.approx(0.01)
    assert click_probability(2.0, det) == pytest.approx(1 - 0.99 * math.exp(-1.0))
    assert click_probability(0.0, DetectorParams()) == 0.0


@pytest.mark.statistical
@pytest.mark.parametrize("mu_slot, det, expected", [
    (1.0, DetectorParams(efficiency=1.0, dark_count_prob=0.0), 1 - math.exp(-1)),
    (0.0, DetectorParams(efficiency=1.0, dark_count_prob=0.01), 0.01),
])
def test_detector_click_rate(mu_slot, det, expected):
    trials = 1_000_000
    rng = RngStream(seed=2024, stream_id=3).generator()
    clicks = sum(detect_slot(mu_slot, det, rng) for _ in range(trials))
    rate = clicks / trials
    sigma = math.sqrt(expected * (1 - expected) / trials)
    assert abs(rate - expected) < 3 * sigma, f"click rate {rate:.5f} vs {expected:.5f} (3σ={3 * sigma:.5f})"


def test_detector_monotone_in_intensity():
    det = DetectorParams(efficiency=0.3, dark_count_prob=1e-4)
    probs = [click_probability(mu, det) for mu in (0.0, 0.01, 0.1, 1.0, 10.0)]
    assert probs == sorted(probs)
    assert len(set(probs)) == len(probs)

    with pytest.raises(ValueError):
        detect_slot(-1.0, det, RngStream(0, 0).generator())


def test_detect_reads_every_slot():
    rng = RngStream(seed=5, stream_id=5).generator()
    certain = DetectorParams(efficiency=1.0, dark_count_prob=1.0)
    pattern = detect(SlotIntensities(0.0, 0.0, 0.0), certain, rng)
    assert pattern.t1 and pattern.t2 and pattern.t3

    silent = detect(SlotIntensities(0.0, 0.0, 0.0), DetectorParams(), rng)
    assert not silent.any


def test_streams_are_reproducible_and_distinct():
    a = RngStream(seed=42, stream_id=17).generator().random(5)
    b = RngStream(seed=42, stream_id=17).generator().random(5)
    np.testing.assert_array_equal(a, b)

    other_stream = RngStream(seed=42, stream_id=18).generator().random(5)
    other_seed = RngStream(seed=43, stream_id=17).generator().random(5)
    assert not np.array_equal(a, other_stream)
    assert not np.array_equal(a, other_seed)


def test_stream_ids_per_pulse():
    assert RngStream.for_pulse(7, 1, ALICE).stream_id == 4
    assert RngStream.for_pulse(7, 1, BOB).stream_id == 5
    assert RngStream.for_pulse(7, 1, EVE).stream_id == 6
    assert RngStream.for_pulse(7, 2, CHANNEL).stream_id == 11

    with pytest.raises(ValueError):
        RngStream(seed=-1, stream_id=0)
    with pytest.raises(ValueError):
        RngStream(seed=2 ** 64, stream_id=0)


def test_route_photons():
    rng = RngStream(seed=3, stream_id=9).generator()
    assert route_photons(0, (1, 0, 0, 0, 0, 0), rng) == (0, 0, 0)
    assert route_photons(5, (0, 1, 0, 0, 0, 0), rng) == (0, 5, 0)
    assert route_photons(5, (0, 0, 0, 0, 1, 0), rng) == (0, 0, 0)

    counts = route_photons(100, (0.1, 0.2, 0.1, 0.2, 0.2, 0.2), rng)
    assert sum(counts) <= 100


@pytest.mark.statistical
def test_thinning_composes():
    """thin(T1) after thin(T2) matches thin(T1*T2) on a small photon count"""
    n, t1, t2 = 6, 0.7, 0.4
    rng = RngStream(seed=555, stream_id=2).generator()
    samples = np.array([thin(thin(n, t2, rng), t1, rng) for _ in range(N_SAMPLES)])
    observed = np.bincount(samples, minlength=n + 1)
    expected = N_SAMPLES * stats.binom.pmf(np.arange(n + 1), n, t1 * t2)
    _, p_value = stats.chisquare(observed[:5].tolist() + [observed[5:].sum()],
                                 expected[:5].tolist() + [expected[5:].sum()])
    assert p_value > ALPHA, f"thinning composition chi-square failed: p={p_value:.4g}"


@pytest.mark.statistical
def test_detect_t2_marginal():
    trials = 100_000
    rng = RngStream(seed=8, stream_id=1).generator()
    slots = SlotIntensities(0.125, 0.5, 0.125)
    ideal = DetectorParams(efficiency=1.0, dark_count_prob=0.0)
    rate = sum(detect(slots, ideal, rng).t2 for _ in range(trials)) / trials
    expected = 1 - math.exp(-0.5)
    assert abs(rate - expected) < 3 * math.sqrt(expected * (1 - expected) / trials)

    # Destructive interference at t2 never clicks
    assert not any(detect(SlotIntensities(0.125, 0.0, 0.125), ideal, rng).t2 for _ in range(1000))


def test_click_probability_monotone_in_detector_params():
    efficiencies = [click_probability(0.5, DetectorParams(efficiency=e, dark_count_prob=1e-3))
                    for e in (0.0, 0.1, 0.5, 1.0)]
    darks = [click_probability(0.5, DetectorParams(efficiency=0.2, dark_count_prob=p))
             for p in (0.0, 1e-5, 1e-2, 0.5)]
    assert efficiencies == sorted(efficiencies)
    assert darks == sorted(darks)


@pytest.mark.statistical
@pytest.mark.parametrize("mu_low, mu_high, det", [
    (0.1, 0.5, DetectorParams(efficiency=0.5, dark_count_prob=0.0)),
    (0.5, 0.5, None),
])
def test_click_rate_grows_with_efficiency_and_intensity(mu_low, mu_high, det):
    """Sampled click rates follow the closed-form ordering"""
    trials = 100_000
    low = det or DetectorParams(efficiency=0.2, dark_count_prob=1e-3)
    high = det or DetectorParams(efficiency=0.8, dark_count_prob=1e-3)
    rng = RngStream(seed=21, stream_id=4).generator()
    low_rate = sum(detect_slot(mu_low, low, rng) for _ in range(trials)) / trials
    high_rate = sum(detect_slot(mu_high, high, rng) for _ in range(trials)) / trials
    assert low_rate < high_rate
