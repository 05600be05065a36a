#!/usr/bin/env python3
"""
Photon-number-splitting eavesdropper

The leakage checks compare the simulated known fraction with a
conditional-Poisson oracle coded here from scratch: with T = 1, ideal
detectors and r = s = 0.5, a matched pulse that reaches Bob with m photons
gives a t2 click with probability 1 - (1/2)^m, and Eve holds a photon
exactly when the source emitted n >= 2 (she forwards n - 1).
"""
import math

import pytest
from scipy import stats

from src.config import SessionConfig, ChannelParams, DetectorParams, PnsStrategy
from src.models import EveLedger, NoStatisticsError
from src.adversary import intercept, learn
from src.protocol import run_session
from src.stochastic import RngStream


IDEAL = DetectorParams(efficiency=1.0, dark_count_prob=0.0)
FORWARD_ALL = PnsStrategy(store_count=1, block_singles_prob=0.0, lossless_forward=False)


def known_fraction_oracle(mu: float, n_max: int = 60) -> float:
    """P(Eve holds a photon | pulse sifted)"""
    p_t2 = 0.5
    single = stats.poisson.pmf(1, mu) * p_t2
    multi = sum(stats.poisson.pmf(n, mu) * (1 - (1 - p_t2) ** (n - 1)) for n in range(2, n_max))
    return multi / (single + multi)


def test_intercept_cases():
    rng = RngStream(0, 2).generator()

    vacuum = intercept(0, FORWARD_ALL, rng)
    assert (vacuum.stored, vacuum.forwarded, vacuum.blocked) == (0, 0, False)

    single = intercept(1, FORWARD_ALL, rng)
    assert (single.stored, single.forwarded, single.blocked) == (0, 1, False)

    blocked = intercept(1, PnsStrategy(block_singles_prob=1.0), rng)
    assert (blocked.stored, blocked.forwarded, blocked.blocked) == (0, 0, True)

    greedy = PnsStrategy(store_count=3)
    assert (intercept(5, greedy, rng).stored, intercept(5, greedy, rng).forwarded) == (3, 2)
    # At least one photon always goes on to Bob
    assert (intercept(2, greedy, rng).stored, intercept(2, greedy, rng).forwarded) == (1, 1)

    with pytest.raises(ValueError):
        intercept(-1, FORWARD_ALL, rng)


def test_learn():
    ledger = EveLedger(stored={2: 1, 5: 2, 9: 1})
    fraction = learn(ledger, [1, 2, 5, 7], [0, 1, 1, 0])
    assert fraction == pytest.approx(0.5)
    assert ledger.known_bits == {2: 1, 5: 1}

    with pytest.raises(NoStatisticsError):
        learn(EveLedger(), [], [])
    with pytest.raises(ValueError):
        learn(EveLedger(), [1, 2], [0])


@pytest.mark.statistical
def test_known_fraction_matches_oracle_and_grows_with_mu():
    fractions = []
    for mu in (0.1, 0.5, 1.0):
        cfg = SessionConfig(n_pulses=100_000, mu=mu, seed=1000 + int(mu * 10),
                            detector=IDEAL, eve=FORWARD_ALL)
        stats_ = run_session(cfg).stats
        expected = known_fraction_oracle(mu)
        sigma = math.sqrt(expected * (1 - expected) / stats_.sifted_len)
        assert abs(stats_.eve_known_fraction - expected) < 3 * sigma, (
            f"mu={mu}: Eve knows {stats_.eve_known_fraction:.4f}, oracle {expected:.4f} (3σ={3 * sigma:.4f})"
        )
        assert stats_.qber == 0.0
        fractions.append(stats_.eve_known_fraction)

    assert fractions == sorted(fractions)
    assert fractions[0] < fractions[1] < fractions[2]


def test_stealth_strategy_learns_whole_key():
    """Blocking singles and replacing the fiber leaves only pulses Eve has tapped"""
    cfg = SessionConfig(
        n_pulses=20_000,
        mu=1.0,
        seed=5,
        channel=ChannelParams(length_km=50.0),
        detector=IDEAL,
        eve=PnsStrategy(store_count=1, block_singles_prob=1.0, lossless_forward=True),
    )
    result = run_session(cfg)
    assert result.stats.sifted_len > 0
    assert result.stats.eve_known_fraction == 1.0
    assert result.stats.qber == 0.0


def test_textbook_two_photon_pulses_leak_everything():
    cfg = SessionConfig(n_pulses=200, mode="textbook", textbook_photon_number=2,
                        seed=17, eve=FORWARD_ALL)
    result = run_session(cfg)
    assert result.stats.sifted_len > 0
    assert result.stats.eve_known_fraction == 1.0
    assert all(r.eve_stored == 1 for r in result.records)


def test_textbook_single_photons_leak_nothing():
    cfg = SessionConfig(n_pulses=200, mode="textbook", seed=17, eve=FORWARD_ALL)
    assert run_session(cfg).stats.eve_known_fraction == 0.0


def test_no_eve_reports_no_fraction():
    cfg = SessionConfig(n_pulses=500, mode="textbook", seed=3)
    assert run_session(cfg).stats.eve_known_fraction is None
