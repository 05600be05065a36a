"""B92 state machines for Alice and Bob, sifting and key accounting"""

import logging
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import SessionConfig, ChannelParams, validate
from .models import (
    Phase, ZERO, PI, ClickPattern, Outcome, INCONCLUSIVE, PulseRecord,
    SiftedKey, EveLedger, SessionStats, SessionResult, NoStatisticsError,
    bit_to_phase, phase_to_bit
)
from . import optics
from .adversary import intercept, learn
from .channel import propagate
from .stochastic import (
    RngStream, ALICE, BOB, EVE, CHANNEL,
    sample_photon_number, thin, detect, route_photons
)


logger = logging.getLogger(__name__)

# Relative t2 intensity counted as "phase matched" in textbook mode
TEXTBOOK_MATCH_TOLERANCE = 1e-9


def alice_prepare(bit: int) -> Phase:
    """Bit 0 → phase 0, bit 1 → phase π"""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return bit_to_phase(bit)


def bob_choose_phase(rng: np.random.Generator) -> Phase:
    """Bob's random basis: 0 or π with equal probability"""
    return PI if rng.integers(2) else ZERO


def bob_measure(clicks: ClickPattern, bob_phase: Phase) -> Outcome:
    """Only t2 is read: a click there yields the bit matching Bob's phase"""
    if clicks.t2:
        return Outcome.conclusive_bit(phase_to_bit(bob_phase))
    return INCONCLUSIVE


def sift(records: Sequence[PulseRecord]) -> Tuple[SiftedKey, SiftedKey]:
    """
    Keep the conclusive positions Bob announces

    Returns:
        (alice_key, bob_key) over the same positions
    """
    kept = [r for r in sorted(records, key=lambda r: r.index) if r.outcome.conclusive]
    positions = [r.index for r in kept]
    alice_key = SiftedKey(bits=[r.alice_bit for r in kept], positions=list(positions))
    bob_key = SiftedKey(bits=[r.outcome.bit for r in kept], positions=list(positions))
    return alice_key, bob_key


def compute_qber(alice_key: SiftedKey, bob_key: SiftedKey) -> float:
    """
    Fraction of sifted positions where the keys disagree

    Raises:
        ValueError: If the keys have different lengths
        NoStatisticsError: If the keys are empty
    """
    if len(alice_key) != len(bob_key):
        raise ValueError(f"Key lengths differ: {len(alice_key)} vs {len(bob_key)}")
    if len(alice_key) == 0:
        raise NoStatisticsError("Empty sifted key: QBER is undefined")
    errors = sum(1 for a, b in zip(alice_key.bits, bob_key.bits) if a != b)
    return errors / len(alice_key)


def _textbook_clicks(alice_phase: Phase, bob_phase: Phase, photons: int) -> ClickPattern:
    """Ideal single-photon detection: t2 fires iff the phases match"""
    if photons < 1:
        return ClickPattern()
    relative = optics.interfere(alice_phase, bob_phase)
    return ClickPattern(t2=relative >= 1.0 - TEXTBOOK_MATCH_TOLERANCE)


def _stochastic_clicks(cfg: SessionConfig, pair, bob_phase: Phase, photons: int,
                       channel: ChannelParams, channel_rng: np.random.Generator,
                       bob_rng: np.random.Generator) -> ClickPattern:
    """Fiber, interferometer routing and threshold detection for one pulse"""
    arrived = propagate(pair, photons, channel, channel_rng)

    counts = (0, 0, 0)
    if arrived.photons > 0:
        probs = optics.photon_routing(arrived.pair, bob_phase, cfg.split_ratio_bob)
        counts = route_photons(arrived.photons, probs, bob_rng)

    signal = ClickPattern(*(thin(k, cfg.detector.efficiency, bob_rng) > 0 for k in counts))
    noise = detect(arrived.background, cfg.detector, bob_rng)
    return signal | noise


def _collect_stats(records: Sequence[PulseRecord], alice_key: SiftedKey,
                   bob_key: SiftedKey, ledger: Optional[EveLedger]) -> SessionStats:
    stats = SessionStats(sent=len(records))
    for record in records:
        stats.clicks_t1 += record.clicks.t1
        stats.clicks_t2 += record.clicks.t2
        stats.clicks_t3 += record.clicks.t3
        stats.double_clicks += record.clicks.is_double

    stats.sifted_len = len(bob_key)
    stats.sift_rate = stats.sifted_len / stats.sent if stats.sent else 0.0
    try:
        stats.qber = compute_qber(alice_key, bob_key)
    except NoStatisticsError:
        stats.qber = None

    if ledger is not None:
        try:
            stats.eve_known_fraction = learn(ledger, alice_key.positions, alice_key.bits)
        except NoStatisticsError:
            stats.eve_known_fraction = None
    return stats


def run_session(cfg: SessionConfig) -> SessionResult:
    """
    Run one B92 session pulse by pulse

    Each pulse draws from its own streams (stream_id = index·4 + party), so
    toggling Eve never changes Alice's bits or Bob's bases.

    Args:
        cfg: Session configuration (validated here)

    Returns:
        SessionResult with records, both sifted keys, stats and Eve's ledger

    Raises:
        ConfigValidationError: If the config is invalid
    """
    validate(cfg)
    textbook = cfg.mode == "textbook"
    ledger = EveLedger() if cfg.eve is not None else None

    # Eve's own line replaces the fiber for what she forwards
    channel = cfg.channel
    if cfg.eve is not None and cfg.eve.lossless_forward:
        channel = replace(channel, length_km=0.0)

    logger.debug("Session start: %d pulses, mode=%s, mu=%g, seed=%d, eve=%s",
                 cfg.n_pulses, cfg.mode, cfg.mu, cfg.seed, cfg.eve is not None)

    records: List[PulseRecord] = []
    for offset in range(cfg.n_pulses):
        index = offset + 1
        alice_rng = RngStream.for_pulse(cfg.seed, index, ALICE).generator()
        bob_rng = RngStream.for_pulse(cfg.seed, index, BOB).generator()

        if cfg.fixture_bits is not None:
            bit = int(cfg.fixture_bits[offset])
        else:
            bit = int(alice_rng.integers(2))
        alice_phase = alice_prepare(bit)

        if cfg.fixture_phases is not None:
            bob_phase = Phase.from_degrees(cfg.fixture_phases[offset])
        else:
            bob_phase = bob_choose_phase(bob_rng)

        if textbook:
            n_source = cfg.textbook_photon_number
        else:
            n_source = sample_photon_number(cfg.mu, alice_rng)

        stored, forwarded = 0, n_source
        if cfg.eve is not None:
            eve_rng = RngStream.for_pulse(cfg.seed, index, EVE).generator()
            action = intercept(n_source, cfg.eve, eve_rng)
            stored, forwarded = action.stored, action.forwarded
            if stored:
                ledger.stored[index] = stored

        if textbook:
            clicks = _textbook_clicks(alice_phase, bob_phase, forwarded)
        else:
            pair = optics.encode(cfg.mu, bit, cfg.split_ratio_alice, cfg.dt)
            channel_rng = RngStream.for_pulse(cfg.seed, index, CHANNEL).generator()
            clicks = _stochastic_clicks(cfg, pair, bob_phase, forwarded,
                                        channel, channel_rng, bob_rng)

        records.append(PulseRecord(
            index=index,
            alice_bit=bit,
            alice_phase=alice_phase,
            bob_phase=bob_phase,
            n_source=n_source,
            eve_stored=stored,
            clicks=clicks,
            outcome=bob_measure(clicks, bob_phase)
        ))

    alice_key, bob_key = sift(records)
    stats = _collect_stats(records, alice_key, bob_key, ledger)
    logger.debug("Session done: sifted %d of %d, qber=%s", stats.sifted_len, stats.sent, stats.qber)

    return SessionResult(records=records, alice_key=alice_key, bob_key=bob_key,
                         stats=stats, ledger=ledger)
