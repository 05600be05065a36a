"""Photon-number-splitting eavesdropper"""

import logging
from typing import Sequence

import numpy as np

from .config import PnsStrategy
from .models import EveLedger, InterceptResult, NoStatisticsError


logger = logging.getLogger(__name__)


def intercept(n: int, strategy: PnsStrategy, rng: np.random.Generator) -> InterceptResult:
    """
    Split a pulse at Alice's output

    Multiphoton pulses lose up to store_count photons to Eve (at least one
    always continues to Bob); single photons are suppressed with probability
    block_singles_prob; vacuum passes untouched.

    Args:
        n: Photons in the pulse
        strategy: Eve's policy
        rng: Eve's stream generator

    Returns:
        InterceptResult(stored, forwarded, blocked)
    """
    if n < 0:
        raise ValueError(f"photon count must be >= 0, got {n}")
    if n == 0:
        return InterceptResult(stored=0, forwarded=0, blocked=False)
    if n == 1:
        if strategy.block_singles_prob > 0 and rng.random() < strategy.block_singles_prob:
            return InterceptResult(stored=0, forwarded=0, blocked=True)
        return InterceptResult(stored=0, forwarded=1, blocked=False)

    stored = min(strategy.store_count, n - 1)
    return InterceptResult(stored=stored, forwarded=n - stored, blocked=False)


def learn(ledger: EveLedger, sifted_positions: Sequence[int], alice_bits: Sequence[int]) -> float:
    """
    Read out Eve's stored photons once Bob has announced the sifted positions

    Every sifted position where Eve holds a photon gives her Alice's bit.

    Args:
        ledger: Eve's ledger, updated in place with known_bits
        sifted_positions: Pulse indices kept after sifting
        alice_bits: Alice's bits at those positions

    Returns:
        Fraction of the sifted key known to Eve

    Raises:
        NoStatisticsError: If the sifted key is empty
    """
    if len(sifted_positions) != len(alice_bits):
        raise ValueError("sifted_positions and alice_bits must have equal length")
    if not sifted_positions:
        raise NoStatisticsError("Empty sifted key: Eve's known fraction is undefined")

    for position, bit in zip(sifted_positions, alice_bits):
        if ledger.stored.get(position, 0) >= 1:
            ledger.known_bits[position] = bit

    known = sum(1 for position in sifted_positions if position in ledger.known_bits)
    logger.debug("Eve knows %d of %d sifted bits", known, len(sifted_positions))
    return known / len(sifted_positions)
