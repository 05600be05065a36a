"""Seeded random streams, photon statistics and the threshold detector model"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .config import DetectorParams
from .models import SlotIntensities, ClickPattern


# Party tags used to derive per-pulse stream ids
ALICE = 0
BOB = 1
EVE = 2
CHANNEL = 3
PARTIES = 4


@dataclass(frozen=True)
class RngStream:
    """
    Counter-based random stream identified by (seed, stream_id)

    The seed keys a Philox generator and the stream id occupies the high
    word of its 256-bit counter, so every stream owns a disjoint block of
    the Philox sequence. stream_id = pulse_index * 4 + party_tag.
    """
    seed: int
    stream_id: int

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not 0 <= self.stream_id < 2 ** 64:
            raise ValueError(f"stream_id must be an unsigned 64-bit integer, got {self.stream_id}")

    @classmethod
    def for_pulse(cls, seed: int, pulse_index: int, party: int) -> 'RngStream':
        return cls(seed, pulse_index * PARTIES + party)

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream"""
        return np.random.Generator(np.random.Philox(key=self.seed, counter=self.stream_id << 192))


def sample_photon_number(mu: float, rng: np.random.Generator) -> int:
    """
    Draw a photon number from Poisson(mu)

    Raises:
        ValueError: If mu < 0
    """
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if mu == 0:
        return 0
    return int(rng.poisson(mu))


def thin(n: int, transmittance: float, rng: np.random.Generator) -> int:
    """
    Keep each of n photons independently with probability T

    Raises:
        ValueError: If T is outside [0, 1] or n < 0
    """
    if not 0.0 <= transmittance <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {transmittance}")
    if n < 0:
        raise ValueError(f"photon count must be >= 0, got {n}")
    if n == 0 or transmittance == 1.0:
        return n
    if transmittance == 0.0:
        return 0
    return int(rng.binomial(n, transmittance))


def click_probability(mu_slot: float, det: DetectorParams) -> float:
    """1 − (1 − p_dark)·e^(−η·μ)"""
    return 1.0 - (1.0 - det.dark_count_prob) * math.exp(-det.efficiency * mu_slot)


def detect_slot(mu_slot: float, det: DetectorParams, rng: np.random.Generator) -> bool:
    """
    Threshold detector reading for one slot of mean intensity mu_slot

    Raises:
        ValueError: If mu_slot < 0
    """
    if mu_slot < 0:
        raise ValueError(f"mu_slot must be >= 0, got {mu_slot}")
    return bool(rng.random() < click_probability(mu_slot, det))


def detect(slots: SlotIntensities, det: DetectorParams, rng: np.random.Generator) -> ClickPattern:
    """Independent detect_slot readings for t1, t2, t3"""
    return ClickPattern(
        t1=detect_slot(slots.t1, det, rng),
        t2=detect_slot(slots.t2, det, rng),
        t3=detect_slot(slots.t3, det, rng)
    )


def route_photons(n: int, probs: Sequence[float], rng: np.random.Generator) -> Tuple[int, int, int]:
    """
    Distribute n photons over the output slots

    Args:
        n: Photons entering Bob's interferometer
        probs: Per-photon slot probabilities, detector port first (t1, t2, t3, ...)

    Returns:
        Photon counts in the detector-port slots (t1, t2, t3)
    """
    if n == 0:
        return (0, 0, 0)
    counts = rng.multinomial(n, np.asarray(probs, dtype=float))
    return int(counts[0]), int(counts[1]), int(counts[2])
