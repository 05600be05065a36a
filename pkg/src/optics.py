"""
Closed-form interferometer mathematics for time-bin phase encoding

Alice's unbalanced interferometer splits each source pulse into a bright
reference (short arm) and a phase-modulated signal (long arm, delayed by dt).
Bob's interferometer splits both again, so his detector sees three slots:

    t1  reference via Bob's short arm
    t2  signal via short arm + reference via long arm (these interfere)
    t3  signal via Bob's long arm

Intensities here are mean photon numbers; the splitters are lossless.
"""

import math
from typing import Tuple

from .models import Phase, TimeBinPulsePair, SlotIntensities, ZERO, PI, bit_to_phase


# Share of each path reaching one output port of Bob's final combiner
COMBINER_PORT_SHARE = 0.5


def _check_ratio(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")


def interfere(phi_a: Phase, phi_b: Phase) -> float:
    """Relative t2 intensity cos²((φA − φB)/2)"""
    return 0.5 * (1.0 + math.cos(phi_a.value - phi_b.value))


def encode(mu_source: float, bit: int, split_ratio: float = 0.5, dt: float = 1.0) -> TimeBinPulsePair:
    """
    Split a source pulse into reference and signal, phase-encoding the bit

    Args:
        mu_source: Mean photon number leaving the source
        bit: 0 (phase 0) or 1 (phase π)
        split_ratio: Fraction r of the energy sent down the signal arm
        dt: Separation between the two pulses

    Raises:
        ValueError: If mu_source < 0 or r is outside (0, 1)
    """
    if mu_source < 0:
        raise ValueError(f"mu_source must be >= 0, got {mu_source}")
    _check_ratio("split_ratio", split_ratio)
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")

    return TimeBinPulsePair(
        mu_ref=mu_source * (1.0 - split_ratio),
        mu_sig=mu_source * split_ratio,
        phase=bit_to_phase(bit),
        dt=dt
    )


def _path_terms(pair: TimeBinPulsePair, split_ratio: float) -> Tuple[float, float, float, float]:
    """Per-port path energies: (t1, t3, signal-short, reference-long)"""
    k = COMBINER_PORT_SHARE
    t1 = pair.mu_ref * (1.0 - split_ratio) * k
    t3 = pair.mu_sig * split_ratio * k
    a1_sq = pair.mu_sig * (1.0 - split_ratio) * k
    a2_sq = pair.mu_ref * split_ratio * k
    return t1, t3, a1_sq, a2_sq


def slot_intensities(pair: TimeBinPulsePair, phi_b: Phase, split_ratio: float = 0.5) -> SlotIntensities:
    """
    Mean photon numbers in Bob's detection slots

    Args:
        pair: Pulse pair as it arrives at Bob
        phi_b: Bob's phase modulator setting (on his long arm)
        split_ratio: Fraction s of each pulse sent down Bob's long arm

    Raises:
        ValueError: If s is outside (0, 1)
    """
    _check_ratio("split_ratio", split_ratio)
    t1, t3, a1_sq, a2_sq = _path_terms(pair, split_ratio)
    cross = 2.0 * math.sqrt(a1_sq * a2_sq) * math.cos(pair.phase.value - phi_b.value)

    return SlotIntensities(
        t1=t1,
        t2=max(0.0, a1_sq + a2_sq + cross),
        t3=t3,
        t2_other_port=max(0.0, a1_sq + a2_sq - cross)
    )


def total_energy(slots: SlotIntensities, pair: TimeBinPulsePair, split_ratio: float = 0.5) -> float:
    """Energy summed over both combiner ports and all three slots"""
    other_t1 = pair.mu_ref * (1.0 - split_ratio) * (1.0 - COMBINER_PORT_SHARE)
    other_t3 = pair.mu_sig * split_ratio * (1.0 - COMBINER_PORT_SHARE)
    return slots.t1 + slots.t2 + slots.t3 + other_t1 + slots.t2_other_port + other_t3


def photon_routing(pair: TimeBinPulsePair, phi_b: Phase, split_ratio: float = 0.5) -> Tuple[float, ...]:
    """
    Probabilities that one photon of the pair ends up in each output slot

    Returns:
        (t1, t2, t3, t1_other, t2_other, t3_other), summing to 1

    Raises:
        ValueError: For a vacuum pair, which has no photon to route
    """
    energy = pair.energy
    if energy <= 0:
        raise ValueError("Cannot route photons of a vacuum pulse pair")

    slots = slot_intensities(pair, phi_b, split_ratio)
    other_t1 = pair.mu_ref * (1.0 - split_ratio) * (1.0 - COMBINER_PORT_SHARE)
    other_t3 = pair.mu_sig * split_ratio * (1.0 - COMBINER_PORT_SHARE)
    shares = (slots.t1, slots.t2, slots.t3, other_t1, slots.t2_other_port, other_t3)
    total = sum(shares)
    return tuple(share / total for share in shares)


def visibility(alice_ratio: float = 0.5, bob_ratio: float = 0.5) -> float:
    """Fringe contrast at t2 between matched and mismatched phases"""
    pair = encode(1.0, 0, alice_ratio)
    t2_max = slot_intensities(pair, ZERO, bob_ratio).t2
    t2_min = slot_intensities(pair, PI, bob_ratio).t2
    return (t2_max - t2_min) / (t2_max + t2_min)
