"""
Closed-form expected rates for an eavesdropper-free stochastic session

Each pulse arrives as a weak coherent pair of mean μ·T, so the photon
number reaching Bob's t2 slot is Poisson with mean μ·T·t2 (t2 per unit
energy). Half of the pulses are phase-matched (correct bit on a t2 click),
half mismatched (wrong bit); a phase flip in the fiber swaps the halves.
Background and dark counts add to both.
"""

from dataclasses import replace
from typing import Optional, Tuple

from .config import SessionConfig
from .models import ZERO, PI
from . import optics
from .channel import transmittance, phase_flip_probability
from .stochastic import click_probability


def _unit_t2(cfg: SessionConfig) -> Tuple[float, float]:
    """t2 intensity per unit source energy for matched and mismatched phases"""
    pair = optics.encode(1.0, 0, cfg.split_ratio_alice, cfg.dt)
    matched = optics.slot_intensities(pair, ZERO, cfg.split_ratio_bob).t2
    mismatched = optics.slot_intensities(pair, PI, cfg.split_ratio_bob).t2
    return matched, mismatched


def _click_halves(cfg: SessionConfig) -> Tuple[float, float]:
    """t2 click probability for (matched, mismatched) pulses"""
    t = transmittance(cfg.channel)
    background = cfg.channel.background_mu
    matched_t2, mismatched_t2 = _unit_t2(cfg)

    p_right = click_probability(cfg.mu * t * matched_t2 + background, cfg.detector)
    p_wrong = click_probability(cfg.mu * t * mismatched_t2 + background, cfg.detector)

    flip = phase_flip_probability(cfg.channel)
    matched = (1.0 - flip) * p_right + flip * p_wrong
    mismatched = (1.0 - flip) * p_wrong + flip * p_right
    return matched, mismatched


def expected_sift_rate(cfg: SessionConfig) -> float:
    """Expected fraction of pulses giving a conclusive t2 click"""
    matched, mismatched = _click_halves(cfg)
    return 0.5 * (matched + mismatched)


def expected_qber(cfg: SessionConfig) -> Optional[float]:
    """Expected error fraction of the sifted key; None if nothing ever clicks"""
    matched, mismatched = _click_halves(cfg)
    total = matched + mismatched
    if total == 0:
        return None
    return mismatched / total


def crossover_distance(cfg: SessionConfig, threshold: float = 0.11,
                       max_km: float = 500.0, tolerance_km: float = 1e-3) -> Optional[float]:
    """
    Fiber length beyond which the expected QBER exceeds the threshold

    Args:
        cfg: Base configuration (its channel length is ignored)
        threshold: QBER limit, 0.11 by default
        max_km: Upper end of the search
        tolerance_km: Bisection stopping width

    Returns:
        Crossover length in km, 0.0 if the QBER is already above the
        threshold at zero length, or None if it never crosses below max_km
    """
    def qber_at(length: float) -> float:
        value = expected_qber(replace(cfg, channel=replace(cfg.channel, length_km=length)))
        return 0.5 if value is None else value

    if qber_at(0.0) > threshold:
        return 0.0
    if qber_at(max_km) <= threshold:
        return None

    low, high = 0.0, max_km
    while high - low > tolerance_km:
        mid = 0.5 * (low + high)
        if qber_at(mid) > threshold:
            high = mid
        else:
            low = mid
    return high

