"""Fiber-optic quantum channel: attenuation, background noise and phase decoherence"""

import math

import numpy as np

from .config import ChannelParams
from .models import TimeBinPulsePair, SlotIntensities, ChannelOutput
from .stochastic import thin


def transmittance(params: ChannelParams) -> float:
    """T = 10^(−a·L/10)"""
    return 10.0 ** (-params.attenuation_db_per_km * params.length_km / 10.0)


def phase_flip_probability(params: ChannelParams) -> float:
    """1 − e^(−L/Lc); zero when no coherence length is configured"""
    if params.coherence_length_km is None or params.length_km == 0:
        return 0.0
    return 1.0 - math.exp(-params.length_km / params.coherence_length_km)


def background_slots(params: ChannelParams) -> SlotIntensities:
    """Incoherent background, equal in every detection slot"""
    b = params.background_mu
    return SlotIntensities(t1=b, t2=b, t3=b, t2_other_port=0.0)


def propagate(pair: TimeBinPulsePair, photons: int, params: ChannelParams,
              rng: np.random.Generator) -> ChannelOutput:
    """
    Send a pulse pair and its photon count through the fiber

    The photon count describes the superposed time-bin mode, so it is
    thinned as a whole; the pair's mean photon numbers are scaled by T.
    A phase flip (probability from the coherence length) shifts the
    signal phase by π. Background is returned separately because it is
    added after interference and never interferes.

    Args:
        pair: Pulse pair leaving Alice (or Eve)
        photons: Photon count entering the fiber
        params: Channel parameters
        rng: Channel stream generator

    Returns:
        ChannelOutput with the surviving photons and background per slot
    """
    t = transmittance(params)
    survivors = thin(photons, t, rng)

    arriving = pair.scaled(t)
    flipped = False
    p_flip = phase_flip_probability(params)
    if p_flip > 0 and rng.random() < p_flip:
        arriving = TimeBinPulsePair(arriving.mu_ref, arriving.mu_sig,
                                    arriving.phase.shifted(math.pi), arriving.dt)
        flipped = True

    return ChannelOutput(
        photons=survivors,
        pair=arriving,
        background=background_slots(params),
        phase_flipped=flipped
    )
