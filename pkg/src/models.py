"""Data models for the B92 simulator"""

import math
from dataclasses import dataclass, field, asdict
from typing import Optional, List, Dict, Any


class NoStatisticsError(ValueError):
    """Raised when a rate is requested over an empty sample"""
    pass


TWO_PI = 2.0 * math.pi

# Tolerance used when comparing canonical phases
PHASE_TOLERANCE = 1e-12


def _canonical(value: float) -> float:
    """Map an angle onto [0, 2π)"""
    wrapped = math.fmod(value, TWO_PI)
    if wrapped < 0:
        wrapped += TWO_PI
    if TWO_PI - wrapped < PHASE_TOLERANCE or wrapped < PHASE_TOLERANCE:
        return 0.0
    if abs(wrapped - math.pi) < PHASE_TOLERANCE:
        return math.pi
    return wrapped


@dataclass(frozen=True)
class Phase:
    """
    Optical phase in radians, kept canonical in [0, 2π)

    Equality and hashing compare the canonical value exactly. Values within
    PHASE_TOLERANCE of 0 or π are snapped, so the two encoding phases compare
    equal however they were computed.
    """
    value: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'value', _canonical(float(self.value)))

    @classmethod
    def from_degrees(cls, degrees: float) -> 'Phase':
        """Create from degrees (external interfaces speak degrees)"""
        if float(degrees) % 360.0 == 180.0:
            return cls(math.pi)
        return cls(math.radians(degrees))

    @property
    def degrees(self) -> float:
        """Phase in degrees, in [0, 360)"""
        if self.value == math.pi:
            return 180.0
        return math.degrees(self.value)

    def shifted(self, delta: float) -> 'Phase':
        """Return this phase advanced by delta radians"""
        return Phase(self.value + delta)

    def __repr__(self) -> str:
        return f"Phase({self.degrees:g}°)"


ZERO = Phase(0.0)
PI = Phase(math.pi)


@dataclass(frozen=True)
class TimeBinPulsePair:
    """Alice's encoded output: bright reference pulse followed by the phase-carrying signal pulse"""
    mu_ref: float
    mu_sig: float
    phase: Phase
    dt: float = 1.0

    @property
    def energy(self) -> float:
        """Total mean photon number of the pair"""
        return self.mu_ref + self.mu_sig

    def scaled(self, factor: float) -> 'TimeBinPulsePair':
        """Pair with both pulses attenuated by the same factor"""
        return TimeBinPulsePair(self.mu_ref * factor, self.mu_sig * factor, self.phase, self.dt)


@dataclass(frozen=True)
class SlotIntensities:
    """Mean photon numbers in the three detection slots (plus the undetected port's t2)"""
    t1: float
    t2: float
    t3: float
    t2_other_port: float = 0.0


@dataclass(frozen=True)
class ClickPattern:
    """Threshold detector readings for slots t1, t2, t3"""
    t1: bool = False
    t2: bool = False
    t3: bool = False

    def __or__(self, other: 'ClickPattern') -> 'ClickPattern':
        return ClickPattern(self.t1 or other.t1, self.t2 or other.t2, self.t3 or other.t3)

    @property
    def is_double(self) -> bool:
        """t2 fired together with a side slot"""
        return self.t2 and (self.t1 or self.t3)

    @property
    def any(self) -> bool:
        return self.t1 or self.t2 or self.t3


@dataclass(frozen=True)
class Outcome:
    """Bob's measurement outcome: conclusive with a bit, or inconclusive"""
    conclusive: bool
    bit: Optional[int] = None

    @classmethod
    def conclusive_bit(cls, bit: int) -> 'Outcome':
        return cls(True, bit)

    def __str__(self) -> str:
        return str(self.bit) if self.conclusive else "-"


INCONCLUSIVE = Outcome(False, None)


@dataclass(frozen=True)
class InterceptResult:
    """What Eve did with one pulse"""
    stored: int
    forwarded: int
    blocked: bool = False


@dataclass(frozen=True)
class ChannelOutput:
    """Pulse state after the fiber"""
    photons: int
    pair: TimeBinPulsePair
    background: SlotIntensities
    phase_flipped: bool = False


@dataclass
class PulseRecord:
    """Per-pulse ledger entry"""
    index: int
    alice_bit: int
    alice_phase: Phase
    bob_phase: Phase
    n_source: int
    eve_stored: int
    clicks: ClickPattern
    outcome: Outcome

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization"""
        return {
            'index': self.index,
            'alice_bit': self.alice_bit,
            'alice_phase_deg': self.alice_phase.degrees,
            'bob_phase_deg': self.bob_phase.degrees,
            'n_source': self.n_source,
            'eve_stored': self.eve_stored,
            'clicks': [self.clicks.t1, self.clicks.t2, self.clicks.t3],
            'bob_bit': self.outcome.bit,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PulseRecord':
        """Create from dictionary"""
        bit = data.get('bob_bit')
        return cls(
            index=data['index'],
            alice_bit=data['alice_bit'],
            alice_phase=Phase.from_degrees(data['alice_phase_deg']),
            bob_phase=Phase.from_degrees(data['bob_phase_deg']),
            n_source=data['n_source'],
            eve_stored=data['eve_stored'],
            clicks=ClickPattern(*data['clicks']),
            outcome=Outcome.conclusive_bit(bit) if bit is not None else INCONCLUSIVE,
        )


@dataclass
class SiftedKey:
    """Bits kept after sifting, with the pulse indices they came from"""
    bits: List[int] = field(default_factory=list)
    positions: List[int] = field(default_factory=list)

    def __post_init__(self):
        if len(self.bits) != len(self.positions):
            raise ValueError("SiftedKey bits and positions must have equal length")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("SiftedKey positions must be strictly increasing")

    def __len__(self) -> int:
        return len(self.bits)

    def as_string(self) -> str:
        """Key bits as a compact string, e.g. '011'"""
        return "".join(str(b) for b in self.bits)


@dataclass
class EveLedger:
    """What the eavesdropper holds: stored photon counts and the bits they reveal"""
    stored: Dict[int, int] = field(default_factory=dict)
    known_bits: Dict[int, int] = field(default_factory=dict)


@dataclass
class SessionStats:
    """Aggregate counters for one session"""
    sent: int = 0
    clicks_t1: int = 0
    clicks_t2: int = 0
    clicks_t3: int = 0
    double_clicks: int = 0
    sifted_len: int = 0
    sift_rate: float = 0.0
    qber: Optional[float] = None
    eve_known_fraction: Optional[float] = None

    @property
    def bob_click_rate(self) -> float:
        """Rate of conclusive (t2) clicks Bob announces"""
        if self.sent == 0:
            return 0.0
        return self.clicks_t2 / self.sent

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SessionStats':
        """Create from dictionary"""
        return cls(**data)


@dataclass
class SessionResult:
    """Everything a session produces"""
    records: List[PulseRecord]
    alice_key: SiftedKey
    bob_key: SiftedKey
    stats: SessionStats
    ledger: Optional[EveLedger] = None


@dataclass
class SweepRow:
    """One (axis value, trial) point of a sweep"""
    axis_value: Optional[float]
    trial: int
    seed: int
    stats: SessionStats
    bob_click_rate_no_eve_ref: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization"""
        data = self.stats.to_dict()
        data.update({
            'axis_value': self.axis_value,
            'trial': self.trial,
            'seed': self.seed,
            'bob_click_rate_no_eve_ref': self.bob_click_rate_no_eve_ref,
        })
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SweepRow':
        """Create from dictionary"""
        data = dict(data)
        axis_value = data.pop('axis_value')
        trial = data.pop('trial')
        seed = data.pop('seed')
        ref = data.pop('bob_click_rate_no_eve_ref', None)
        return cls(axis_value, trial, seed, SessionStats.from_dict(data), ref)


def bit_to_phase(bit: int) -> Phase:
    """0 → 0, 1 → π"""
    return PI if bit else ZERO


def phase_to_bit(phase: Phase) -> int:
    """Inverse of bit_to_phase for the two B92 phases"""
    return 1 if phase == PI else 0

