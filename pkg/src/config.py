"""Configuration loader for the B92 simulator"""

import math
import os
from dataclasses import dataclass, field, asdict, replace
from pathlib import Path
from typing import List, Optional, Dict, Any

import yaml


SEED_ENV_VAR = "QKD_SIM_SEED"

MODES = ("textbook", "stochastic")


class ConfigError(ValueError):
    """Raised when a config document cannot be read or parsed"""
    pass


class ConfigValidationError(ConfigError):
    """Raised with every invariant violation found in a config"""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("Invalid configuration:\n  - " + "\n  - ".join(self.errors))


def _section(data: Dict[str, Any], key: str, errors: List[str]) -> Dict[str, Any]:
    value = data.get(key)
    if value is None:
        return {}
    if not isinstance(value, dict):
        errors.append(f"{key}: must be a mapping, got {value!r}")
        return {}
    return value


def _sequence(data: Dict[str, Any], key: str, errors: List[str]) -> Optional[List[Any]]:
    value = data.get(key)
    if value is None:
        return None
    if not isinstance(value, (list, tuple)):
        errors.append(f"{key}: must be a list, got {value!r}")
        return None
    return list(value)


@dataclass(frozen=True)
class ChannelParams:
    """Fiber channel parameters"""
    length_km: float = 0.0
    attenuation_db_per_km: float = 0.2
    background_mu: float = 0.0
    coherence_length_km: Optional[float] = None  # None disables phase flips


@dataclass(frozen=True)
class DetectorParams:
    """Threshold detector parameters"""
    efficiency: float = 1.0
    dark_count_prob: float = 0.0


@dataclass(frozen=True)
class PnsStrategy:
    """Photon-number-splitting policy"""
    store_count: int = 1
    block_singles_prob: float = 0.0
    lossless_forward: bool = False


@dataclass(frozen=True)
class SessionConfig:
    """All physical and protocol parameters of one session"""
    n_pulses: int = 1000
    mu: float = 0.1
    mode: str = "stochastic"
    split_ratio_alice: float = 0.5
    split_ratio_bob: float = 0.5
    dt: float = 1.0
    channel: ChannelParams = field(default_factory=ChannelParams)
    detector: DetectorParams = field(default_factory=DetectorParams)
    eve: Optional[PnsStrategy] = None
    seed: int = 0
    textbook_photon_number: int = 1
    fixture_bits: Optional[List[int]] = None
    fixture_phases: Optional[List[float]] = None  # Bob's bases, degrees

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SessionConfig':
        """
        Build a config from a parsed document, filling in defaults

        Raises:
            ConfigError: If the document is not a mapping
            ConfigValidationError: If a section or sequence has the wrong shape
        """
        if not isinstance(data, dict):
            raise ConfigError("Configuration document must be a mapping")

        errors: List[str] = []
        channel_data = _section(data, 'channel', errors)
        detector_data = _section(data, 'detector', errors)
        eve_data = _section(data, 'eve', errors)
        fixture_bits = _sequence(data, 'fixture_bits', errors)
        fixture_phases = _sequence(data, 'fixture_phases', errors)
        if errors:
            raise ConfigValidationError(errors)

        channel = ChannelParams(
            length_km=channel_data.get('length_km', 0.0),
            attenuation_db_per_km=channel_data.get('attenuation_db_per_km', 0.2),
            background_mu=channel_data.get('background_mu', 0.0),
            coherence_length_km=channel_data.get('coherence_length_km')
        )

        detector = DetectorParams(
            efficiency=detector_data.get('efficiency', 1.0),
            dark_count_prob=detector_data.get('dark_count_prob', 0.0)
        )

        eve = None
        if eve_data.get('enabled', False):
            eve = PnsStrategy(
                store_count=eve_data.get('store_count', 1),
                block_singles_prob=eve_data.get('block_singles_prob', 0.0),
                lossless_forward=eve_data.get('lossless_forward', False)
            )

        return cls(
            n_pulses=data.get('n_pulses', 1000),
            mu=data.get('mu', 0.1),
            mode=data.get('mode', 'stochastic'),
            split_ratio_alice=data.get('split_ratio_alice', 0.5),
            split_ratio_bob=data.get('split_ratio_bob', 0.5),
            dt=data.get('dt', 1.0),
            channel=channel,
            detector=detector,
            eve=eve,
            seed=data.get('seed', 0),
            textbook_photon_number=data.get('textbook_photon_number', 1),
            fixture_bits=fixture_bits,
            fixture_phases=fixture_phases
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert back to the document layout (eve flattened under 'enabled')"""
        data = asdict(self)
        eve = data.pop('eve')
        data['eve'] = {'enabled': eve is not None, **(eve or {})}
        return data

    @classmethod
    def load(cls, config_path: str) -> 'SessionConfig':
        """
        Load configuration from a JSON (or YAML) file

        Args:
            config_path: Path to the session document

        Returns:
            SessionConfig object (not yet validated)

        Raises:
            FileNotFoundError: If config file doesn't exist
            ConfigError: If the document can't be parsed
        """
        if not Path(config_path).exists():
            raise FileNotFoundError(
                f"Configuration file not found: {config_path}\n"
                "Copy config/session.json.example and adjust it."
            )

        with open(config_path, 'r') as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigError(f"Could not parse {config_path}: {e}")

        return cls.from_dict(data or {})

    def with_seed(self, seed: int) -> 'SessionConfig':
        return replace(self, seed=seed)

    def without_eve(self) -> 'SessionConfig':
        return replace(self, eve=None)


def resolve_seed(cfg: SessionConfig, cli_seed: Optional[int] = None,
                 environ: Optional[Dict[str, str]] = None) -> SessionConfig:
    """
    Apply seed precedence: CLI flag > QKD_SIM_SEED > config file

    Raises:
        ConfigValidationError: If the environment value is not an integer
    """
    if cli_seed is not None:
        return cfg.with_seed(cli_seed)

    environ = os.environ if environ is None else environ
    env_value = environ.get(SEED_ENV_VAR)
    if env_value:
        try:
            return cfg.with_seed(int(env_value))
        except ValueError:
            raise ConfigValidationError([f"{SEED_ENV_VAR}: must be an integer, got {env_value!r}"])

    return cfg


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _check_fraction(errors: List[str], key: str, value: Any, open_interval: bool = False) -> None:
    if not _is_number(value):
        errors.append(f"{key}: must be a number, got {value!r}")
    elif open_interval and not 0.0 < value < 1.0:
        errors.append(f"{key}: must lie in (0, 1), got {value}")
    elif not open_interval and not 0.0 <= value <= 1.0:
        errors.append(f"{key}: must lie in [0, 1], got {value}")


def _check_non_negative(errors: List[str], key: str, value: Any) -> None:
    if not _is_number(value):
        errors.append(f"{key}: must be a number, got {value!r}")
    elif value < 0:
        errors.append(f"{key}: must be >= 0, got {value}")


def validate(cfg: SessionConfig) -> SessionConfig:
    """
    Check every config invariant, reporting all violations at once

    Returns:
        The same config when valid

    Raises:
        ConfigValidationError: Listing each violated key and constraint
    """
    errors: List[str] = []

    if not isinstance(cfg.n_pulses, int) or isinstance(cfg.n_pulses, bool) or cfg.n_pulses < 1:
        errors.append(f"n_pulses: must be an integer >= 1, got {cfg.n_pulses!r}")
    _check_non_negative(errors, "mu", cfg.mu)
    if cfg.mode not in MODES:
        errors.append(f"mode: must be one of {', '.join(MODES)}, got {cfg.mode!r}")
    _check_fraction(errors, "split_ratio_alice", cfg.split_ratio_alice, open_interval=True)
    _check_fraction(errors, "split_ratio_bob", cfg.split_ratio_bob, open_interval=True)
    if not _is_number(cfg.dt) or cfg.dt <= 0:
        errors.append(f"dt: must be > 0, got {cfg.dt!r}")
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or not 0 <= cfg.seed < 2 ** 64:
        errors.append(f"seed: must be an unsigned 64-bit integer, got {cfg.seed!r}")
    if not isinstance(cfg.textbook_photon_number, int) or cfg.textbook_photon_number < 0:
        errors.append(f"textbook_photon_number: must be an integer >= 0, got {cfg.textbook_photon_number!r}")

    _check_non_negative(errors, "channel.length_km", cfg.channel.length_km)
    _check_non_negative(errors, "channel.attenuation_db_per_km", cfg.channel.attenuation_db_per_km)
    _check_non_negative(errors, "channel.background_mu", cfg.channel.background_mu)
    coherence = cfg.channel.coherence_length_km
    if coherence is not None and (not _is_number(coherence) or coherence <= 0):
        errors.append(f"channel.coherence_length_km: must be > 0 or null, got {coherence!r}")

    _check_fraction(errors, "detector.efficiency", cfg.detector.efficiency)
    _check_fraction(errors, "detector.dark_count_prob", cfg.detector.dark_count_prob)

    if cfg.eve is not None:
        if not isinstance(cfg.eve.store_count, int) or cfg.eve.store_count < 1:
            errors.append(f"eve.store_count: must be an integer >= 1, got {cfg.eve.store_count!r}")
        _check_fraction(errors, "eve.block_singles_prob", cfg.eve.block_singles_prob)
        if not isinstance(cfg.eve.lossless_forward, bool):
            errors.append(f"eve.lossless_forward: must be true or false, got {cfg.eve.lossless_forward!r}")

    if cfg.fixture_bits is not None:
        if len(cfg.fixture_bits) != cfg.n_pulses:
            errors.append(
                f"fixture_bits: length {len(cfg.fixture_bits)} does not match n_pulses {cfg.n_pulses}"
            )
        if any(b not in (0, 1) for b in cfg.fixture_bits):
            errors.append("fixture_bits: every entry must be 0 or 1")
    if cfg.fixture_phases is not None:
        if len(cfg.fixture_phases) != cfg.n_pulses:
            errors.append(
                f"fixture_phases: length {len(cfg.fixture_phases)} does not match n_pulses {cfg.n_pulses}"
            )
        if any(not _is_number(p) or float(p) % 180.0 != 0.0 for p in cfg.fixture_phases):
            errors.append("fixture_phases: every entry must be 0 or 180 degrees")

    if errors:
        raise ConfigValidationError(errors)
    return cfg
