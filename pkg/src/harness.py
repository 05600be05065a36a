"""Experiment orchestration: sweeps, CSV reports and the Table 1 replay"""

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import SessionConfig, validate
from .models import PulseRecord, SessionResult, SweepRow
from .protocol import run_session


logger = logging.getLogger(__name__)

AXES = ("length_km", "mu", "background_mu")

STATS_COLUMNS = [
    "axis_value", "trial", "seed", "sent", "clicks_t1", "clicks_t2", "clicks_t3",
    "double_clicks", "sifted_len", "sift_rate", "qber", "eve_known_fraction",
    "bob_click_rate_no_eve_ref",
]

RECORD_COLUMNS = [
    "index", "alice_bit", "alice_phase_deg", "bob_phase_deg", "n_source",
    "eve_stored", "t1", "t2", "t3", "click", "bob_bit",
]

_FRACTION_COLUMNS = ("axis_value", "sift_rate", "qber", "eve_known_fraction", "bob_click_rate_no_eve_ref")

# Table 1: Alice's bits, their phases, Bob's bases (degrees) and the published outcome
TABLE1_BITS = [0, 1, 1, 1, 0, 0, 1, 1]
TABLE1_ALICE_PHASES = [0, 180, 180, 180, 0, 0, 180, 180]
TABLE1_BOB_PHASES = [0, 0, 180, 0, 180, 180, 180, 0]
TABLE1_CLICKS = "YNYNNNYN"
TABLE1_KEY = "011"
TABLE1_POSITIONS = [1, 3, 7]


def derive_seed(base_seed: int, value_index: int, trial: int) -> int:
    """Deterministic 64-bit seed for one sweep point"""
    sequence = np.random.SeedSequence(base_seed, spawn_key=(value_index, trial))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _apply_axis(base: SessionConfig, axis: str, value: float) -> SessionConfig:
    if axis == "length_km":
        return replace(base, channel=replace(base.channel, length_km=value))
    if axis == "background_mu":
        return replace(base, channel=replace(base.channel, background_mu=value))
    if axis == "mu":
        return replace(base, mu=value)
    raise ValueError(f"Unknown sweep axis {axis!r}; expected one of {', '.join(AXES)}")


def build_row(cfg: SessionConfig, result: SessionResult,
              axis_value: Optional[float] = None, trial: int = 0) -> SweepRow:
    """
    Turn a finished session into a report row

    When Eve is present an Eve-free twin is run with the same seed, so
    Alice's bits and Bob's bases are identical and the click-rate
    difference is Eve's footprint.
    """
    stats = result.stats
    if cfg.eve is not None:
        reference = run_session(cfg.without_eve()).stats.bob_click_rate
    else:
        reference = stats.bob_click_rate
    return SweepRow(axis_value=axis_value, trial=trial, seed=cfg.seed,
                    stats=stats, bob_click_rate_no_eve_ref=reference)


def run_point(cfg: SessionConfig, axis_value: float, trial: int) -> SweepRow:
    return build_row(cfg, run_session(cfg), axis_value, trial)


def _run_point_args(args: Tuple[SessionConfig, float, int]) -> SweepRow:
    return run_point(*args)


def sweep(base: SessionConfig, axis: str, values: Sequence[float],
          trials: int = 1, workers: int = 1) -> List[SweepRow]:
    """
    Run base config across one axis, several trials per value

    Args:
        base: Base configuration
        axis: 'length_km', 'mu' or 'background_mu'
        values: Axis values (non-empty)
        trials: Trials per value, each with its own derived seed
        workers: Process count; results are ordered identically either way

    Returns:
        Rows ordered by (axis index, trial)

    Raises:
        ValueError: If values is empty, trials < 1 or the axis is unknown
        ConfigValidationError: If any point's config is invalid
    """
    if not values:
        raise ValueError("sweep needs at least one axis value")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if axis not in AXES:
        raise ValueError(f"Unknown sweep axis {axis!r}; expected one of {', '.join(AXES)}")

    jobs = []
    for value_index, value in enumerate(values):
        for trial in range(trials):
            cfg = _apply_axis(base, axis, value)
            cfg = cfg.with_seed(derive_seed(base.seed, value_index, trial))
            validate(cfg)
            jobs.append((cfg, float(value), trial))

    logger.info("Sweeping %s over %d values x %d trials (%d workers)", axis, len(values), trials, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_point_args, jobs))
    return [_run_point_args(job) for job in jobs]


def _format_fraction(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6g}"


def report(rows: Sequence[SweepRow]) -> str:
    """
    Render sweep rows as CSV text (fixed column order)

    Raises:
        ValueError: If rows is empty
    """
    if not rows:
        raise ValueError("report needs at least one row")

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(STATS_COLUMNS)
    for row in rows:
        s = row.stats
        writer.writerow([
            _format_fraction(row.axis_value), row.trial, row.seed, s.sent,
            s.clicks_t1, s.clicks_t2, s.clicks_t3, s.double_clicks, s.sifted_len,
            _format_fraction(s.sift_rate), _format_fraction(s.qber),
            _format_fraction(s.eve_known_fraction),
            _format_fraction(row.bob_click_rate_no_eve_ref),
        ])
    return buffer.getvalue()


def parse_stats_csv(text: str) -> List[SweepRow]:
    """Read rows back from report() output"""
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        values = {}
        for column in STATS_COLUMNS:
            cell = raw[column]
            if column in _FRACTION_COLUMNS:
                values[column] = float(cell) if cell != "" else None
            else:
                values[column] = int(cell)
        rows.append(SweepRow.from_dict(values))
    return rows


def records_csv(records: Sequence[PulseRecord]) -> str:
    """Per-pulse ledger as CSV text"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for r in records:
        writer.writerow([
            r.index, r.alice_bit, f"{r.alice_phase.degrees:g}", f"{r.bob_phase.degrees:g}",
            r.n_source, r.eve_stored, int(r.clicks.t1), int(r.clicks.t2), int(r.clicks.t3),
            "Y" if r.clicks.t2 else "N", str(r.outcome),
        ])
    return buffer.getvalue()


def summary(rows: Sequence[SweepRow]) -> str:
    """Human-readable digest of sweep rows"""
    lines = []
    for row in rows:
        s = row.stats
        qber = f"{s.qber:.4f}" if s.qber is not None else "n/a"
        label = "run" if row.axis_value is None else f"{row.axis_value:g}"
        parts = [
            f"{label} (trial {row.trial})",
            f"sifted {s.sifted_len:,}/{s.sent:,} ({s.sift_rate:.3e})",
            f"QBER {qber}",
        ]
        if s.eve_known_fraction is not None:
            parts.append(f"Eve knows {s.eve_known_fraction:.1%}")
        if row.bob_click_rate_no_eve_ref is not None and row.bob_click_rate_no_eve_ref != s.bob_click_rate:
            parts.append(
                f"Bob click rate {s.bob_click_rate:.3e} vs {row.bob_click_rate_no_eve_ref:.3e} without Eve"
            )
        lines.append(" | ".join(parts))
    return "\n".join(lines)


def table1_config() -> SessionConfig:
    """The built-in Table 1 fixture in textbook mode"""
    return SessionConfig(
        n_pulses=len(TABLE1_BITS),
        mode="textbook",
        fixture_bits=list(TABLE1_BITS),
        fixture_phases=list(TABLE1_BOB_PHASES)
    )


@dataclass
class Table1Replay:
    """Outcome of replaying Table 1"""
    records: List[PulseRecord]
    clicks: str
    key: str
    positions: List[int]

    @property
    def matches(self) -> bool:
        alice_phases = [round(r.alice_phase.degrees) for r in self.records]
        return (self.clicks == TABLE1_CLICKS and self.key == TABLE1_KEY
                and self.positions == TABLE1_POSITIONS
                and alice_phases == TABLE1_ALICE_PHASES)


def run_table1() -> Table1Replay:
    """Replay Table 1 and compare against the published key"""
    result = run_session(table1_config())
    clicks = "".join("Y" if r.clicks.t2 else "N" for r in result.records)
    return Table1Replay(records=result.records, clicks=clicks,
                        key=result.bob_key.as_string(), positions=list(result.bob_key.positions))


def format_table1(replay: Table1Replay) -> str:
    """Render the replay in the layout of the published table"""
    def row(label: str, cells: Sequence[object]) -> str:
        return f"{label:<10}" + "".join(f"{str(c):>5}" for c in cells)

    records = replay.records
    return "\n".join([
        row("Bit", [r.alice_bit for r in records]),
        row("Phase", [f"{r.alice_phase.degrees:g}" for r in records]),
        row("Basis", [f"{r.bob_phase.degrees:g}" for r in records]),
        row("Click", list(replay.clicks)),
        row("Bob bit", [str(r.outcome) for r in records]),
    ])
