"""IEEE 802.15.4 2.4 GHz O-QPSK baseband: spreading, shaping, sync, decode."""

from .config import (
    CHIP_RATE_HZ,
    SAMPLE_RATE_HZ,
    SAMPLES_PER_TICK,
    SPREADING_FACTORS,
    PhyConfig,
    PulseShape,
    label,
)
from .dsss import (
    STANDARD_CHIP_TABLE,
    chip_sequence,
    chip_table,
    despread_hard,
    octets_to_symbols,
    spread,
    spread_octets,
    symbols_to_octets,
)
from .modem import IqBuffer, frame_ticks, modulate, pulse_for, tx_frame
from .receiver import (
    PhyReport,
    RxStatus,
    SyncCandidate,
    detect_preamble,
    rx_frames,
    soft_chips,
)

__all__ = [
    "CHIP_RATE_HZ",
    "IqBuffer",
    "PhyConfig",
    "PhyReport",
    "PulseShape",
    "RxStatus",
    "SAMPLES_PER_TICK",
    "SAMPLE_RATE_HZ",
    "SPREADING_FACTORS",
    "STANDARD_CHIP_TABLE",
    "SyncCandidate",
    "chip_sequence",
    "chip_table",
    "despread_hard",
    "detect_preamble",
    "frame_ticks",
    "label",
    "modulate",
    "octets_to_symbols",
    "pulse_for",
    "rx_frames",
    "soft_chips",
    "spread",
    "spread_octets",
    "symbols_to_octets",
    "tx_frame",
]
