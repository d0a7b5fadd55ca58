"""O-QPSK pulse shaping and the transmit chain."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..frame import build_ppdu
from .config import SAMPLES_PER_TICK, PhyConfig, PulseShape
from .dsss import spread_octets

RC_SPAN_CHIPS = 4


@dataclass
class IqBuffer:
    """Complex baseband samples; sample 0 is at ``start_tick`` (1 tick = 1 us)."""

    samples: np.ndarray
    start_tick: int = 0
    sample_rate_hz: int = 8_000_000

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def samples_per_tick(self) -> int:
        return self.sample_rate_hz // 1_000_000

    @property
    def start_sample(self) -> int:
        return self.start_tick * self.samples_per_tick

    @property
    def end_tick(self) -> int:
        """First tick boundary at or after the last sample."""
        return self.start_tick + -(-len(self) // self.samples_per_tick)

    def tick_of(self, sample_index: int) -> float:
        return self.start_tick + sample_index / self.samples_per_tick


@dataclass(frozen=True)
class Pulse:
    """Per-chip pulse: tap ``k`` lands at sample ``chip_index * spc + k - lead``."""

    taps: np.ndarray
    lead: int

    @property
    def energy(self) -> float:
        return float(np.dot(self.taps, self.taps))


def _raised_cosine(t: np.ndarray, period: float, beta: float) -> np.ndarray:
    x = t / period
    denom = 1.0 - (2.0 * beta * x) ** 2
    singular = np.isclose(denom, 0.0)
    safe = np.where(singular, 1.0, denom)
    out = np.sinc(x) * np.cos(np.pi * beta * x) / safe
    limit = np.pi / 4 * np.sinc(1.0 / (2.0 * beta))
    return np.where(singular, limit, out)


@lru_cache(maxsize=64)
def _pulse(shape: PulseShape, spc: int, rolloff: float) -> Pulse:
    k = np.arange(2 * spc)
    if shape is PulseShape.HALF_SINE:
        taps, lead = np.sin(np.pi * k / (2 * spc)), 0
    elif shape is PulseShape.RECT:
        taps, lead = np.ones(2 * spc), 0
    else:
        # Centred on the half-sine peak, period = one rail symbol (2 chips),
        # truncated to +/- RC_SPAN_CHIPS chips and scaled to the half-sine energy.
        half = RC_SPAN_CHIPS * spc
        t = np.arange(-half, half + 1, dtype=float)
        taps = _raised_cosine(t, 2.0 * spc, rolloff)
        taps *= np.sqrt(spc / np.dot(taps, taps))
        lead = half - spc
    taps = np.asarray(taps, dtype=float)
    taps.flags.writeable = False
    return Pulse(taps, lead)


def pulse_for(cfg: PhyConfig) -> Pulse:
    rolloff = float(cfg.rolloff) if cfg.pulse is PulseShape.RAISED_COSINE else 0.0
    return _pulse(cfg.pulse, cfg.samples_per_chip, rolloff)


def modulate(chips, cfg: PhyConfig = PhyConfig(), start_tick: int = 0) -> IqBuffer:
    """Map chips to O-QPSK: even chips on I, odd chips on Q one chip later."""
    chips = np.asarray(chips, dtype=float)
    if chips.size % 2:
        raise ValueError("O-QPSK needs an even number of chips")
    spc = cfg.samples_per_chip
    n_out = chips.size * spc + spc if chips.size else 0
    pulse = pulse_for(cfg)
    i_rail = _rail(chips[0::2], 0, n_out, spc, pulse)
    q_rail = _rail(chips[1::2], 1, n_out, spc, pulse)
    return IqBuffer(cfg.amplitude * (i_rail + 1j * q_rail), start_tick, cfg.sample_rate_hz)


def _rail(chips: np.ndarray, offset_chips: int, n_out: int, spc: int, pulse: Pulse) -> np.ndarray:
    """Superimpose one pulse per chip, chip ``j`` starting at sample ``(2j + offset) * spc``."""
    if n_out == 0:
        return np.zeros(0)
    train = np.zeros(n_out, dtype=float)
    train[(2 * np.arange(chips.size) + offset_chips) * spc] = chips
    # Convolution index m holds output sample m - lead.
    return np.convolve(train, pulse.taps)[pulse.lead : pulse.lead + n_out]


def tx_frame(psdu: bytes, cfg: PhyConfig = PhyConfig(), start_tick: int = 0) -> IqBuffer:
    """PSDU to baseband: PPDU build, nibble split, spreading, O-QPSK."""
    cfg.validate()
    ppdu = build_ppdu(psdu, cfg.frame)
    return modulate(spread_octets(ppdu.octets, cfg), cfg, start_tick)


def frame_ticks(cfg: PhyConfig, psdu_len: int) -> int:
    """Whole ticks spanned by a frame waveform (rounded up)."""
    return -(-cfg.frame_samples(psdu_len) // SAMPLES_PER_TICK)
