from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from ..errors import ConfigError
from ..frame import FrameConfig, LengthMode

SAMPLE_RATE_HZ = 8_000_000
CHIP_RATE_HZ = 2_000_000
TICK_HZ = 1_000_000
SAMPLES_PER_TICK = SAMPLE_RATE_HZ // TICK_HZ
STANDARD_CHIPS_PER_SYMBOL = 32
SPREADING_FACTORS = (8, 16, 32, 64)
DEFAULT_DETECT_THRESHOLD = 0.6


class PulseShape(Enum):
    HALF_SINE = "halfsine"
    RECT = "rect"
    RAISED_COSINE = "rc"


@dataclass(frozen=True)
class PhyConfig:
    """Every runtime-tunable PHY parameter.

    ``chips_per_symbol == 32`` is the standard spreading; 8, 16 and 64 are
    truncated or repeated variants of the standard rows.
    """

    sample_rate_hz: int = SAMPLE_RATE_HZ
    chip_rate_hz: int = CHIP_RATE_HZ
    chips_per_symbol: int = STANDARD_CHIPS_PER_SYMBOL
    pulse: PulseShape = PulseShape.HALF_SINE
    rolloff: float = 0.5
    frame: FrameConfig = field(default_factory=FrameConfig)
    amplitude: float = 1.0
    detect_threshold: float = DEFAULT_DETECT_THRESHOLD

    def validate(self) -> "PhyConfig":
        if self.chip_rate_hz <= 0 or self.sample_rate_hz % self.chip_rate_hz:
            raise ConfigError("sample rate must be an integer multiple of the chip rate")
        spc = self.sample_rate_hz // self.chip_rate_hz
        if spc < 2 or spc % 2:
            raise ConfigError(f"samples per chip must be even and >= 2, got {spc}")
        if self.chips_per_symbol not in SPREADING_FACTORS:
            raise ConfigError(f"chips_per_symbol must be one of {SPREADING_FACTORS}")
        if not isinstance(self.pulse, PulseShape):
            raise ConfigError(f"unknown pulse shape {self.pulse!r}")
        if self.pulse is PulseShape.RAISED_COSINE and not 0 < self.rolloff <= 1:
            raise ConfigError(f"rolloff must be in (0, 1], got {self.rolloff}")
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise ConfigError("amplitude must be positive")
        if not 0 < self.detect_threshold <= 1:
            raise ConfigError("detect_threshold must be in (0, 1]")
        self.frame.validate()
        return self

    @property
    def samples_per_chip(self) -> int:
        return self.sample_rate_hz // self.chip_rate_hz

    @property
    def samples_per_symbol(self) -> int:
        return self.chips_per_symbol * self.samples_per_chip

    @property
    def symbol_duration_us(self) -> float:
        return self.chips_per_symbol * 1e6 / self.chip_rate_hz

    def is_standard_compliant(self) -> bool:
        return (
            self.sample_rate_hz == SAMPLE_RATE_HZ
            and self.chip_rate_hz == CHIP_RATE_HZ
            and self.chips_per_symbol == STANDARD_CHIPS_PER_SYMBOL
            and self.pulse is PulseShape.HALF_SINE
            and self.frame.is_standard
        )

    def frame_samples(self, psdu_len: int) -> int:
        """Sample count of a complete frame waveform for a PSDU of this length."""
        chips = 2 * self.frame.ppdu_len(psdu_len) * self.chips_per_symbol
        return chips * self.samples_per_chip + self.samples_per_chip

    def airtime_us(self, psdu_len: int) -> float:
        return 2 * self.frame.ppdu_len(psdu_len) * self.symbol_duration_us

    def with_(self, **changes) -> "PhyConfig":
        return replace(self, **changes)

    def snapshot(self) -> dict[str, str]:
        """Flat key=value view, used by sidecar files and CSV headers."""
        return {
            "sample_rate_hz": str(self.sample_rate_hz),
            "chip_rate_hz": str(self.chip_rate_hz),
            "chips_per_symbol": str(self.chips_per_symbol),
            "pulse": self.pulse.value,
            "rolloff": repr(float(self.rolloff)),
            "preamble_len": str(self.frame.preamble_len),
            "sfd": f"0x{self.frame.sfd:02X}",
            "length_mode": LengthMode(self.frame.length_mode).name.lower(),
            "preamble_value": f"0x{self.frame.preamble_value:02X}",
            "amplitude": repr(float(self.amplitude)),
            "detect_threshold": repr(float(self.detect_threshold)),
            "standard_compliant": str(self.is_standard_compliant()).lower(),
        }

    @classmethod
    def from_snapshot(cls, values: dict[str, str]) -> "PhyConfig":
        default = cls()
        frame = FrameConfig(
            preamble_len=int(values.get("preamble_len", default.frame.preamble_len)),
            sfd=int(values.get("sfd", str(default.frame.sfd)), 0),
            length_mode=LengthMode[values.get("length_mode", "standard_7bit").upper()],
            preamble_value=int(values.get("preamble_value", "0"), 0),
        )
        return cls(
            sample_rate_hz=int(values.get("sample_rate_hz", default.sample_rate_hz)),
            chip_rate_hz=int(values.get("chip_rate_hz", default.chip_rate_hz)),
            chips_per_symbol=int(values.get("chips_per_symbol", default.chips_per_symbol)),
            pulse=PulseShape(values.get("pulse", default.pulse.value)),
            rolloff=float(values.get("rolloff", default.rolloff)),
            frame=frame,
            amplitude=float(values.get("amplitude", default.amplitude)),
            detect_threshold=float(values.get("detect_threshold", default.detect_threshold)),
        )


def label(cfg: PhyConfig) -> str:
    """Short human-readable tag such as ``sf32/halfsine``."""
    tag = f"sf{cfg.chips_per_symbol}/{cfg.pulse.value}"
    if cfg.pulse is PulseShape.RAISED_COSINE:
        tag += f"{cfg.rolloff:g}"
    return tag


__all__ = [
    "CHIP_RATE_HZ",
    "DEFAULT_DETECT_THRESHOLD",
    "PhyConfig",
    "PulseShape",
    "SAMPLES_PER_TICK",
    "SAMPLE_RATE_HZ",
    "SPREADING_FACTORS",
    "STANDARD_CHIPS_PER_SYMBOL",
    "TICK_HZ",
    "label",
]
