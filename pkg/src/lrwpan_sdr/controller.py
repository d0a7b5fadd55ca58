"""Radio controller: register map, configuration latching and IRQ events.

All tunable PHY and scheduler parameters live in a flat map of 32-bit
registers.  Fractional values are Q16.16 fixed point.  The PHY and the
scheduler read their configuration from here at frame boundaries, so a
register write never affects a frame that is already on the air.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .errors import IllegalValue, ReadOnlyRegister, UnknownRegister
from .frame import FrameConfig, LengthMode
from .mas import MasConfig, OverflowPolicy
from .phy.config import CHIP_RATE_HZ, SAMPLE_RATE_HZ, PhyConfig, PulseShape
from .phy.receiver import PhyReport, RxStatus

CHIP_ID_VALUE = 0x15C0_0154
U32 = 0xFFFF_FFFF
Q16_ONE = 1 << 16


def to_q16(value: float) -> int:
    return int(round(value * Q16_ONE))


def from_q16(raw: int) -> float:
    return raw / Q16_ONE


def to_signed_q16(value: float) -> int:
    raw = max(-(1 << 31), min((1 << 31) - 1, to_q16(value)))
    return raw & U32


def from_signed_q16(raw: int) -> float:
    if raw & 0x8000_0000:
        raw -= 1 << 32
    return from_q16(raw)


class Access(enum.Enum):
    RW = "rw"
    RO = "ro"
    W1C = "w1c"


_PULSE_CODES = {PulseShape.HALF_SINE: 0, PulseShape.RECT: 1, PulseShape.RAISED_COSINE: 2}
_PULSE_FROM_CODE = {v: k for k, v in _PULSE_CODES.items()}


def _one_of(*allowed: int) -> Callable[[int], bool]:
    return lambda v: v in allowed


def _between(lo: int, hi: int) -> Callable[[int], bool]:
    return lambda v: lo <= v <= hi


@dataclass(frozen=True)
class Register:
    name: str
    addr: int
    access: Access
    default: int = 0
    legal: Callable[[int], bool] = _between(0, U32)
    width_mask: int = U32


REGISTERS: tuple[Register, ...] = (
    Register("CHIP_ID", 0x0000, Access.RO, CHIP_ID_VALUE),
    Register("SPREADING", 0x0004, Access.RW, 32, _one_of(8, 16, 32, 64)),
    Register("PULSE_SHAPE", 0x0008, Access.RW, 0, _one_of(0, 1, 2)),
    Register("PULSE_PARAM", 0x000C, Access.RW, to_q16(0.5), _between(1, Q16_ONE)),
    Register("PREAMBLE_LEN", 0x0010, Access.RW, 4, _between(2, 16)),
    Register("SFD", 0x0014, Access.RW, 0xA7, _between(0, 0xFF)),
    Register("LENGTH_MODE", 0x0018, Access.RW, 0, _one_of(0, 1)),
    Register("AMPLITUDE", 0x001C, Access.RW, Q16_ONE, _between(1, U32)),
    Register("DETECT_THRESHOLD", 0x0020, Access.RW, to_q16(0.6), _between(1, Q16_ONE)),
    Register("PREAMBLE_VALUE", 0x0024, Access.RW, 0, _between(0, 0xFF)),
    Register("SAMPLE_RATE", 0x0028, Access.RO, SAMPLE_RATE_HZ),
    Register("CHIP_RATE", 0x002C, Access.RO, CHIP_RATE_HZ),
    Register("TURNAROUND_TICKS", 0x0040, Access.RW, 192),
    Register("AUTO_ACK", 0x0044, Access.RW, 1, _one_of(0, 1)),
    Register("PROC_LATENCY", 0x0048, Access.RW, 0),
    Register("TX_RING_CAPACITY", 0x004C, Access.RW, 16, _between(1, 4096)),
    Register("RX_RING_CAPACITY", 0x0050, Access.RW, 16, _between(1, 4096)),
    Register("OVERFLOW_POLICY", 0x0054, Access.RW, 0, _one_of(0, 1)),
    Register("PROMISCUOUS", 0x0058, Access.RW, 0, _one_of(0, 1)),
    Register("IRQ_ENABLE", 0x0080, Access.RW, 0, width_mask=0x3F),
    Register("IRQ_STATUS", 0x0084, Access.W1C, 0, width_mask=0x3F),
    Register("RSSI", 0x0100, Access.RO),
    Register("LQI", 0x0104, Access.RO),
    Register("SYNC_OFFSET", 0x0108, Access.RO),
    Register("PHASE", 0x010C, Access.RO),
    Register("CRC_OK", 0x0110, Access.RO),
    Register("RX_COUNT", 0x0114, Access.RO),
    Register("CRC_ERR_COUNT", 0x0118, Access.RO),
    Register("TX_COUNT", 0x011C, Access.RO),
)

BY_ADDR = {r.addr: r for r in REGISTERS}
BY_NAME = {r.name: r for r in REGISTERS}
WRITABLE = tuple(r for r in REGISTERS if r.access is Access.RW)


def resolve(key: Union[int, str]) -> Register:
    """Look a register up by address or (case-insensitive) name."""
    if isinstance(key, str):
        reg = BY_NAME.get(key.strip().upper())
        if reg is not None:
            return reg
        try:
            key = int(key, 0)
        except ValueError:
            raise UnknownRegister(key) from None
    reg = BY_ADDR.get(key)
    if reg is None:
        raise UnknownRegister(f"0x{key:04X}")
    return reg


class IrqKind(enum.IntFlag):
    SFD_DETECTED = 1 << 0
    FRAME_RECEIVED = 1 << 1
    CRC_ERROR = 1 << 2
    TX_DONE = 1 << 3
    RX_OVERFLOW = 1 << 4
    SCHEDULED_TX_MISSED = 1 << 5


@dataclass(frozen=True)
class IrqEvent:
    kind: IrqKind
    tick: int
    detail: Optional[int] = None


class RadioController:
    """Register map and IRQ queue of one node."""

    def __init__(self):
        self._regs = {r.addr: r.default for r in REGISTERS}
        self._pending: list[IrqEvent] = []

    # -- register access -------------------------------------------------

    def read_register(self, addr: Union[int, str]) -> int:
        return self._regs[resolve(addr).addr]

    def write_register(self, addr: Union[int, str], value: int) -> None:
        reg = resolve(addr)
        if reg.access is Access.RO:
            raise ReadOnlyRegister(reg.name)
        if not isinstance(value, int) or not 0 <= value <= U32:
            raise IllegalValue(f"{reg.name}: {value!r} is not a 32-bit value")
        if reg.access is Access.W1C:
            self._regs[reg.addr] &= ~value & reg.width_mask
            return
        image = dict(self._regs)
        image[reg.addr] = value & reg.width_mask
        self._check(image)
        self._regs = image

    def _check(self, image: dict[int, int]) -> None:
        for reg in WRITABLE:
            value = image[reg.addr]
            if not reg.legal(value):
                raise IllegalValue(f"{reg.name}: 0x{value:X} not allowed")
        if image[BY_NAME["PREAMBLE_VALUE"].addr] and not image[BY_NAME["LENGTH_MODE"].addr]:
            raise IllegalValue("PREAMBLE_VALUE must be 0 unless LENGTH_MODE is extended")

    def registers(self) -> dict[str, int]:
        return {r.name: self._regs[r.addr] for r in REGISTERS}

    # -- configuration view ---------------------------------------------

    def _get(self, name: str) -> int:
        return self._regs[BY_NAME[name].addr]

    def phy_config(self) -> PhyConfig:
        return PhyConfig(
            sample_rate_hz=self._get("SAMPLE_RATE"),
            chip_rate_hz=self._get("CHIP_RATE"),
            chips_per_symbol=self._get("SPREADING"),
            pulse=_PULSE_FROM_CODE[self._get("PULSE_SHAPE")],
            rolloff=from_q16(self._get("PULSE_PARAM")),
            frame=FrameConfig(
                preamble_len=self._get("PREAMBLE_LEN"),
                sfd=self._get("SFD"),
                length_mode=LengthMode(self._get("LENGTH_MODE")),
                preamble_value=self._get("PREAMBLE_VALUE"),
            ),
            amplitude=from_q16(self._get("AMPLITUDE")),
            detect_threshold=from_q16(self._get("DETECT_THRESHOLD")),
        )

    def mas_config(self) -> MasConfig:
        return MasConfig(
            turnaround_ticks=self._get("TURNAROUND_TICKS"),
            processing_latency_ticks=self._get("PROC_LATENCY"),
            auto_ack=bool(self._get("AUTO_ACK")),
            tx_capacity=self._get("TX_RING_CAPACITY"),
            rx_capacity=self._get("RX_RING_CAPACITY"),
            overflow_policy=OverflowPolicy(self._get("OVERFLOW_POLICY")),
            promiscuous=bool(self._get("PROMISCUOUS")),
        )

    def is_standard_compliant(self) -> bool:
        return self.phy_config().is_standard_compliant()

    def apply_config(self, phy: Optional[PhyConfig] = None, mas: Optional[MasConfig] = None) -> None:
        """Write every register backing ``phy`` and/or ``mas``; all or nothing."""
        image = dict(self._regs)
        updates: dict[str, int] = {}
        if phy is not None:
            if phy.sample_rate_hz != SAMPLE_RATE_HZ or phy.chip_rate_hz != CHIP_RATE_HZ:
                raise IllegalValue("sample and chip rates are fixed at 8 Msps / 2 Mchip/s")
            if phy.pulse not in _PULSE_CODES:
                raise IllegalValue(f"unknown pulse shape {phy.pulse!r}")
            if not 0 < phy.rolloff <= 1:
                raise IllegalValue(f"rolloff {phy.rolloff} outside (0, 1]")
            if not phy.amplitude > 0 or not 0 < phy.detect_threshold <= 1:
                raise IllegalValue("amplitude and detect_threshold must be positive")
            updates.update(
                SPREADING=phy.chips_per_symbol,
                PULSE_SHAPE=_PULSE_CODES[phy.pulse],
                PULSE_PARAM=to_q16(phy.rolloff),
                PREAMBLE_LEN=phy.frame.preamble_len,
                SFD=phy.frame.sfd,
                LENGTH_MODE=int(phy.frame.length_mode),
                PREAMBLE_VALUE=phy.frame.preamble_value,
                AMPLITUDE=to_q16(phy.amplitude),
                DETECT_THRESHOLD=to_q16(phy.detect_threshold),
            )
        if mas is not None:
            updates.update(
                TURNAROUND_TICKS=mas.turnaround_ticks,
                PROC_LATENCY=mas.processing_latency_ticks,
                AUTO_ACK=int(mas.auto_ack),
                TX_RING_CAPACITY=mas.tx_capacity,
                RX_RING_CAPACITY=mas.rx_capacity,
                OVERFLOW_POLICY=int(OverflowPolicy(mas.overflow_policy)),
                PROMISCUOUS=int(mas.promiscuous),
            )
        for name, value in updates.items():
            if not isinstance(value, int) or not 0 <= value <= U32:
                raise IllegalValue(f"{name}: {value!r} is not a 32-bit value")
            image[BY_NAME[name].addr] = value
        self._check(image)
        self._regs = image

    # -- PHY report mirror ------------------------------------------------

    def record_report(self, report: PhyReport) -> None:
        regs = self._regs
        regs[BY_NAME["RSSI"].addr] = to_signed_q16(max(report.rssi_db, -32768.0))
        regs[BY_NAME["LQI"].addr] = report.lqi
        regs[BY_NAME["SYNC_OFFSET"].addr] = report.sync_sample_offset & U32
        regs[BY_NAME["PHASE"].addr] = to_signed_q16(report.phase_estimate_rad)
        regs[BY_NAME["CRC_OK"].addr] = int(report.crc_ok)
        if report.crc_ok:
            regs[BY_NAME["RX_COUNT"].addr] = (regs[BY_NAME["RX_COUNT"].addr] + 1) & U32
        elif report.status is RxStatus.CRC_ERROR:
            regs[BY_NAME["CRC_ERR_COUNT"].addr] = (regs[BY_NAME["CRC_ERR_COUNT"].addr] + 1) & U32

    def count_tx(self) -> None:
        addr = BY_NAME["TX_COUNT"].addr
        self._regs[addr] = (self._regs[addr] + 1) & U32

    # -- IRQs -----------------------------------------------------------

    def raise_irq(self, kind: IrqKind, tick: int, detail: Optional[int] = None) -> bool:
        """Queue an event if its enable bit is set. Returns whether it was delivered."""
        if not self._get("IRQ_ENABLE") & kind:
            return False
        self._regs[BY_NAME["IRQ_STATUS"].addr] |= int(kind)
        self._pending.append(IrqEvent(kind, tick, detail))
        return True

    def poll_irqs(self) -> list[IrqEvent]:
        events, self._pending = self._pending, []
        return events

    # -- persistence ------------------------------------------------------

    def dump(self) -> str:
        return "".join(f"{r.name}=0x{self._regs[r.addr]:08X}\n" for r in REGISTERS)

    def restore(self, text: str) -> None:
        """Load a :meth:`dump`; writable registers and IRQ status only."""
        values = parse_key_values(text)
        image = dict(self._regs)
        for key, raw in values.items():
            reg = resolve(key)
            if reg.access is Access.RO:
                continue
            try:
                value = int(raw, 0)
            except ValueError:
                raise IllegalValue(f"{reg.name}: cannot parse {raw!r}") from None
            image[reg.addr] = value & reg.width_mask
        self._check(image)
        self._regs = image


def parse_key_values(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {line!r}")
        out[key.strip()] = value.strip()
    return out


def format_value(reg: Register, raw: int) -> str:
    return f"0x{raw:08X}" if reg.name in ("CHIP_ID",) else f"0x{raw:X}"


__all__ = [
    "Access",
    "BY_ADDR",
    "BY_NAME",
    "CHIP_ID_VALUE",
    "IrqEvent",
    "IrqKind",
    "REGISTERS",
    "RadioController",
    "Register",
    "format_value",
    "from_q16",
    "from_signed_q16",
    "parse_key_values",
    "resolve",
    "to_q16",
]
