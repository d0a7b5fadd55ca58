"""IEEE 802.15.4 PPDU/MPDU framing and the 16-bit FCS.

PPDU layout::

    +----------+-----+-----+-------+
    | PREAMBLE | SFD | PHR | PSDU  |
    | N x 0x00 | A7  | 1B  | 0-127 |
    +----------+-----+-----+-------+

The extended length mode replaces the one-octet PHR by a two-octet
little-endian length and lifts the PSDU limit to 65535 octets.  It is not
part of the standard and is reported as such by the PHY.

MPDU layout: FCF (2, LE) | seq (1) | body | FCS (2, LE).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Union

from .errors import BadSfd, ConfigError, FrameError, LengthOverflow, TooShort, Truncated

A_MAX_PHY_PACKET_SIZE = 127
EXTENDED_MAX_PSDU = 0xFFFF
DEFAULT_SFD = 0xA7
DEFAULT_PREAMBLE_LEN = 4

FCS_POLY_REFLECTED = 0x8408  # x^16 + x^12 + x^5 + 1, bit-reversed


def _make_table() -> list[int]:
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = (crc >> 1) ^ FCS_POLY_REFLECTED if crc & 1 else crc >> 1
        table.append(crc)
    return table


_CRC_TABLE = _make_table()


def crc16_fcs(data: bytes) -> int:
    """FCS as appended by an 802.15.4 transmitter (CRC-16/KERMIT, init 0)."""
    crc = 0
    for byte in data:
        crc = (crc >> 8) ^ _CRC_TABLE[(crc ^ byte) & 0xFF]
    return crc


def validate_fcs(mpdu: bytes) -> bool:
    if len(mpdu) < 2:
        return False
    return crc16_fcs(mpdu[:-2]) == int.from_bytes(mpdu[-2:], "little")


def build_mpdu(data: bytes) -> bytes:
    """Append the FCS to ``data`` (low octet first)."""
    data = bytes(data)
    return data + crc16_fcs(data).to_bytes(2, "little")


class LengthMode(IntEnum):
    STANDARD_7BIT = 0
    EXTENDED_16BIT = 1

    @property
    def phr_len(self) -> int:
        return 1 if self is LengthMode.STANDARD_7BIT else 2

    @property
    def max_psdu(self) -> int:
        return A_MAX_PHY_PACKET_SIZE if self is LengthMode.STANDARD_7BIT else EXTENDED_MAX_PSDU


@dataclass(frozen=True)
class FrameConfig:
    preamble_len: int = DEFAULT_PREAMBLE_LEN
    sfd: int = DEFAULT_SFD
    length_mode: LengthMode = LengthMode.STANDARD_7BIT
    # Anything but 0x00 is only accepted in extended mode.
    preamble_value: int = 0x00

    def validate(self) -> None:
        if not 2 <= self.preamble_len <= 16:
            raise ConfigError(f"preamble_len must be in [2, 16], got {self.preamble_len}")
        if not 0 <= self.sfd <= 0xFF:
            raise ConfigError(f"sfd must be one octet, got {self.sfd}")
        if not 0 <= self.preamble_value <= 0xFF:
            raise ConfigError(f"preamble_value must be one octet, got {self.preamble_value}")
        if self.preamble_value != 0 and self.length_mode is not LengthMode.EXTENDED_16BIT:
            raise ConfigError("custom preamble values require the extended length mode")

    @property
    def phr_len(self) -> int:
        return LengthMode(self.length_mode).phr_len

    @property
    def max_psdu(self) -> int:
        return LengthMode(self.length_mode).max_psdu

    @property
    def shr_len(self) -> int:
        return self.preamble_len + 1

    @property
    def is_standard(self) -> bool:
        return self == FrameConfig()

    def ppdu_len(self, psdu_len: int) -> int:
        return self.shr_len + self.phr_len + psdu_len

    def preamble(self) -> bytes:
        return bytes([self.preamble_value]) * self.preamble_len


@dataclass(frozen=True)
class Ppdu:
    octets: bytes
    psdu_len: int
    cfg: FrameConfig

    def __bytes__(self) -> bytes:
        return self.octets

    def __len__(self) -> int:
        return len(self.octets)

    @property
    def phr(self) -> int:
        start = self.cfg.shr_len
        return int.from_bytes(self.octets[start:start + self.cfg.phr_len], "little")

    @property
    def psdu(self) -> bytes:
        return self.octets[self.cfg.shr_len + self.cfg.phr_len:]


def build_ppdu(psdu: bytes, cfg: FrameConfig = FrameConfig()) -> Ppdu:
    cfg.validate()
    psdu = bytes(psdu)
    if len(psdu) > cfg.max_psdu:
        raise LengthOverflow(f"PSDU of {len(psdu)} octets exceeds {cfg.max_psdu}")
    # In 7-bit mode the reserved PHR bit 7 is always zero.
    phr = len(psdu).to_bytes(cfg.phr_len, "little")
    octets = cfg.preamble() + bytes([cfg.sfd]) + phr + psdu
    return Ppdu(octets, len(psdu), cfg)


def parse_ppdu(data: Union[bytes, Ppdu], cfg: FrameConfig = FrameConfig()) -> tuple[bytes, int]:
    """Inverse of :func:`build_ppdu`. Returns ``(psdu, consumed_octets)``."""
    data = bytes(data)
    cfg.validate()
    shr = cfg.shr_len
    if len(data) < shr + cfg.phr_len:
        raise Truncated(f"need {shr + cfg.phr_len} octets for SHR+PHR, have {len(data)}")
    if data[cfg.preamble_len] != cfg.sfd:
        raise BadSfd(f"SFD 0x{data[cfg.preamble_len]:02X} != 0x{cfg.sfd:02X}")
    length = parse_phr(data[shr:shr + cfg.phr_len], cfg)
    start = shr + cfg.phr_len
    if len(data) < start + length:
        raise Truncated(f"PHR announces {length} octets, {len(data) - start} present")
    return data[start:start + length], start + length


def parse_phr(phr: bytes, cfg: FrameConfig) -> int:
    value = int.from_bytes(phr, "little")
    if cfg.length_mode == LengthMode.STANDARD_7BIT:
        return value & 0x7F
    return value


class FrameType(IntEnum):
    BEACON = 0
    DATA = 1
    ACK = 2
    MAC_COMMAND = 3


@dataclass(frozen=True)
class FcfFields:
    """Decoded frame control field. Bit layout (LSB first):

    0-2 type, 3 security, 4 frame pending, 5 ack request, 6 PAN ID
    compression, 7-9 reserved, 10-11 dest mode, 12-13 version, 14-15 src mode.
    """

    frame_type: int = FrameType.DATA
    security: bool = False
    frame_pending: bool = False
    ack_request: bool = False
    pan_id_compression: bool = False
    reserved: int = 0
    dest_mode: int = 0
    version: int = 0
    src_mode: int = 0
    seq: Optional[int] = None

    @classmethod
    def from_int(cls, fcf: int, seq: Optional[int] = None) -> "FcfFields":
        ftype = fcf & 0x7
        return cls(
            frame_type=FrameType(ftype) if ftype < 4 else ftype,
            security=bool(fcf >> 3 & 1),
            frame_pending=bool(fcf >> 4 & 1),
            ack_request=bool(fcf >> 5 & 1),
            pan_id_compression=bool(fcf >> 6 & 1),
            reserved=fcf >> 7 & 0x7,
            dest_mode=fcf >> 10 & 0x3,
            version=fcf >> 12 & 0x3,
            src_mode=fcf >> 14 & 0x3,
            seq=seq,
        )

    def to_int(self) -> int:
        return (
            (int(self.frame_type) & 0x7)
            | int(self.security) << 3
            | int(self.frame_pending) << 4
            | int(self.ack_request) << 5
            | int(self.pan_id_compression) << 6
            | (self.reserved & 0x7) << 7
            | (self.dest_mode & 0x3) << 10
            | (self.version & 0x3) << 12
            | (self.src_mode & 0x3) << 14
        )


def parse_fcf(mpdu: bytes) -> FcfFields:
    if len(mpdu) < 3:
        raise TooShort(f"MPDU needs FCF and sequence number, got {len(mpdu)} octets")
    return FcfFields.from_int(mpdu[0] | mpdu[1] << 8, seq=mpdu[2])


@dataclass(frozen=True)
class Mpdu:
    fcf: int
    seq: int
    body: bytes = b""
    fcs: Optional[int] = None

    def __post_init__(self):
        if not 0 <= self.fcf <= 0xFFFF:
            raise FrameError(f"FCF out of range: {self.fcf}")
        if not 0 <= self.seq <= 0xFF:
            raise FrameError(f"sequence number out of range: {self.seq}")
        if self.fcs is None:
            object.__setattr__(self, "fcs", crc16_fcs(self._header_and_body()))

    def _header_and_body(self) -> bytes:
        return struct.pack("<HB", self.fcf, self.seq) + bytes(self.body)

    def to_bytes(self) -> bytes:
        return self._header_and_body() + struct.pack("<H", self.fcs)

    def __bytes__(self) -> bytes:
        return self.to_bytes()

    @property
    def fields(self) -> FcfFields:
        return FcfFields.from_int(self.fcf, self.seq)

    @property
    def fcs_ok(self) -> bool:
        return self.fcs == crc16_fcs(self._header_and_body())

    @classmethod
    def from_bytes(cls, data: bytes) -> "Mpdu":
        if len(data) < 5:
            raise TooShort(f"MPDU needs at least 5 octets, got {len(data)}")
        fcf, seq = struct.unpack_from("<HB", data)
        (fcs,) = struct.unpack("<H", data[-2:])
        return cls(fcf, seq, bytes(data[3:-2]), fcs)


def build_data_frame(seq: int, body: bytes, ack_request: bool = True) -> bytes:
    """Data MPDU with the given body; addressing, if any, lives in ``body``."""
    fcf = FcfFields(frame_type=FrameType.DATA, ack_request=ack_request).to_int()
    return Mpdu(fcf, seq & 0xFF, bytes(body)).to_bytes()


def build_ack(seq: int) -> bytes:
    return Mpdu(FcfFields(frame_type=FrameType.ACK).to_int(), seq & 0xFF).to_bytes()


ACK_MPDU_LEN = 5
MPDU_OVERHEAD = 5
