"""Classic libpcap export of MPDUs (LINKTYPE_IEEE802_15_4_WITHFCS)."""

from __future__ import annotations

import struct
from pathlib import Path
from typing import BinaryIO, Iterable, Union

PCAP_MAGIC = 0xA1B2C3D4
LINKTYPE_IEEE802_15_4_WITHFCS = 195
DEFAULT_SNAPLEN = 128

_GLOBAL = struct.Struct("<IHHiIII")
_RECORD = struct.Struct("<IIII")


def pcap_bytes(records: Iterable[tuple[int, bytes]], snaplen: int = DEFAULT_SNAPLEN) -> bytes:
    """Serialise ``(tick_us, mpdu)`` pairs; the MPDU includes its FCS."""
    out = [_GLOBAL.pack(PCAP_MAGIC, 2, 4, 0, 0, snaplen, LINKTYPE_IEEE802_15_4_WITHFCS)]
    for tick, mpdu in records:
        sec, usec = divmod(int(tick), 1_000_000)
        data = bytes(mpdu)[:snaplen]
        out.append(_RECORD.pack(sec, usec, len(data), len(mpdu)))
        out.append(data)
    return b"".join(out)


def write_pcap(dest: Union[str, Path, BinaryIO], records: Iterable[tuple[int, bytes]], snaplen: int = DEFAULT_SNAPLEN) -> None:
    blob = pcap_bytes(records, snaplen)
    if hasattr(dest, "write"):
        dest.write(blob)
    else:
        Path(dest).write_bytes(blob)


def read_pcap(blob: bytes) -> tuple[dict, list[tuple[int, bytes, int]]]:
    """Parse a little-endian classic pcap; returns header fields and ``(tick, data, orig_len)``."""
    magic, major, minor, zone, sigfigs, snaplen, linktype = _GLOBAL.unpack_from(blob)
    if magic != PCAP_MAGIC:
        raise ValueError(f"bad pcap magic 0x{magic:08X}")
    header = dict(magic=magic, version=(major, minor), thiszone=zone, sigfigs=sigfigs, snaplen=snaplen, linktype=linktype)
    records = []
    pos = _GLOBAL.size
    while pos < len(blob):
        sec, usec, incl, orig = _RECORD.unpack_from(blob, pos)
        pos += _RECORD.size
        records.append((sec * 1_000_000 + usec, blob[pos : pos + incl], orig))
        pos += incl
    return header, records
