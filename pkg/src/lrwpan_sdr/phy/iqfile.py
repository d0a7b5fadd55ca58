"""Raw IQ capture files: interleaved float32 LE (I, Q) plus a key=value sidecar."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

import numpy as np

from .config import PhyConfig
from .modem import IqBuffer

SIDECAR_SUFFIX = ".meta"


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + SIDECAR_SUFFIX)


def write_iq(path: Union[str, Path], iq: IqBuffer, cfg: Optional[PhyConfig] = None) -> Path:
    data = np.empty(2 * len(iq), dtype="<f4")
    data[0::2] = iq.samples.real
    data[1::2] = iq.samples.imag
    Path(path).write_bytes(data.tobytes())
    meta = {"sample_rate_hz": str(iq.sample_rate_hz), "start_tick": str(iq.start_tick)}
    if cfg is not None:
        meta.update(cfg.snapshot())
    side = sidecar_path(path)
    side.write_text("".join(f"{k}={v}\n" for k, v in meta.items()))
    return side


def read_sidecar(path: Union[str, Path]) -> dict[str, str]:
    side = sidecar_path(path)
    if not side.exists():
        return {}
    out = {}
    for line in side.read_text().splitlines():
        key, sep, value = line.partition("=")
        if sep:
            out[key.strip()] = value.strip()
    return out


def read_iq(path: Union[str, Path]) -> IqBuffer:
    raw = Path(path).read_bytes()
    if len(raw) % 8:
        raise ValueError(f"{path}: size {len(raw)} is not a multiple of 8 bytes")
    data = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    meta = read_sidecar(path)
    return IqBuffer(
        data[0::2] + 1j * data[1::2],
        start_tick=int(meta.get("start_tick", 0)),
        sample_rate_hz=int(meta.get("sample_rate_hz", 8_000_000)),
    )
