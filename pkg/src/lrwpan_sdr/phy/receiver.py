"""Receive chain: preamble sync, per-symbol waveform correlation, frame decode.

Each chip is matched-filtered against its pulse and the resulting soft chips
are correlated against the 16 reference rows.  Because both steps are linear
this is the same as correlating the received samples of a symbol window with
the 16 reference symbol waveforms, but it only filters the buffer once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from ..frame import parse_phr, validate_fcs
from .config import PhyConfig
from .dsss import despread_many, spread_octets
from .modem import IqBuffer, modulate, pulse_for


class RxStatus(enum.Enum):
    OK = "ok"
    CRC_ERROR = "crc_error"
    BAD_SFD = "bad_sfd"
    TRUNCATED = "truncated"


@dataclass(frozen=True)
class SyncCandidate:
    sample_offset: int
    phase_estimate: float
    metric: float
    amplitude: float


@dataclass
class PhyReport:
    rssi_db: float
    lqi: int
    sync_sample_offset: int
    phase_estimate_rad: float
    crc_ok: bool
    config_snapshot: PhyConfig
    status: RxStatus = RxStatus.OK
    psdu_len: int = 0
    sfd_end_sample: Optional[int] = None
    frame_end_sample: Optional[int] = None
    metric: float = 0.0

    @property
    def delivered(self) -> bool:
        return self.status in (RxStatus.OK, RxStatus.CRC_ERROR)


def preamble_reference(cfg: PhyConfig) -> np.ndarray:
    """Unit-amplitude preamble waveform, cut before the trailing Q-rail tail."""
    unit = cfg.with_(amplitude=1.0)
    chips = spread_octets(cfg.frame.preamble(), unit)
    return modulate(chips, unit).samples[: chips.size * cfg.samples_per_chip]


def _sliding_energy(x: np.ndarray, width: int) -> np.ndarray:
    power = np.concatenate(([0.0], np.cumsum(np.abs(x) ** 2)))
    return power[width:] - power[:-width]


def detect_preamble(iq, cfg: PhyConfig = PhyConfig(), threshold: Optional[float] = None) -> list[SyncCandidate]:
    """Normalised preamble correlation peaks above ``threshold``, best first.

    Peaks closer than one preamble length to a stronger one are dropped.
    """
    x = iq.samples if isinstance(iq, IqBuffer) else np.asarray(iq, dtype=np.complex128)
    ref = preamble_reference(cfg)
    theta = cfg.detect_threshold if threshold is None else threshold
    if x.size < ref.size:
        return []
    corr = signal.correlate(x, ref, mode="valid")
    ref_energy = float(np.vdot(ref, ref).real)
    win_energy = np.clip(_sliding_energy(x, ref.size), 0.0, None)
    denom = np.sqrt(ref_energy * win_energy)
    metric = np.divide(np.abs(corr), denom, out=np.zeros(corr.size), where=denom > 1e-12 * ref_energy)
    peaks, _ = signal.find_peaks(np.concatenate(([-1.0], metric, [-1.0])), height=theta, distance=ref.size)
    peaks -= 1
    found = [
        SyncCandidate(int(p), float(np.angle(corr[p])), float(metric[p]), float(abs(corr[p]) / ref_energy))
        for p in peaks
    ]
    found.sort(key=lambda c: (-c.metric, c.sample_offset))
    return found


class _SoftChips:
    """Matched-filter output of a buffer, sampled per chip on demand."""

    def __init__(self, x: np.ndarray, cfg: PhyConfig):
        self.cfg = cfg
        self.spc = cfg.samples_per_chip
        pulse = pulse_for(cfg)
        padded = np.concatenate((np.zeros(pulse.lead, dtype=x.dtype), x, np.zeros(pulse.taps.size, dtype=x.dtype)))
        self.mf = signal.correlate(padded, pulse.taps, mode="valid")
        self.energy = pulse.energy
        self.n = x.size

    def chips(self, offset: int, first: int, count: int, rotation: complex) -> np.ndarray:
        idx = offset + (first + np.arange(count)) * self.spc
        values = self.mf[idx] * rotation
        out = np.where((first + np.arange(count)) % 2 == 0, values.real, values.imag)
        return out / self.energy


def soft_chips(
    iq,
    cfg: PhyConfig,
    offset: int,
    n_chips: int,
    phase: float = 0.0,
    amplitude: Optional[float] = None,
) -> np.ndarray:
    """Matched-filter soft chip values of a frame starting at ``offset``.

    Noiseless chips come out as +/-1 when ``amplitude`` matches the
    transmitter (defaults to ``cfg.amplitude``).
    """
    x = iq.samples if isinstance(iq, IqBuffer) else np.asarray(iq, dtype=np.complex128)
    amp = cfg.amplitude if amplitude is None else amplitude
    sc = _SoftChips(x, cfg)
    return sc.chips(offset, 0, n_chips, np.exp(-1j * phase) / amp)


def _lqi(scores: list[np.ndarray]) -> int:
    allscores = np.concatenate(scores) if scores else np.zeros(1)
    return int(min(255, max(0, round(255 * float(np.mean(allscores))))))


def _rssi_db(x: np.ndarray) -> float:
    power = float(np.mean(np.abs(x) ** 2)) if x.size else 0.0
    return 10 * math.log10(power) if power > 0 else -math.inf


def _decode_at(x: np.ndarray, sc: _SoftChips, cfg: PhyConfig, cand: SyncCandidate):
    fc = cfg.frame
    cps = cfg.chips_per_symbol
    spc = cfg.samples_per_chip
    o = cand.sample_offset
    rotation = np.exp(-1j * cand.phase_estimate) / max(cand.amplitude, 1e-300)
    scores: list[np.ndarray] = []

    def report(status, psdu_len=0, sfd_end=None, frame_end=None, crc_ok=False):
        end = frame_end if frame_end is not None else o + preamble_reference(cfg).size
        return PhyReport(
            rssi_db=_rssi_db(x[o:end]),
            lqi=_lqi(scores),
            sync_sample_offset=o,
            phase_estimate_rad=cand.phase_estimate,
            crc_ok=crc_ok,
            config_snapshot=cfg,
            status=status,
            psdu_len=psdu_len,
            sfd_end_sample=sfd_end,
            frame_end_sample=frame_end,
            metric=cand.metric,
        )

    def octets(first_octet: int, count: int) -> Optional[bytes]:
        first_chip = 2 * first_octet * cps
        n_chips = 2 * count * cps
        if o + (first_chip + n_chips) * spc + spc > sc.n:
            return None
        soft = sc.chips(o, first_chip, n_chips, rotation)
        symbols, score = despread_many(soft, cfg)
        scores.append(score)
        return ((symbols[1::2] << 4) | symbols[0::2]).astype(np.uint8).tobytes()

    sfd = octets(fc.preamble_len, 1)
    if sfd is None:
        return b"", report(RxStatus.TRUNCATED)
    sfd_end = o + 2 * fc.shr_len * cps * spc
    if sfd[0] != fc.sfd:
        return b"", report(RxStatus.BAD_SFD)
    phr = octets(fc.shr_len, fc.phr_len)
    if phr is None:
        return b"", report(RxStatus.TRUNCATED, sfd_end=sfd_end)
    length = parse_phr(phr, fc)
    psdu = octets(fc.shr_len + fc.phr_len, length)
    if psdu is None:
        return b"", report(RxStatus.TRUNCATED, psdu_len=length, sfd_end=sfd_end)
    crc_ok = validate_fcs(psdu) if length >= 2 else True
    status = RxStatus.OK if crc_ok else RxStatus.CRC_ERROR
    frame_end = o + cfg.frame_samples(length)
    return psdu, report(status, length, sfd_end, frame_end, crc_ok)


def rx_frames(iq, cfg: PhyConfig = PhyConfig()) -> list[tuple[bytes, PhyReport]]:
    """Decode every frame in ``iq``; one ``(psdu, report)`` per decode attempt.

    Attempts are returned in time order.  Failed attempts carry an empty
    PSDU (sync/SFD/length failures) or the corrupted PSDU (FCS failure).
    """
    cfg.validate()
    x = iq.samples if isinstance(iq, IqBuffer) else np.asarray(iq, dtype=np.complex128)
    candidates = sorted(detect_preamble(x, cfg), key=lambda c: c.sample_offset)
    if not candidates:
        return []
    sc = _SoftChips(x, cfg)
    results = []
    busy_until = -1
    for cand in candidates:
        if cand.sample_offset < busy_until:
            continue
        psdu, rep = _decode_at(x, sc, cfg, cand)
        results.append((psdu, rep))
        if rep.delivered:
            busy_until = rep.frame_end_sample
    return results
