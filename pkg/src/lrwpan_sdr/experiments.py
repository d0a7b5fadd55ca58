"""Seeded experiment drivers behind the CLI: BER sweep, ACK timing, goodput."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .controller import resolve
from .frame import MPDU_OVERHEAD, build_data_frame, build_ppdu
from .mas import TxState
from .medium import LinkModel, Medium, Topology, two_node_topology
from .phy import PhyConfig, frame_ticks, label, soft_chips, spread_octets


def csv_header(tool: str, seed: Optional[int], cfg: Optional[PhyConfig] = None, **extra) -> str:
    lines = [f"# lrwpan-sdr {__version__} {tool} seed={seed}"]
    if cfg is not None:
        lines.append("# config " + " ".join(f"{k}={v}" for k, v in cfg.snapshot().items()))
    if extra:
        lines.append("# " + " ".join(f"{k}={v}" for k, v in extra.items()))
    return "\n".join(lines) + "\n"


def _child_seed(seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([seed, *path]).generate_state(1)[0])


def _configure(medium: Medium, cfg: PhyConfig) -> None:
    for node in medium.nodes:
        node.rc.apply_config(phy=cfg)


# -- BER / CER sweep -------------------------------------------------------


@dataclass
class BerPoint:
    snr_db: float
    cer: float
    per: float
    lqi_mean: float
    chips: int
    frames: int


def run_ber_point(
    snr_db: float,
    frames: int,
    seed: int,
    psdu_len: int = 20,
    cfg: PhyConfig = PhyConfig(),
    gap_ticks: int = 64,
) -> BerPoint:
    """Send ``frames`` data frames A->B over one AWGN link.

    CER compares hard chip decisions from a matched filter with known timing
    and phase against the transmitted chips.  PER counts frames that B did
    not deliver byte-exact with a good FCS through the full receive chain.
    """
    if psdu_len < MPDU_OVERHEAD:
        raise ValueError(f"psdu_len must be at least {MPDU_OVERHEAD}")
    medium = two_node_topology(LinkModel(chip_snr_db=snr_db), seed).build()
    _configure(medium, cfg)
    a, b = medium.node(0), medium.node(1)
    payload_rng = np.random.default_rng(_child_seed(seed, 1))
    span = frame_ticks(cfg, psdu_len)
    chip_errors = chips_total = 0
    good = 0
    lqis = []
    t = 16
    for k in range(frames):
        body = payload_rng.integers(0, 256, psdu_len - MPDU_OVERHEAD, dtype=np.uint8).tobytes()
        psdu = build_data_frame(k & 0xFF, body, ack_request=False)
        handle = a.mas.load_packet(psdu)
        a.mas.set_transmission_time(handle, t)
        medium.advance(t + span)
        reference = spread_octets(build_ppdu(psdu, cfg.frame).octets, cfg)
        iq = medium.deliver(b.node_id, t, t + span)
        decided = np.where(soft_chips(iq, cfg, 0, reference.size) >= 0, 1, -1)
        chip_errors += int(np.count_nonzero(decided != reference))
        chips_total += reference.size
        while (rec := b.mas.get_packet()) is not None:
            if rec.psdu == psdu and rec.report.crc_ok:
                good += 1
                lqis.append(rec.report.lqi)
        t += span + gap_ticks
    return BerPoint(
        snr_db=snr_db,
        cer=chip_errors / chips_total if chips_total else math.nan,
        per=1.0 - good / frames if frames else math.nan,
        lqi_mean=float(np.mean(lqis)) if lqis else math.nan,
        chips=chips_total,
        frames=frames,
    )


def run_ber(
    snrs: Sequence[float], frames: int, seed: int, psdu_len: int = 20, cfg: PhyConfig = PhyConfig()
) -> list[BerPoint]:
    if not snrs:
        raise ValueError("need at least one SNR point")
    return [run_ber_point(s, frames, _child_seed(seed, 0, i), psdu_len, cfg) for i, s in enumerate(snrs)]


def ber_csv(points: Sequence[BerPoint], seed: int, cfg: PhyConfig, psdu_len: int) -> str:
    out = [csv_header("ber", seed, cfg, psdu_len=psdu_len), "snr_db,cer,per,lqi_mean,chips,frames\n"]
    for p in points:
        out.append(f"{p.snr_db:g},{p.cer:.6e},{p.per:.6f},{p.lqi_mean:.3f},{p.chips},{p.frames}\n")
    return "".join(out)


# -- ACK timing --------------------------------------------------------------


@dataclass
class AckRow:
    seq: int
    tx_tick: int
    rx_end_tick: Optional[int]
    ack_tick: Optional[int]

    @property
    def turnaround_observed(self) -> Optional[int]:
        if self.rx_end_tick is None or self.ack_tick is None:
            return None
        return self.ack_tick - self.rx_end_tick


@dataclass
class AckResult:
    rows: list[AckRow]
    expected_turnaround: int
    medium: Medium = field(repr=False)

    @property
    def max_error(self) -> Optional[int]:
        observed = [r.turnaround_observed for r in self.rows]
        if not observed or any(o is None for o in observed):
            return None
        return max(abs(o - self.expected_turnaround) for o in observed)

    def csv(self, seed: int, cfg: PhyConfig) -> str:
        out = [
            csv_header("demo-ack", seed, cfg, expected_turnaround=self.expected_turnaround),
            "seq,tx_tick,rx_end_tick,ack_tick,turnaround_observed\n",
        ]
        for r in self.rows:
            cells = [r.seq, r.tx_tick, r.rx_end_tick, r.ack_tick, r.turnaround_observed]
            out.append(",".join("" if c is None else str(c) for c in cells) + "\n")
        return "".join(out)


def run_demo_ack(
    frames: int = 100,
    grid_ticks: int = 10_000,
    psdu_len: int = 20,
    proc_latency: int = 0,
    topology: Optional[Topology] = None,
    seed: int = 0,
    cfg: PhyConfig = PhyConfig(),
) -> AckResult:
    """Node A sends ack-requested frames at k * grid; node B auto-acks."""
    topology = topology or two_node_topology(seed=seed)
    medium = topology.build(seed)
    if len(medium.nodes) < 2:
        raise ValueError("the ACK demo needs two nodes")
    _configure(medium, cfg)
    for node in medium.nodes:
        node.rc.write_register("PROC_LATENCY", proc_latency)
    a, b = medium.node(0), medium.node(1)
    payload_rng = np.random.default_rng(_child_seed(seed, 2))
    sent = []
    for k in range(1, frames + 1):
        seq = k & 0xFF
        body = payload_rng.integers(0, 256, psdu_len - MPDU_OVERHEAD, dtype=np.uint8).tobytes()
        handle = a.mas.load_packet(build_data_frame(seq, body, ack_request=True))
        a.mas.set_transmission_time(handle, k * grid_ticks)
        sent.append((seq, k * grid_ticks))
        medium.advance((k + 1) * grid_ticks - 1)
        while a.mas.get_packet() is not None:
            pass
        while b.mas.get_packet() is not None:
            pass
    rows = []
    events = sorted(medium.trace, key=lambda e: e.tick)
    for seq, tx_tick in sent:
        window = [e for e in events if tx_tick <= e.tick < tx_tick + grid_ticks and e.node_id == b.node_id]
        rx_end = next((e.tick for e in window if e.event == "RX_END" and e.seq == seq), None)
        ack = next((e.tick for e in window if e.event == "ACK_TX" and e.seq == seq), None)
        rows.append(AckRow(seq, tx_tick, rx_end, ack))
    mcfg = b.rc.mas_config()
    return AckResult(rows, mcfg.ack_delay_ticks, medium)


# -- goodput with live reconfiguration --------------------------------------


@dataclass(frozen=True)
class Switch:
    tick: int
    register: str
    value: int

    @classmethod
    def parse(cls, text: str) -> "Switch":
        """``tick:REG=value``, e.g. ``1000000:SPREADING=16``."""
        tick, _, assignment = text.partition(":")
        reg, sep, value = assignment.partition("=")
        if not sep:
            raise ValueError(f"expected tick:REG=value, got {text!r}")
        return cls(int(tick, 0), resolve(reg).name, int(value, 0))


@dataclass
class ThroughputResult:
    windows: list[tuple[int, str, float]]
    acked: list[tuple[int, int]]  # (ack rx tick at sender, payload bits)
    sent: int
    crc_errors: int
    medium: Medium = field(repr=False)

    def csv(self, seed: int, cfg: PhyConfig, **extra) -> str:
        out = [csv_header("demo-throughput", seed, cfg, **extra), "window_start_tick,config_label,goodput_bps\n"]
        out += [f"{start},{tag},{bps:.3f}\n" for start, tag, bps in self.windows]
        return "".join(out)


def run_demo_throughput(
    duration_ticks: int = 2_000_000,
    window_ticks: int = 100_000,
    switches: Sequence[Switch] = (),
    psdu_len: Optional[int] = None,
    ifs_ticks: int = 192,
    topology: Optional[Topology] = None,
    seed: int = 0,
    cfg: PhyConfig = PhyConfig(),
    first_tx_tick: int = 100,
    ack_timeout_ticks: int = 2_000,
) -> ThroughputResult:
    """Stream max-size ack-requested frames A->B, applying register switches on the fly.

    The next frame goes out ``ifs_ticks`` after its predecessor's ACK was
    received.  A frame without an ACK within ``ack_timeout_ticks`` of its end
    is abandoned (no retransmission).  Goodput counts MAC payload octets of
    acknowledged frames, binned by the tick at which the ACK was received.
    """
    if ifs_ticks < 1:
        raise ValueError("ifs_ticks must be >= 1")
    topology = topology or two_node_topology(seed=seed)
    medium = topology.build(seed)
    _configure(medium, cfg)
    a = medium.node(0)
    psdu_len = psdu_len or cfg.frame.max_psdu
    payload_bits = (psdu_len - MPDU_OVERHEAD) * 8
    payload_rng = np.random.default_rng(_child_seed(seed, 3))
    pending = sorted(switches, key=lambda s: s.tick)
    labels = [(0, label(a.rc.phy_config()))]
    acked: list[tuple[int, int]] = []
    sent = 0

    def send(at: int) -> int:
        nonlocal sent
        body = payload_rng.integers(0, 256, psdu_len - MPDU_OVERHEAD, dtype=np.uint8).tobytes()
        handle = a.mas.load_packet(build_data_frame(sent & 0xFF, body, ack_request=True))
        a.mas.set_transmission_time(handle, at)
        sent += 1
        return handle

    current = send(first_tx_tick) if first_tx_tick < duration_ticks else None
    while medium.now < duration_ticks:
        targets = [duration_ticks]
        if (t := medium.next_event_tick()) is not None:
            targets.append(max(t, medium.now))
        if pending:
            targets.append(pending[0].tick)
        entry = a.mas.entry(current) if current is not None else None
        if entry is not None and entry.state is TxState.DONE and not entry.acked:
            targets.append(entry.end_tick + ack_timeout_ticks)
        target = min(targets)
        medium.advance(target)
        while pending and pending[0].tick <= medium.now:
            sw = pending.pop(0)
            for node in medium.nodes:
                node.rc.write_register(sw.register, sw.value)
            labels.append((sw.tick, label(a.rc.phy_config())))
        while a.mas.get_packet() is not None:
            pass
        for node in medium.nodes[1:]:
            while node.mas.get_packet() is not None:
                pass
        if entry is None:
            continue
        if entry.acked:
            acked.append((entry.ack_rx_tick, payload_bits))
            nxt = entry.ack_rx_tick + ifs_ticks
        elif entry.state is TxState.MISSED or (
            entry.state is TxState.DONE and medium.now >= entry.end_tick + ack_timeout_ticks
        ):
            nxt = medium.now + ifs_ticks
        else:
            continue
        current = send(max(nxt, medium.now + 1)) if nxt < duration_ticks else None

    crc_errors = sum(node.rc.read_register("CRC_ERR_COUNT") for node in medium.nodes)
    windows = []
    for start in range(0, duration_ticks, window_ticks):
        end = min(start + window_ticks, duration_ticks)
        bits = sum(b for t, b in acked if start <= t < end)
        tag = [tag for t, tag in labels if t <= start][-1]
        windows.append((start, tag, bits / ((end - start) * 1e-6)))
    return ThroughputResult(windows, acked, sent, crc_errors, medium)
