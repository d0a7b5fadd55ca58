"""Medium access scheduler: Tx/Rx ring buffers on a 1 us virtual timer.

Packets are loaded into the Tx ring, given an absolute transmission tick,
and rendered by the PHY at exactly that tick.  Received frames land in the
Rx ring.  Acknowledgments requested by received data frames are scheduled
``turnaround + processing latency`` ticks after the end of the frame from a
dedicated slot, so a full Tx ring cannot delay them.

A scheduler on its own advances a private single-node medium; attach it to
a :class:`~lrwpan_sdr.medium.Medium` to exchange frames with other nodes.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Optional

from .errors import LengthOverflow, RingFull, SchedulerError, TimeInPast, TooShort, UnknownHandle
from .frame import FrameType, build_ack, parse_fcf
from .phy import SAMPLES_PER_TICK, IqBuffer, PhyReport, tx_frame

if TYPE_CHECKING:
    from .controller import RadioController
    from .medium import Medium


class OverflowPolicy(enum.IntEnum):
    DROP_NEWEST = 0
    ERROR = 1


@dataclass(frozen=True)
class MasConfig:
    turnaround_ticks: int = 192
    processing_latency_ticks: int = 0
    auto_ack: bool = True
    tx_capacity: int = 16
    rx_capacity: int = 16
    overflow_policy: OverflowPolicy = OverflowPolicy.DROP_NEWEST
    promiscuous: bool = False

    @property
    def ack_delay_ticks(self) -> int:
        return self.turnaround_ticks + self.processing_latency_ticks


class TxState(enum.Enum):
    LOADED = "loaded"
    SCHEDULED = "scheduled"
    TRANSMITTING = "transmitting"
    DONE = "done"
    MISSED = "missed"


_ALLOWED = {
    TxState.LOADED: {TxState.SCHEDULED},
    TxState.SCHEDULED: {TxState.SCHEDULED, TxState.TRANSMITTING, TxState.MISSED},
    TxState.TRANSMITTING: {TxState.DONE},
    TxState.DONE: set(),
    TxState.MISSED: set(),
}

TERMINAL = (TxState.DONE, TxState.MISSED)


@dataclass
class TxEntry:
    handle: int
    psdu: bytes
    ack_request: bool = False
    seq: int = 0
    tx_time: Optional[int] = None
    state: TxState = TxState.LOADED
    is_ack: bool = False
    end_tick: Optional[int] = None
    acked: bool = False
    ack_rx_tick: Optional[int] = None

    def move_to(self, state: TxState) -> None:
        if state not in _ALLOWED[self.state]:
            raise SchedulerError(f"handle {self.handle}: {self.state.value} -> {state.value} not allowed")
        self.state = state


@dataclass
class RxRecord:
    psdu: bytes
    rx_end_tick: int
    report: PhyReport


@dataclass(frozen=True)
class Transmission:
    src: int
    iq: IqBuffer
    handle: int
    seq: int
    is_ack: bool = False

    @property
    def start_tick(self) -> int:
        return self.iq.start_tick

    @property
    def start_sample(self) -> int:
        return self.iq.start_sample

    @property
    def end_tick(self) -> int:
        return self.iq.end_tick


@dataclass(frozen=True)
class TraceEvent:
    tick: int
    node_id: int
    event: str
    handle: Optional[int] = None
    seq: Optional[int] = None

    def csv(self) -> str:
        handle = "" if self.handle is None else str(self.handle)
        seq = "" if self.seq is None else str(self.seq)
        return f"{self.tick},{self.node_id},{self.event},{handle},{seq}"


TRACE_HEADER = "tick,node_id,event,handle,seq"


class RingBuffer:
    """Bounded FIFO. ``push`` returns False when full (the caller applies policy)."""

    def __init__(self, capacity: int = 16):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items: deque = deque()

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator:
        return iter(self._items)

    @property
    def full(self) -> bool:
        return len(self._items) >= self.capacity

    def push(self, item) -> bool:
        if self.full:
            return False
        self._items.append(item)
        return True

    def pop(self):
        return self._items.popleft() if self._items else None

    def peek(self):
        return self._items[0] if self._items else None

    def remove(self, item) -> None:
        self._items.remove(item)


def _ticks_for_samples(n: int) -> int:
    return -(-n // SAMPLES_PER_TICK)


class Mas:
    """Scheduler of one node. Configuration is read from ``controller``."""

    def __init__(self, controller: Optional["RadioController"] = None):
        if controller is None:
            from .controller import RadioController

            controller = RadioController()
        self.rc = controller
        self.node_id = 0
        self.medium: Optional["Medium"] = None
        self.trace: list[TraceEvent] = []
        self.entries: dict[int, TxEntry] = {}
        cfg = controller.mas_config()
        self.tx_ring = RingBuffer(cfg.tx_capacity)
        self.rx_ring = RingBuffer(cfg.rx_capacity)
        self._ack_slot: list[TxEntry] = []
        self._transmitting: Optional[TxEntry] = None
        self._handles = itertools.count(1)
        self._local_now = 0

    # -- clock -----------------------------------------------------------

    @property
    def now(self) -> int:
        return self.medium.now if self.medium is not None else self._local_now

    @property
    def config(self) -> MasConfig:
        return self.rc.mas_config()

    # -- public API --------------------------------------------------------

    def load_packet(self, psdu: bytes, ack_request: Optional[bool] = None, seq: Optional[int] = None) -> Optional[int]:
        """Queue a PSDU in the Tx ring; returns its handle.

        ``ack_request``/``seq`` default to the values in the frame's MAC header.
        Under the drop-newest policy a full ring yields ``None``.
        """
        psdu = bytes(psdu)
        frame_cfg = self.rc.phy_config().frame
        if len(psdu) > frame_cfg.max_psdu:
            raise LengthOverflow(f"PSDU of {len(psdu)} octets exceeds {frame_cfg.max_psdu}")
        if ack_request is None or seq is None:
            try:
                fcf = parse_fcf(psdu)
            except TooShort:
                fcf = None
            if ack_request is None:
                ack_request = bool(fcf and fcf.ack_request)
            if seq is None:
                seq = fcf.seq if fcf else 0
        cfg = self.config
        self.tx_ring.capacity = cfg.tx_capacity
        if self.tx_ring.full:
            self._trace("OVERFLOW", None, seq)
            if cfg.overflow_policy is OverflowPolicy.ERROR:
                raise RingFull(f"Tx ring holds {len(self.tx_ring)} entries")
            return None
        entry = TxEntry(next(self._handles), psdu, bool(ack_request), seq & 0xFF)
        self.tx_ring.push(entry)
        self.entries[entry.handle] = entry
        return entry.handle

    def set_transmission_time(self, handle: int, t: int) -> None:
        entry = self.entries.get(handle)
        if entry is None or entry.is_ack:
            raise UnknownHandle(handle)
        if entry.state not in (TxState.LOADED, TxState.SCHEDULED):
            raise SchedulerError(f"handle {handle} is {entry.state.value}")
        if t <= self.now:
            raise TimeInPast(f"tick {t} is not after now={self.now}")
        entry.move_to(TxState.SCHEDULED)
        entry.tx_time = int(t)

    def get_packet(self) -> Optional[RxRecord]:
        return self.rx_ring.pop()

    def advance(self, to: int) -> list[Transmission]:
        """Run the virtual timer up to tick ``to``; returns this node's emissions."""
        if self.medium is None:
            from .medium import Medium

            Medium().attach_node(self)
        return [tx for tx in self.medium.advance(to) if tx.src == self.node_id]

    def entry(self, handle: int) -> TxEntry:
        try:
            return self.entries[handle]
        except KeyError:
            raise UnknownHandle(handle) from None

    @property
    def transmitting(self) -> bool:
        return self._transmitting is not None

    # -- hooks driven by the medium ----------------------------------------

    def _trace(self, event: str, handle: Optional[int], seq: Optional[int], tick: Optional[int] = None) -> None:
        self.trace.append(TraceEvent(self.now if tick is None else tick, self.node_id, event, handle, seq))

    def _scheduled(self) -> Iterator[TxEntry]:
        for entry in itertools.chain(self.tx_ring, self._ack_slot):
            if entry.state is TxState.SCHEDULED:
                yield entry

    def next_event_tick(self) -> Optional[int]:
        ticks = [e.tx_time for e in self._scheduled()]
        if self._transmitting is not None:
            ticks.append(self._transmitting.end_tick)
        return min(ticks) if ticks else None

    def _due(self, t: int) -> list[TxEntry]:
        return sorted((e for e in self._scheduled() if e.tx_time <= t), key=lambda e: e.handle)

    def _release(self, entry: TxEntry) -> None:
        if entry.is_ack:
            self._ack_slot.remove(entry)
        else:
            self.tx_ring.remove(entry)

    def _miss(self, entry: TxEntry, t: int) -> None:
        from .controller import IrqKind

        entry.move_to(TxState.MISSED)
        self._release(entry)
        self._trace("MISSED", entry.handle, entry.seq, t)
        self.rc.raise_irq(IrqKind.SCHEDULED_TX_MISSED, t, entry.handle)

    def _emit(self, entry: TxEntry, t: int) -> Transmission:
        cfg = self.rc.phy_config()
        iq = tx_frame(entry.psdu, cfg, start_tick=t)
        entry.move_to(TxState.TRANSMITTING)
        entry.end_tick = iq.end_tick
        self._transmitting = entry
        self._trace("ACK_TX" if entry.is_ack else "TX_START", entry.handle, entry.seq, t)
        return Transmission(self.node_id, iq, entry.handle, entry.seq, entry.is_ack)

    def _finish_tx(self, t: int) -> None:
        from .controller import IrqKind

        entry = self._transmitting
        self._transmitting = None
        entry.move_to(TxState.DONE)
        self._release(entry)
        self.rc.count_tx()
        self._trace("TX_END", entry.handle, entry.seq, t)
        self.rc.raise_irq(IrqKind.TX_DONE, t, entry.handle)

    def _on_receive(self, results: list[tuple[bytes, PhyReport]], iq: IqBuffer) -> None:
        from .controller import IrqKind

        cfg = self.config
        self.rx_ring.capacity = cfg.rx_capacity
        for psdu, report in results:
            self.rc.record_report(report)
            if report.sfd_end_sample is not None:
                sfd_tick = iq.start_tick + _ticks_for_samples(report.sfd_end_sample)
                self.rc.raise_irq(IrqKind.SFD_DETECTED, sfd_tick)
            if not report.delivered:
                continue
            rx_end = iq.start_tick + _ticks_for_samples(report.frame_end_sample)
            fcf = None
            if len(psdu) >= 3:
                fcf = parse_fcf(psdu)
            seq = fcf.seq if fcf else None
            if report.crc_ok:
                self._trace("RX_END", None, seq, rx_end)
                self.rc.raise_irq(IrqKind.FRAME_RECEIVED, rx_end)
            else:
                self.rc.raise_irq(IrqKind.CRC_ERROR, rx_end)
            if report.crc_ok or cfg.promiscuous:
                if not self.rx_ring.push(RxRecord(psdu, rx_end, report)):
                    self._trace("OVERFLOW", None, seq, rx_end)
                    self.rc.raise_irq(IrqKind.RX_OVERFLOW, rx_end)
            if not report.crc_ok or fcf is None:
                continue
            if fcf.frame_type == FrameType.ACK:
                self._match_ack(fcf.seq, rx_end)
            elif fcf.ack_request and cfg.auto_ack:
                self._schedule_ack(fcf.seq, rx_end + cfg.ack_delay_ticks)

    def _schedule_ack(self, seq: int, t: int) -> None:
        entry = TxEntry(next(self._handles), build_ack(seq), False, seq, is_ack=True)
        entry.move_to(TxState.SCHEDULED)
        entry.tx_time = t
        self.entries[entry.handle] = entry
        self._ack_slot.append(entry)

    def _match_ack(self, seq: int, t: int) -> None:
        for entry in reversed(list(self.entries.values())):
            if (
                not entry.is_ack
                and entry.ack_request
                and entry.state is TxState.DONE
                and entry.seq == seq
                and not entry.acked
            ):
                entry.acked = True
                entry.ack_rx_tick = t
                return


__all__ = [
    "Mas",
    "MasConfig",
    "OverflowPolicy",
    "RingBuffer",
    "RxRecord",
    "TRACE_HEADER",
    "TraceEvent",
    "Transmission",
    "TxEntry",
    "TxState",
]
