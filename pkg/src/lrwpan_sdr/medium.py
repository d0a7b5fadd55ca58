"""Deterministic discrete-event baseband medium.

Nodes share one tick clock.  A transmission from ``src`` reaches every
``dst`` with a link after ``delay_ticks``, scaled by ``gain``; concurrent
arrivals superimpose linearly.  Each link also adds white Gaussian noise at
the receiver, drawn from a stream keyed by ``(seed, src, dst, block)`` so the
noise at a given sample never depends on how the timeline is chunked or on
which other links exist.

Within one tick, transmitter events run before receiver events: first frames
that finish, then frames that start (node order, handle order), then
receptions whose last arrival ends on that tick.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .controller import RadioController
from .mas import Mas, TraceEvent, Transmission
from .phy import SAMPLES_PER_TICK, IqBuffer, PhyConfig, rx_frames

NOISE_BLOCK = 8192


@dataclass(frozen=True)
class LinkModel:
    delay_ticks: int = 0
    chip_snr_db: float = math.inf
    gain: float = 1.0

    def __post_init__(self):
        if self.delay_ticks < 0:
            raise ValueError("delay_ticks must be >= 0")

    def noise_sigma(self, amplitude: float, samples_per_chip: int) -> float:
        """Per-dimension noise std giving Ec/N0 = chip SNR for a half-sine chip."""
        if math.isinf(self.chip_snr_db) and self.chip_snr_db > 0:
            return 0.0
        snr = 10 ** (self.chip_snr_db / 10)
        return self.gain * amplitude * math.sqrt(samples_per_chip / (2 * snr))


class Node:
    """A radio: controller (register map + IRQs) and scheduler."""

    def __init__(self, name: Optional[str] = None, mas: Optional[Mas] = None):
        self.mas = mas if mas is not None else Mas(RadioController())
        self.rc = self.mas.rc
        self.name = name
        self.node_id: Optional[int] = None

    def __repr__(self) -> str:
        return f"Node(id={self.node_id}, name={self.name!r})"


@dataclass
class _Arrival:
    tx: Transmission
    link: LinkModel
    start_tick: int
    end_tick: int


@dataclass
class _Burst:
    start_tick: int
    end_tick: int
    cfg: PhyConfig
    arrivals: list[_Arrival] = field(default_factory=list)


class Medium:
    def __init__(self, seed: int = 0, retain_ticks: Optional[int] = 200_000):
        self.seed = int(seed)
        self.retain_ticks = retain_ticks
        self.now = 0
        self.nodes: list[Node] = []
        self.links: dict[tuple[int, int], LinkModel] = {}
        self.trace: list[TraceEvent] = []
        self.history: list[Transmission] = []
        self._bursts: dict[int, list[_Burst]] = {}
        self._own_tx: dict[int, list[tuple[int, int]]] = {}

    # -- topology ------------------------------------------------------------

    def attach_node(
        self,
        node: Union[Node, Mas, None] = None,
        links: Optional[dict[int, Union[LinkModel, tuple[LinkModel, LinkModel]]]] = None,
        name: Optional[str] = None,
    ) -> int:
        """Add a node and its links to existing peers; returns the node id.

        ``links[peer]`` is either one model used in both directions or a
        ``(to_peer, from_peer)`` pair.
        """
        if isinstance(node, Mas):
            node = Node(name, node)
        elif node is None:
            node = Node(name)
        if node.mas.medium is not None:
            raise ValueError("node is already attached to a medium")
        node_id = len(self.nodes)
        node.node_id = node_id
        if name is not None:
            node.name = name
        node.mas.node_id = node_id
        node.mas.medium = self
        # Carry over anything the scheduler traced while standalone.
        self.trace.extend(TraceEvent(e.tick, node_id, e.event, e.handle, e.seq) for e in node.mas.trace)
        node.mas.trace = self.trace
        self.nodes.append(node)
        self._bursts[node_id] = []
        self._own_tx[node_id] = []
        for peer, model in (links or {}).items():
            if peer not in range(node_id):
                raise ValueError(f"unknown peer {peer}")
            out_model, in_model = model if isinstance(model, tuple) else (model, model)
            self.set_link(node_id, peer, out_model)
            self.set_link(peer, node_id, in_model)
        return node_id

    def set_link(self, src: int, dst: int, model: LinkModel) -> None:
        if src == dst:
            raise ValueError("a node has no link to itself")
        self.links[(src, dst)] = model

    def node(self, key: Union[int, str]) -> Node:
        if isinstance(key, int):
            return self.nodes[key]
        for node in self.nodes:
            if node.name == key:
                return node
        raise KeyError(key)

    # -- event loop --------------------------------------------------------

    def next_event_tick(self) -> Optional[int]:
        ticks = [t for node in self.nodes if (t := node.mas.next_event_tick()) is not None]
        ticks += [b.end_tick for bursts in self._bursts.values() for b in bursts]
        return min(ticks) if ticks else None

    def advance(self, to: int) -> list[Transmission]:
        """Process every event up to and including tick ``to``."""
        if to < self.now:
            raise ValueError(f"cannot go back from {self.now} to {to}")
        emitted: list[Transmission] = []
        while (t := self.next_event_tick()) is not None and t <= to:
            self.now = max(self.now, t)
            emitted += self._process(self.now)
        self.now = to
        self._prune()
        return emitted

    def _process(self, t: int) -> list[Transmission]:
        for node in self.nodes:
            tx = node.mas._transmitting
            if tx is not None and tx.end_tick <= t:
                node.mas._finish_tx(t)
        emitted = []
        for node in self.nodes:
            for entry in node.mas._due(t):
                if self._busy(node.node_id, t):
                    node.mas._miss(entry, t)
                    continue
                tx = node.mas._emit(entry, t)
                self._register(tx)
                emitted.append(tx)
        for node in self.nodes:
            bursts = self._bursts[node.node_id]
            ready = [b for b in bursts if b.end_tick <= t]
            for burst in ready:
                bursts.remove(burst)
                self._receive(node, burst)
        return emitted

    def _busy(self, node_id: int, t: int) -> bool:
        if self.nodes[node_id].mas._transmitting is not None:
            return True
        return any(a.start_tick < t < a.end_tick for b in self._bursts[node_id] for a in b.arrivals)

    def _register(self, tx: Transmission) -> None:
        self.history.append(tx)
        self._own_tx[tx.src].append((tx.start_tick, tx.end_tick))
        n_ticks = -(-len(tx.iq) // SAMPLES_PER_TICK)
        for (src, dst), link in sorted(self.links.items()):
            if src != tx.src or link.gain == 0:
                continue
            start = tx.start_tick + link.delay_ticks
            arrival = _Arrival(tx, link, start, start + n_ticks)
            bursts = self._bursts[dst]
            overlapping = [b for b in bursts if b.start_tick < arrival.end_tick and arrival.start_tick < b.end_tick]
            if overlapping:
                merged = min(overlapping, key=lambda b: b.start_tick)
                for b in overlapping:
                    if b is not merged:
                        bursts.remove(b)
                        merged.arrivals += b.arrivals
                merged.arrivals.append(arrival)
                merged.start_tick = min(b.start_tick for b in overlapping + [merged])
                merged.start_tick = min(merged.start_tick, arrival.start_tick)
                merged.end_tick = max(max(b.end_tick for b in overlapping), arrival.end_tick)
            else:
                # The receiver's configuration is latched when a burst begins.
                cfg = self.nodes[dst].rc.phy_config()
                bursts.append(_Burst(arrival.start_tick, arrival.end_tick, cfg, [arrival]))

    def _receive(self, node: Node, burst: _Burst) -> None:
        # Half duplex: a node hears nothing while it is transmitting itself.
        for start, end in self._own_tx[node.node_id]:
            if start < burst.end_tick and burst.start_tick < end:
                return
        iq = self._synthesize(node.node_id, burst.start_tick, burst.end_tick, (a.tx for a in burst.arrivals))
        results = rx_frames(iq, burst.cfg)
        node.mas._on_receive(results, iq)

    def _prune(self) -> None:
        if self.retain_ticks is None:
            return
        horizon = self.now - self.retain_ticks
        max_delay = max((l.delay_ticks for l in self.links.values()), default=0)
        self.history = [tx for tx in self.history if tx.end_tick + max_delay > horizon]
        for node_id, spans in self._own_tx.items():
            self._own_tx[node_id] = [s for s in spans if s[1] > horizon]

    # -- signal synthesis --------------------------------------------------

    def deliver(self, node_id: int, t0: int, t1: int) -> IqBuffer:
        """Receiver input of ``node_id`` over ticks ``[t0, t1)``."""
        if t1 > self.now:
            raise ValueError(f"medium has only advanced to {self.now}")
        return self._synthesize(node_id, t0, t1, self.history)

    def _noise(self, src: int, dst: int, n0: int, n1: int) -> np.ndarray:
        out = np.empty(n1 - n0, dtype=np.complex128)
        pos = n0
        while pos < n1:
            block, offset = divmod(pos, NOISE_BLOCK)
            seq = np.random.SeedSequence(self.seed, spawn_key=(src, dst, block))
            draws = np.random.default_rng(seq).standard_normal((2, NOISE_BLOCK))
            take = min(NOISE_BLOCK - offset, n1 - pos)
            out[pos - n0 : pos - n0 + take] = draws[0, offset : offset + take] + 1j * draws[1, offset : offset + take]
            pos += take
        return out

    def _synthesize(self, dst: int, t0: int, t1: int, transmissions: Iterable[Transmission]) -> IqBuffer:
        n0, n1 = t0 * SAMPLES_PER_TICK, t1 * SAMPLES_PER_TICK
        out = np.zeros(n1 - n0, dtype=np.complex128)
        for tx in transmissions:
            link = self.links.get((tx.src, dst))
            if link is None:
                continue
            a0 = (tx.start_tick + link.delay_ticks) * SAMPLES_PER_TICK
            lo, hi = max(a0, n0), min(a0 + len(tx.iq), n1)
            if lo < hi:
                out[lo - n0 : hi - n0] += link.gain * tx.iq.samples[lo - a0 : hi - a0]
        rx_cfg = self.nodes[dst].rc.phy_config()
        for (src, to), link in sorted(self.links.items()):
            if to != dst:
                continue
            sigma = link.noise_sigma(self.nodes[src].rc.phy_config().amplitude, rx_cfg.samples_per_chip)
            if sigma > 0 and n1 > n0:
                out += sigma * self._noise(src, dst, n0, n1)
        return IqBuffer(out, t0)

    def trace_csv(self) -> str:
        from .mas import TRACE_HEADER

        events = sorted(self.trace, key=lambda e: (e.tick, e.node_id))
        return TRACE_HEADER + "\n" + "".join(e.csv() + "\n" for e in events)


# -- topology files ------------------------------------------------------


@dataclass
class Topology:
    seed: int
    nodes: list[str]
    links: dict[tuple[str, str], LinkModel]

    def build(self, seed: Optional[int] = None) -> Medium:
        medium = Medium(self.seed if seed is None else seed)
        for name in self.nodes:
            medium.attach_node(name=name)
        ids = {name: i for i, name in enumerate(self.nodes)}
        for (src, dst), model in self.links.items():
            medium.set_link(ids[src], ids[dst], model)
        return medium


def two_node_topology(link: LinkModel = LinkModel(), seed: int = 0) -> Topology:
    return Topology(seed, ["A", "B"], {("A", "B"): link, ("B", "A"): link})


def parse_topology(text: str) -> Topology:
    """Read an INI-style topology.

    ::

        [medium]
        seed = 7

        [node A]
        [node B]

        [link A B]          # one direction; add [link B A] for the reverse
        delay_ticks = 5
        chip_snr_db = 10
        gain = 1.0

    ``[link A <-> B]`` declares both directions at once.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string(text)
    seed = parser.getint("medium", "seed", fallback=0)
    nodes: list[str] = []
    links: dict[tuple[str, str], LinkModel] = {}
    for section in parser.sections():
        kind, _, rest = section.partition(" ")
        if kind == "node":
            nodes.append(rest.strip())
    for section in parser.sections():
        kind, _, rest = section.partition(" ")
        if kind != "link":
            continue
        both = "<->" in rest
        ends = rest.replace("<->", " ").split()
        if len(ends) != 2 or not set(ends) <= set(nodes):
            raise ValueError(f"bad link section [{section}]")
        sec = parser[section]
        model = LinkModel(
            delay_ticks=sec.getint("delay_ticks", 0),
            chip_snr_db=float(sec.get("chip_snr_db", "inf")),
            gain=sec.getfloat("gain", 1.0),
        )
        links[(ends[0], ends[1])] = model
        if both:
            links[(ends[1], ends[0])] = model
    return Topology(seed, nodes, links)


def load_topology(path: Union[str, Path]) -> Topology:
    return parse_topology(Path(path).read_text())
