"""Command-line front end.

Exit codes: 0 success, 2 input or configuration error, 3 register error.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .controller import RadioController, format_value, resolve
from .errors import ConfigError, FrameError, RegisterError
from .experiments import (
    Switch,
    ber_csv,
    run_ber,
    run_demo_ack,
    run_demo_throughput,
)
from .frame import FrameConfig, LengthMode, build_ppdu
from .medium import load_topology
from .pcap import write_pcap
from .phy import PhyConfig, PulseShape, rx_frames, tx_frame
from .phy.iqfile import read_iq, read_sidecar, write_iq

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_REGISTER = 3

_PULSES = {"halfsine": PulseShape.HALF_SINE, "rect": PulseShape.RECT, "rc": PulseShape.RAISED_COSINE}
_MODES = {"standard": LengthMode.STANDARD_7BIT, "extended": LengthMode.EXTENDED_16BIT}


class InputError(Exception):
    pass


def _int(text: str) -> int:
    return int(text, 0)


def _add_phy_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("PHY configuration")
    g.add_argument("--sf", type=int, choices=(8, 16, 32, 64), help="chips per symbol (32 = standard)")
    g.add_argument("--pulse", choices=sorted(_PULSES), help="pulse shape")
    g.add_argument("--rolloff", type=float, help="raised-cosine rolloff in (0, 1]")
    g.add_argument("--preamble-len", type=int, help="preamble octets (2-16)")
    g.add_argument("--sfd", type=_int, help="start-of-frame delimiter octet")
    g.add_argument("--length-mode", choices=sorted(_MODES), help="PHR format")
    g.add_argument("--amplitude", type=float, help="peak amplitude")
    g.add_argument("--threshold", type=float, help="preamble detection threshold")


def _phy_config(args, base: Optional[PhyConfig] = None) -> PhyConfig:
    base = base or PhyConfig()
    frame = FrameConfig(
        preamble_len=base.frame.preamble_len if args.preamble_len is None else args.preamble_len,
        sfd=base.frame.sfd if args.sfd is None else args.sfd,
        length_mode=base.frame.length_mode if args.length_mode is None else _MODES[args.length_mode],
        preamble_value=base.frame.preamble_value,
    )
    cfg = base.with_(
        chips_per_symbol=base.chips_per_symbol if args.sf is None else args.sf,
        pulse=base.pulse if args.pulse is None else _PULSES[args.pulse],
        rolloff=base.rolloff if args.rolloff is None else args.rolloff,
        amplitude=base.amplitude if args.amplitude is None else args.amplitude,
        detect_threshold=base.detect_threshold if args.threshold is None else args.threshold,
        frame=frame,
    )
    return cfg.validate()


def _write_text(path: Optional[str], text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- encode / decode ---------------------------------------------------------


def cmd_encode(args) -> int:
    cfg = _phy_config(args)
    if args.psdu_file:
        psdu = Path(args.psdu_file).read_bytes()
    elif args.psdu is not None:
        try:
            psdu = bytes.fromhex(args.psdu)
        except ValueError:
            raise InputError(f"--psdu is not valid hex: {args.psdu!r}") from None
    else:
        raise InputError("give --psdu HEX or --psdu-file PATH")
    iq = tx_frame(psdu, cfg, start_tick=args.start_tick)
    side = write_iq(args.out, iq, cfg)
    octets = len(build_ppdu(psdu, cfg.frame))
    chips = 2 * octets * cfg.chips_per_symbol
    print(
        f"ppdu_octets={octets} symbols={2 * octets} chips={chips} samples={len(iq)} "
        f"airtime_us={cfg.airtime_us(len(psdu)):g} compliant={str(cfg.is_standard_compliant()).lower()}"
    )
    print(f"wrote {args.out} and {side}")
    return EXIT_OK


def cmd_decode(args) -> int:
    try:
        iq = read_iq(args.input)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from None
    meta = read_sidecar(args.input)
    base = PhyConfig.from_snapshot(meta) if meta else PhyConfig()
    cfg = _phy_config(args, base)
    frames = [(psdu, rep) for psdu, rep in rx_frames(iq, cfg) if rep.delivered]
    for psdu, rep in frames:
        print(
            f"offset={rep.sync_sample_offset} lqi={rep.lqi} rssi_db={rep.rssi_db:.2f} "
            f"crc={'OK' if rep.crc_ok else 'FAIL'} len={len(psdu)} psdu={psdu.hex().upper()}"
        )
    print(f"frames={len(frames)}")
    if args.pcap:
        spt = iq.samples_per_tick
        write_pcap(args.pcap, ((iq.start_tick + rep.sync_sample_offset // spt, psdu) for psdu, rep in frames))
    return EXIT_OK


# -- experiments -------------------------------------------------------------


def _snr_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"bad SNR list {text!r}") from None
    if not values:
        raise InputError("SNR list is empty")
    return values


def cmd_ber(args) -> int:
    cfg = _phy_config(args)
    points = run_ber(_snr_list(args.snr), args.frames, args.seed, args.psdu_len, cfg)
    _write_text(args.csv, ber_csv(points, args.seed, cfg, args.psdu_len))
    return EXIT_OK


def _topology(args):
    if not args.topology:
        return None
    try:
        return load_topology(args.topology)
    except (OSError, ValueError, configparser.Error) as exc:
        raise InputError(f"topology: {exc}") from None


def cmd_demo_ack(args) -> int:
    cfg = _phy_config(args)
    result = run_demo_ack(
        frames=args.frames,
        grid_ticks=args.grid,
        psdu_len=args.psdu_len,
        proc_latency=args.proc_latency,
        topology=_topology(args),
        seed=args.seed,
        cfg=cfg,
    )
    _write_text(args.csv, result.csv(args.seed, cfg))
    if args.trace:
        Path(args.trace).write_text(result.medium.trace_csv())
    err = result.max_error
    observed = sorted({r.turnaround_observed for r in result.rows if r.turnaround_observed is not None})
    print(
        f"frames={len(result.rows)} expected_turnaround={result.expected_turnaround} "
        f"observed={','.join(map(str, observed))} max_abs_error_ticks={'n/a' if err is None else err}",
        file=sys.stderr if args.csv in (None, "-") else sys.stdout,
    )
    return EXIT_OK


def cmd_demo_throughput(args) -> int:
    cfg = _phy_config(args)
    try:
        switches = [Switch.parse(s) for s in args.switch_at]
    except ValueError as exc:
        raise InputError(str(exc)) from None
    result = run_demo_throughput(
        duration_ticks=args.duration,
        window_ticks=args.window,
        switches=switches,
        psdu_len=args.psdu_len,
        ifs_ticks=args.ifs,
        topology=_topology(args),
        seed=args.seed,
        cfg=cfg,
    )
    extra = {"switches": ";".join(args.switch_at) or "none", "ifs_ticks": args.ifs}
    _write_text(args.csv, result.csv(args.seed, cfg, **extra))
    print(
        f"frames_sent={result.sent} frames_acked={len(result.acked)} crc_errors={result.crc_errors}",
        file=sys.stderr if args.csv in (None, "-") else sys.stdout,
    )
    return EXIT_OK


# -- registers ---------------------------------------------------------------


def _load_session(path: Path) -> configparser.ConfigParser:
    session = configparser.ConfigParser()
    session.optionxform = str
    if path.exists():
        session.read_string(path.read_text())
    return session


def cmd_reg(args) -> int:
    path = Path(args.session)
    session = _load_session(path)
    rc = RadioController()
    if session.has_section(args.node):
        rc.restore("".join(f"{k}={v}\n" for k, v in session[args.node].items()))
    if args.action == "dump":
        sys.stdout.write(rc.dump())
        return EXIT_OK
    if args.key is None:
        raise InputError("register name or address required")
    reg = resolve(args.key)
    if args.action == "get":
        print(format_value(reg, rc.read_register(reg.addr)))
        return EXIT_OK
    if args.value is None:
        raise InputError("reg set needs a value")
    try:
        value = int(args.value, 0)
    except ValueError:
        raise InputError(f"bad register value {args.value!r}") from None
    rc.write_register(reg.addr, value)
    dump = dict(line.split("=", 1) for line in rc.dump().splitlines())
    session[args.node] = dump
    with path.open("w") as fh:
        session.write(fh)
    print(format_value(reg, rc.read_register(reg.addr)))
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrwpan-sdr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="PSDU to IQ file")
    p.add_argument("--psdu", help="PSDU as hex")
    p.add_argument("--psdu-file", help="read the PSDU from a binary file")
    p.add_argument("-o", "--out", default="frame.iq", help="output IQ file (default %(default)s)")
    p.add_argument("--start-tick", type=int, default=0)
    _add_phy_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="list frames in an IQ file")
    p.add_argument("input")
    p.add_argument("--pcap", help="write delivered frames to a pcap file")
    _add_phy_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("ber", help="chip/packet error rate sweep over AWGN")
    p.add_argument("--snr", default="0,2,4.32,6,inf", help="comma-separated chip SNRs in dB")
    p.add_argument("--frames", type=int, default=100, help="frames per SNR point")
    p.add_argument("--psdu-len", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="output CSV (default stdout)")
    _add_phy_flags(p)
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("demo-ack", help="ACK turnaround timing on a TDMA grid")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--grid", type=int, default=10_000, help="TDMA slot in ticks")
    p.add_argument("--psdu-len", type=int, default=20)
    p.add_argument("--proc-latency", type=int, default=0, help="extra ACK latency in ticks")
    p.add_argument("--topology")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="output CSV (default stdout)")
    p.add_argument("--trace", help="write the event trace CSV here")
    _add_phy_flags(p)
    p.set_defaults(func=cmd_demo_ack)

    p = sub.add_parser("demo-throughput", help="goodput while switching PHY parameters mid-run")
    p.add_argument("--duration", type=int, default=2_000_000, help="ticks")
    p.add_argument("--window", type=int, default=100_000, help="goodput window in ticks")
    p.add_argument("--switch-at", action="append", default=[], metavar="TICK:REG=VALUE")
    p.add_argument("--psdu-len", type=int, help="default: maximum for the length mode")
    p.add_argument("--ifs", type=int, default=192, help="gap after an ACK before the next frame")
    p.add_argument("--topology")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="output CSV (default stdout)")
    _add_phy_flags(p)
    p.set_defaults(func=cmd_demo_throughput)

    p = sub.add_parser("reg", help="read or write controller registers of a saved session")
    p.add_argument("action", choices=("get", "set", "dump"))
    p.add_argument("key", nargs="?", help="register name or hex address")
    p.add_argument("value", nargs="?")
    p.add_argument("--node", default="A")
    p.add_argument("--session", default="lrwpan_regs.ini", help="session file (default %(default)s)")
    p.set_defaults(func=cmd_reg)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RegisterError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REGISTER
    except (InputError, FrameError, ConfigError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
