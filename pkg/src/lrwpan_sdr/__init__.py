"""Software IEEE 802.15.4 radio: O-QPSK PHY, timed MAC scheduler, register-mapped controller.

The pieces are wired together over a deterministic simulated medium::

    from lrwpan_sdr import Medium, LinkModel, build_data_frame

    medium = Medium(seed=1)
    a = medium.attach_node(name="A")
    b = medium.attach_node(links={a: LinkModel(chip_snr_db=10)}, name="B")
    tx = medium.node(a).mas
    handle = tx.load_packet(build_data_frame(1, b"hello"))
    tx.set_transmission_time(handle, 1000)
    medium.advance(10_000)
    print(medium.node(b).mas.get_packet())
"""

__version__ = "0.1.0"

from .controller import IrqEvent, IrqKind, RadioController
from .errors import (
    BadSfd,
    ConfigError,
    IllegalValue,
    LengthOverflow,
    ReadOnlyRegister,
    RingFull,
    TimeInPast,
    TooShort,
    Truncated,
    UnknownHandle,
    UnknownRegister,
)
from .frame import (
    FcfFields,
    FrameConfig,
    FrameType,
    LengthMode,
    Mpdu,
    build_ack,
    build_data_frame,
    build_mpdu,
    build_ppdu,
    crc16_fcs,
    parse_fcf,
    parse_ppdu,
    validate_fcs,
)
from .mas import Mas, MasConfig, OverflowPolicy, RxRecord, TxEntry, TxState
from .medium import LinkModel, Medium, Node
from .phy import IqBuffer, PhyConfig, PhyReport, PulseShape, rx_frames, tx_frame

__all__ = [
    "__version__",
    "IrqEvent",
    "IrqKind",
    "RadioController",
    "BadSfd",
    "ConfigError",
    "IllegalValue",
    "LengthOverflow",
    "ReadOnlyRegister",
    "RingFull",
    "TimeInPast",
    "TooShort",
    "Truncated",
    "UnknownHandle",
    "UnknownRegister",
    "FcfFields",
    "FrameConfig",
    "FrameType",
    "LengthMode",
    "Mpdu",
    "build_ack",
    "build_data_frame",
    "build_mpdu",
    "build_ppdu",
    "crc16_fcs",
    "parse_fcf",
    "parse_ppdu",
    "validate_fcs",
    "Mas",
    "MasConfig",
    "OverflowPolicy",
    "RxRecord",
    "TxEntry",
    "TxState",
    "LinkModel",
    "Medium",
    "Node",
    "IqBuffer",
    "PhyConfig",
    "PhyReport",
    "PulseShape",
    "rx_frames",
    "tx_frame",
]
