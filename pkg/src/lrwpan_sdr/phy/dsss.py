"""Symbol-to-chip mapping for the 2450 MHz O-QPSK PHY, plus despreading."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .config import PhyConfig, STANDARD_CHIPS_PER_SYMBOL

# c0 first.  Rows 1-7 are row 0 rotated right by 4k chips; rows 8-15 are
# rows 0-7 with every odd-indexed chip inverted.
STANDARD_CHIP_TABLE = (
    "11011001110000110101001000101110",
    "11101101100111000011010100100010",
    "00101110110110011100001101010010",
    "00100010111011011001110000110101",
    "01010010001011101101100111000011",
    "00110101001000101110110110011100",
    "11000011010100100010111011011001",
    "10011100001101010010001011101101",
    "10001100100101100000011101111011",
    "10111000110010010110000001110111",
    "01111011100011001001011000000111",
    "01110111101110001100100101100000",
    "00000111011110111000110010010110",
    "01100000011101111011100011001001",
    "10010110000001110111101110001100",
    "11001001011000000111011110111000",
)


def _standard_rows() -> np.ndarray:
    bits = np.array([[int(c) for c in row] for row in STANDARD_CHIP_TABLE], dtype=np.int8)
    return 2 * bits - 1


@lru_cache(maxsize=None)
def _table(chips_per_symbol: int) -> np.ndarray:
    rows = _standard_rows()
    if chips_per_symbol <= STANDARD_CHIPS_PER_SYMBOL:
        table = rows[:, :chips_per_symbol]
    else:
        table = np.tile(rows, (1, chips_per_symbol // STANDARD_CHIPS_PER_SYMBOL))
    table = np.ascontiguousarray(table)
    table.flags.writeable = False
    return table


def chip_table(cfg: PhyConfig = PhyConfig()) -> np.ndarray:
    """16 x chips_per_symbol array of +/-1 chips (read-only)."""
    return _table(cfg.chips_per_symbol)


def chip_sequence(symbol: int, cfg: PhyConfig = PhyConfig()) -> np.ndarray:
    if not 0 <= symbol < 16:
        raise ValueError(f"symbol must be in [0, 15], got {symbol}")
    return chip_table(cfg)[symbol].copy()


def octets_to_symbols(octets: bytes) -> np.ndarray:
    """Split octets into 4-bit symbols, low nibble first."""
    data = np.frombuffer(bytes(octets), dtype=np.uint8)
    symbols = np.empty(2 * data.size, dtype=np.uint8)
    symbols[0::2] = data & 0x0F
    symbols[1::2] = data >> 4
    return symbols


def symbols_to_octets(symbols) -> bytes:
    symbols = np.asarray(symbols, dtype=np.uint8)
    if symbols.size % 2:
        raise ValueError("odd number of symbols")
    return ((symbols[1::2] << 4) | symbols[0::2]).astype(np.uint8).tobytes()


def spread(symbols, cfg: PhyConfig = PhyConfig()) -> np.ndarray:
    """Concatenate the chip rows of each symbol."""
    symbols = np.asarray(symbols, dtype=np.intp)
    if symbols.size == 0:
        return np.zeros(0, dtype=np.int8)
    return chip_table(cfg)[symbols].reshape(-1)


def spread_octets(octets: bytes, cfg: PhyConfig = PhyConfig()) -> np.ndarray:
    return spread(octets_to_symbols(octets), cfg)


def despread_hard(chips, cfg: PhyConfig = PhyConfig()) -> tuple[int, float]:
    """Best-matching symbol for one symbol's worth of (soft) chips.

    Ties resolve to the lowest symbol index.
    """
    chips = np.asarray(chips, dtype=float)
    n = cfg.chips_per_symbol
    if chips.shape != (n,):
        raise ValueError(f"expected {n} chips, got {chips.shape}")
    corr = chip_table(cfg) @ chips
    best = int(np.argmax(corr))
    return best, float(corr[best]) / n


def despread_many(soft_chips: np.ndarray, cfg: PhyConfig) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`despread_hard` over consecutive symbol windows."""
    n = cfg.chips_per_symbol
    blocks = np.asarray(soft_chips, dtype=float).reshape(-1, n)
    corr = blocks @ chip_table(cfg).T
    best = np.argmax(corr, axis=1)
    return best.astype(np.uint8), corr[np.arange(best.size), best] / n
