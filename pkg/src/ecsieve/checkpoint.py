"""Binary checkpoint files for resumable censuses.

Layout: the magic ``KFCK1`` followed by length-prefixed blocks. Each block is
an unsigned 64-bit little-endian byte count and that many bytes of signed
64-bit little-endian integers. Floats are stored by their IEEE-754 bits so a
round trip is bit-exact. The last block holds a truncated SHA-256 of
everything before it.

Blocks, in order: header (format version, 4 words of configuration digest),
scalar tallies, Omega histogram, divisor counts, probe-prime counts,
excluded primes, checkpoint series (8 words per entry), checksum.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

MAGIC = b"KFCK1"
FORMAT_VERSION = 1
SERIES_WIDTH = 8
N_BLOCKS = 8


class CorruptCheckpoint(ValueError):
    pass


def config_digest(fingerprint: str) -> str:
    """Hex SHA-256 of a configuration fingerprint, as stored in the header."""
    return hashlib.sha256(fingerprint.encode()).hexdigest()


def _f2i(x: float) -> int:
    return struct.unpack("<q", struct.pack("<d", x))[0]


def _i2f(n: int) -> float:
    return struct.unpack("<d", struct.pack("<q", n))[0]


@dataclass
class CheckpointState:
    fingerprint: str  # hex digest from config_digest
    next_lo: int
    n_good_primes: int = 0
    n_in_A: int = 0
    pi_twin: int = 0
    pi_twin_excluded: int = 0
    empirical_S: int = 0
    ub1_extra: int = 0
    primes_above_DU: int = 0
    cond3_count: int = 0
    sixteen_me_violations: int = 0
    max_a: int = 0
    empirical_H: float = 0.0
    omega_hist: list[int] = field(default_factory=list)
    divisor_counts: list[int] = field(default_factory=list)
    ell_counts: list[int] = field(default_factory=list)
    excluded_primes: list[int] = field(default_factory=list)
    # (x_i, n_good, n_in_A, pi_twin, pi_twin_excluded, S, ub1_extra, H)
    series: list[tuple] = field(default_factory=list)

    _SCALARS = ("next_lo", "n_good_primes", "n_in_A", "pi_twin", "pi_twin_excluded",
                "empirical_S", "ub1_extra", "primes_above_DU", "cond3_count",
                "sixteen_me_violations", "max_a")


def _block(values: list[int]) -> bytes:
    payload = struct.pack(f"<{len(values)}q", *values)
    return struct.pack("<Q", len(payload)) + payload


def encode(state: CheckpointState) -> bytes:
    header = [FORMAT_VERSION, *struct.unpack("<4q", bytes.fromhex(state.fingerprint))]
    scalars = [getattr(state, k) for k in CheckpointState._SCALARS] + [_f2i(state.empirical_H)]
    series: list[int] = []
    for entry in state.series:
        series.extend(entry[:7])
        series.append(_f2i(entry[7]))
    body = MAGIC + b"".join(_block(v) for v in (
        header, scalars, state.omega_hist, state.divisor_counts, state.ell_counts,
        state.excluded_primes, series))
    check = struct.unpack("<q", hashlib.sha256(body).digest()[:8])[0]
    return body + _block([check])


def decode(data: bytes) -> CheckpointState:
    if not data.startswith(MAGIC):
        raise CorruptCheckpoint("bad magic")
    pos = len(MAGIC)
    blocks: list[list[int]] = []
    body_end = 0
    while pos < len(data):
        if pos + 8 > len(data):
            raise CorruptCheckpoint("truncated length field")
        (n,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        if n % 8 or pos + n > len(data):
            raise CorruptCheckpoint(f"length field {n} inconsistent with file size")
        blocks.append(list(struct.unpack_from(f"<{n // 8}q", data, pos)))
        pos += n
        if len(blocks) == N_BLOCKS - 1:
            body_end = pos
    if len(blocks) != N_BLOCKS:
        raise CorruptCheckpoint(f"expected {N_BLOCKS} blocks, found {len(blocks)}")
    header, scalars, hist, divs, ells, excluded, series, check = blocks
    expect = struct.unpack("<q", hashlib.sha256(data[:body_end]).digest()[:8])[0]
    if check != [expect]:
        raise CorruptCheckpoint("checksum mismatch")
    if len(header) != 5 or header[0] != FORMAT_VERSION:
        raise CorruptCheckpoint("unsupported header")
    if len(scalars) != len(CheckpointState._SCALARS) + 1:
        raise CorruptCheckpoint("bad scalar block")
    if len(series) % SERIES_WIDTH:
        raise CorruptCheckpoint("bad series block")
    state = CheckpointState(fingerprint=struct.pack("<4q", *header[1:]).hex(), next_lo=0)
    for k, v in zip(CheckpointState._SCALARS, scalars):
        setattr(state, k, v)
    state.empirical_H = _i2f(scalars[-1])
    state.omega_hist, state.divisor_counts, state.ell_counts = hist, divs, ells
    state.excluded_primes = excluded
    state.series = [tuple(series[i:i + 7]) + (_i2f(series[i + 7]),)
                    for i in range(0, len(series), SERIES_WIDTH)]
    return state


def save_checkpoint(path: str | Path, state: CheckpointState) -> None:
    """Write atomically (temporary file then rename); the census is the only writer."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(encode(state))
    os.replace(tmp, path)


def load_checkpoint(path: str | Path) -> CheckpointState | None:
    """State stored at ``path``, or None when the file is missing or empty."""
    path = Path(path)
    if not path.exists():
        return None
    data = path.read_bytes()
    if not data:
        return None
    return decode(data)
