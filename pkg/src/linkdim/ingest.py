"""Packet-trace ingestion: CSV and classic-pcap readers plus trace summaries.

The canonical units are bits and seconds.  CSV files carry packet sizes in
bytes and pcap files carry them as on-the-wire lengths in bytes; both
parsers convert to bits on the way in so nothing downstream ever sees a
byte count.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, NamedTuple

import numpy as np


class TraceParseError(ValueError):
    """A trace file could not be parsed."""


class PacketRecord(NamedTuple):
    timestamp: float  # seconds since trace start
    size_bits: int


@dataclass
class PacketTrace:
    """An ordered packet arrival record.

    `timestamps` are seconds since the start of the trace (non-decreasing),
    `sizes_bits` the per-packet sizes in bits.  `duration` is at least the
    last timestamp; it may be larger when the capture window outlived the
    final packet.
    """

    timestamps: np.ndarray
    sizes_bits: np.ndarray
    duration: float
    source_label: str = ""

    def __post_init__(self) -> None:
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        self.sizes_bits = np.asarray(self.sizes_bits, dtype=np.int64)
        if self.timestamps.ndim != 1 or self.sizes_bits.ndim != 1:
            raise ValueError("timestamps and sizes must be 1-d")
        if len(self.timestamps) != len(self.sizes_bits):
            raise ValueError("timestamps and sizes length mismatch")
        if len(self.timestamps):
            if self.timestamps[0] < 0:
                raise ValueError("negative timestamp")
            if np.any(np.diff(self.timestamps) < 0):
                raise ValueError("timestamps not sorted")
            if np.any(self.sizes_bits <= 0):
                raise ValueError("packet sizes must be positive")
            if self.duration < self.timestamps[-1]:
                raise ValueError("duration precedes last packet")

    def __len__(self) -> int:
        return len(self.timestamps)

    @property
    def records(self) -> list[PacketRecord]:
        return [
            PacketRecord(float(t), int(s))
            for t, s in zip(self.timestamps, self.sizes_bits)
        ]


@dataclass(frozen=True)
class TraceSummary:
    packet_count: int
    total_bits: int
    duration: float
    mean_rate: float  # bits/second


_DURATION_RE = re.compile(r"^#\s*duration\s*:\s*(\S+)\s*$")


def parse_csv_trace(source: str | IO[str] | Iterable[str]) -> PacketTrace:
    """Parse a `timestamp_seconds,size_bytes` text trace.

    Lines starting with `#` are comments; a `# duration: <seconds>` comment
    overrides the default duration (the last timestamp).  Input need not be
    sorted; records are stably sorted by timestamp.
    """
    if isinstance(source, str):
        lines: Iterable[str] = source.splitlines()
    else:
        lines = source

    times: list[float] = []
    sizes: list[int] = []
    duration_override: float | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _DURATION_RE.match(line)
            if m:
                try:
                    duration_override = float(m.group(1))
                except ValueError as exc:
                    raise TraceParseError(
                        f"line {lineno}: bad duration header {m.group(1)!r}"
                    ) from exc
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceParseError(
                f"line {lineno}: expected 'timestamp,size_bytes', got {line!r}"
            )
        try:
            ts = float(parts[0])
            size_bytes = int(parts[1])
        except ValueError as exc:
            raise TraceParseError(f"line {lineno}: malformed field in {line!r}") from exc
        if ts < 0:
            raise TraceParseError(f"line {lineno}: negative timestamp {ts}")
        if size_bytes <= 0:
            raise TraceParseError(f"line {lineno}: non-positive size {size_bytes}")
        times.append(ts)
        sizes.append(size_bytes * 8)

    if not times:
        raise TraceParseError("empty trace: no packet records")

    ts_arr = np.asarray(times, dtype=float)
    sz_arr = np.asarray(sizes, dtype=np.int64)
    order = np.argsort(ts_arr, kind="stable")
    ts_arr = ts_arr[order]
    sz_arr = sz_arr[order]

    duration = float(ts_arr[-1]) if duration_override is None else duration_override
    if duration < ts_arr[-1]:
        raise TraceParseError(
            f"duration header {duration} precedes last timestamp {ts_arr[-1]}"
        )
    return PacketTrace(ts_arr, sz_arr, duration)


_PCAP_MAGIC_BE = b"\xa1\xb2\xc3\xd4"
_PCAP_MAGIC_LE = b"\xd4\xc3\xb2\xa1"


def parse_pcap_trace(path: str | Path) -> PacketTrace:
    """Parse a classic pcap file (24-byte global header, 16-byte record headers).

    Both endiannesses of the microsecond magic are accepted; pcapng and the
    nanosecond variants are not.  Packet size is the original (untruncated)
    length in bits; timestamps are rebased so the earliest packet is at 0.
    """
    path = Path(path)
    with path.open("rb") as fh:
        header = fh.read(24)
        if len(header) < 24:
            raise TraceParseError("truncated pcap global header")
        magic = header[:4]
        if magic == _PCAP_MAGIC_BE:
            endian = ">"
        elif magic == _PCAP_MAGIC_LE:
            endian = "<"
        else:
            raise TraceParseError(
                f"bad pcap magic 0x{int.from_bytes(magic, 'big'):08X}"
            )
        rec_fmt = endian + "IIII"

        t_us: list[int] = []
        sizes: list[int] = []
        index = 0
        while True:
            rec = fh.read(16)
            if not rec:
                break
            if len(rec) < 16:
                raise TraceParseError(f"truncated record header for packet {index}")
            ts_sec, ts_usec, incl_len, orig_len = struct.unpack(rec_fmt, rec)
            data = fh.read(incl_len)
            if len(data) < incl_len:
                raise TraceParseError(f"truncated packet data for packet {index}")
            if orig_len == 0:
                raise TraceParseError(f"packet {index} has zero original length")
            t_us.append(ts_sec * 1_000_000 + ts_usec)
            sizes.append(orig_len * 8)
            index += 1

    if not t_us:
        raise TraceParseError("pcap contains zero packets")

    base = min(t_us)
    ts_arr = np.asarray([t - base for t in t_us], dtype=float) / 1e6
    sz_arr = np.asarray(sizes, dtype=np.int64)
    order = np.argsort(ts_arr, kind="stable")
    ts_arr = ts_arr[order]
    sz_arr = sz_arr[order]
    return PacketTrace(ts_arr, sz_arr, float(ts_arr[-1]), source_label=path.name)


def load_trace(path: str | Path, fmt: str = "auto") -> PacketTrace:
    """Load a trace file, picking the parser by `fmt` or the file suffix."""
    path = Path(path)
    if fmt == "auto":
        fmt = "pcap" if path.suffix.lower() in (".pcap", ".cap") else "csv"
    if fmt == "pcap":
        return parse_pcap_trace(path)
    if fmt == "csv":
        with path.open("r", encoding="utf-8") as fh:
            trace = parse_csv_trace(fh)
        trace.source_label = path.name
        return trace
    raise ValueError(f"unknown trace format {fmt!r}")


def trace_summary(trace: PacketTrace) -> TraceSummary:
    """Packet count, total bits, duration, and mean rate of a trace."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    if trace.duration <= 0:
        raise ValueError("zero-duration trace")
    total_bits = int(trace.sizes_bits.sum())
    return TraceSummary(
        packet_count=len(trace),
        total_bits=total_bits,
        duration=trace.duration,
        mean_rate=total_bits / trace.duration,
    )


def write_csv_trace(trace: PacketTrace, path: str | Path) -> None:
    """Write a trace in the CSV interchange format (sizes back in bytes)."""
    if np.any(trace.sizes_bits % 8 != 0):
        raise ValueError("CSV trace format stores bytes; sizes must be bit-multiples of 8")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# duration: {trace.duration!r}\n")
        for t, s in zip(trace.timestamps, trace.sizes_bits):
            fh.write(f"{float(t)!r},{int(s) // 8}\n")
