import io
import random
import struct

import numpy as np
import pytest

from linkdim.ingest import (
    PacketTrace,
    TraceParseError,
    load_trace,
    parse_csv_trace,
    parse_pcap_trace,
    trace_summary,
    write_csv_trace,
)
from linkdim.synth import GeneratorKind, GeneratorSpec, generate_trace


def write_pcap(path, packets, endian="<"):
    """Independent classic-pcap writer: (epoch_seconds, epoch_usec, orig_len_bytes)."""
    with open(path, "wb") as fh:
        fh.write(struct.pack(endian + "IHHiIII", 0xA1B2C3D4, 2, 4, 0, 0, 65535, 1))
        for sec, usec, orig_len in packets:
            incl = min(orig_len, 64)
            fh.write(struct.pack(endian + "IIII", sec, usec, incl, orig_len))
            fh.write(b"\x00" * incl)


class TestParseCsv:
    def test_two_records(self):
        trace = parse_csv_trace("0.0,100\n0.5,200")
        assert trace.records == [(0.0, 800), (0.5, 1600)]
        assert trace.duration == 0.5

    def test_unsorted_input_is_sorted(self):
        a = parse_csv_trace("0.0,100\n0.5,200")
        b = parse_csv_trace("0.5,200\n0.0,100")
        assert a.records == b.records
        assert a.duration == b.duration

    def test_negative_size_names_line(self):
        with pytest.raises(TraceParseError, match="line 1"):
            parse_csv_trace("0.0,-5")

    def test_negative_timestamp_names_line(self):
        with pytest.raises(TraceParseError, match="line 2"):
            parse_csv_trace("0.0,10\n-1.0,10")

    def test_malformed_line_number(self):
        with pytest.raises(TraceParseError, match="line 3"):
            parse_csv_trace("0.0,10\n0.1,10\nnot-a-record")

    def test_empty_input(self):
        with pytest.raises(TraceParseError, match="empty"):
            parse_csv_trace("# only comments\n")

    def test_duration_header_override(self):
        trace = parse_csv_trace("# duration: 1.0\n0.0,100")
        assert trace.duration == 1.0
        assert trace_summary(trace).mean_rate == 800.0

    def test_duration_header_before_last_packet(self):
        with pytest.raises(TraceParseError, match="duration"):
            parse_csv_trace("# duration: 0.5\n1.0,100")

    def test_accepts_file_object(self):
        trace = parse_csv_trace(io.StringIO("0.0,125\n"))
        assert trace.records == [(0.0, 1000)]

    def test_shuffled_lines_same_summary(self):
        rng = random.Random(5)
        lines = [f"{i * 0.01:.2f},{rng.randrange(40, 1500)}" for i in range(200)]
        shuffled = lines[:]
        rng.shuffle(shuffled)
        assert trace_summary(parse_csv_trace("\n".join(lines))) == trace_summary(
            parse_csv_trace("\n".join(shuffled))
        )

    def test_total_bits_exact_integer(self):
        trace = parse_csv_trace("0.0,3\n1.0,5\n2.0,7")
        assert trace_summary(trace).total_bits == (3 + 5 + 7) * 8


class TestParsePcap:
    def test_two_packet_example(self, tmp_path):
        path = tmp_path / "two.pcap"
        write_pcap(path, [(1000, 0, 60), (1000, 100_000, 1514)])
        trace = parse_pcap_trace(path)
        assert trace.records == [(0.0, 480), (0.1, 12112)]

    def test_big_endian(self, tmp_path):
        path = tmp_path / "be.pcap"
        write_pcap(path, [(10, 0, 100), (11, 500_000, 200)], endian=">")
        trace = parse_pcap_trace(path)
        assert trace.records == [(0.0, 800), (1.5, 1600)]

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pcap"
        path.write_bytes(struct.pack("<I", 0xDEADBEEF) + b"\x00" * 20)
        with pytest.raises(TraceParseError, match="magic"):
            parse_pcap_trace(path)

    def test_truncated_record_header(self, tmp_path):
        path = tmp_path / "trunc.pcap"
        write_pcap(path, [(0, 0, 60)])
        data = path.read_bytes()
        path.write_bytes(data[:-30])
        with pytest.raises(TraceParseError, match="truncated"):
            parse_pcap_trace(path)

    def test_zero_packets(self, tmp_path):
        path = tmp_path / "empty.pcap"
        write_pcap(path, [])
        with pytest.raises(TraceParseError, match="zero packets"):
            parse_pcap_trace(path)

    def test_round_trip_synthetic_trace(self, tmp_path):
        spec = GeneratorSpec(
            GeneratorKind.IID_GAUSSIAN, 50, seed=9, bin_width=0.5,
            params={"mean": 2e5, "std": 4e4},
        )
        trace = generate_trace(spec)
        # timestamps must sit on the microsecond grid for pcap to be lossless
        usec = np.round(trace.timestamps * 1e6).astype(int)
        path = tmp_path / "rt.pcap"
        write_pcap(path, [(int(u // 1_000_000), int(u % 1_000_000), int(s) // 8)
                          for u, s in zip(usec, trace.sizes_bits)])
        parsed = parse_pcap_trace(path)
        # the pcap reader rebases timestamps so the first packet sits at 0
        rebased = trace.timestamps - trace.timestamps[0]
        np.testing.assert_allclose(parsed.timestamps, rebased, atol=1e-9)
        np.testing.assert_array_equal(parsed.sizes_bits, trace.sizes_bits)


class TestTraceSummary:
    def test_arithmetic(self):
        trace = parse_csv_trace("0.0,100\n0.5,200")
        s = trace_summary(trace)
        assert s.packet_count == 2
        assert s.total_bits == 2400
        assert s.mean_rate == 4800.0

    def test_zero_duration_error(self):
        trace = parse_csv_trace("0.0,100")
        with pytest.raises(ValueError, match="duration"):
            trace_summary(trace)

    def test_poisson_trace_mean_rate(self):
        lam, size_bits, duration = 100.0, 8000.0, 100.0
        spec = GeneratorSpec(
            GeneratorKind.POISSON_PACKETS, int(duration), seed=21, bin_width=1.0,
            params={"rate_pps": lam, "packet_bits": size_bits},
        )
        s = trace_summary(generate_trace(spec))
        tol = 3.0 * size_bits * np.sqrt(lam * duration) / duration
        assert abs(s.mean_rate - lam * size_bits) <= tol


class TestCsvWriter:
    def test_round_trip(self, tmp_path):
        trace = parse_csv_trace("# duration: 3.0\n0.0,100\n1.25,1500\n2.5,40")
        path = tmp_path / "out.csv"
        write_csv_trace(trace, path)
        again = load_trace(path)
        assert again.records == trace.records
        assert again.duration == trace.duration

    def test_rejects_fractional_bytes(self, tmp_path):
        trace = PacketTrace(np.array([0.0]), np.array([13]), 1.0)
        with pytest.raises(ValueError, match="bytes"):
            write_csv_trace(trace, tmp_path / "x.csv")
