import numpy as np
import pytest

from linkdim.ingest import parse_csv_trace
from linkdim.series import RateSeries, aggregate, block_aggregate


def make_series(samples, bin_width=1.0):
    return RateSeries(np.asarray(samples, dtype=float), bin_width)


class TestAggregate:
    def test_two_bins(self):
        trace = parse_csv_trace("# duration: 1.0\n0.0,100\n0.5,200")
        s = aggregate(trace, 0.5)
        np.testing.assert_array_equal(s.samples, [1600.0, 3200.0])
        assert s.bin_width == 0.5

    def test_single_bin(self):
        trace = parse_csv_trace("# duration: 1.0\n0.0,100\n0.5,200")
        np.testing.assert_array_equal(aggregate(trace, 1.0).samples, [2400.0])

    def test_conservation_when_T_divides_duration(self):
        trace = parse_csv_trace(
            "# duration: 2.0\n0.0,100\n0.3,50\n0.9,75\n1.1,10\n1.999,3"
        )
        for T in (0.5, 1.0, 2.0):
            s = aggregate(trace, T)
            assert s.samples.sum() * T == pytest.approx(238 * 8, abs=1e-9)

    def test_packet_at_duration_lands_in_final_bin(self):
        trace = parse_csv_trace("0.0,100\n1.0,100")  # duration = 1.0
        s = aggregate(trace, 0.5)
        np.testing.assert_array_equal(s.samples, [1600.0, 1600.0])

    def test_partial_last_bin_divided_by_full_T(self):
        trace = parse_csv_trace("# duration: 1.2\n0.0,100\n1.1,100")
        s = aggregate(trace, 0.5)  # 3 bins, last covers only 0.2 s of trace
        np.testing.assert_array_equal(s.samples, [1600.0, 0.0, 1600.0])

    def test_T_larger_than_duration_allowed(self):
        trace = parse_csv_trace("# duration: 1.0\n0.0,100")
        assert len(aggregate(trace, 10.0)) == 1

    def test_nonpositive_T_rejected(self):
        trace = parse_csv_trace("0.0,100\n1.0,100")
        with pytest.raises(ValueError):
            aggregate(trace, 0.0)
        with pytest.raises(ValueError):
            aggregate(trace, -1.0)

    def test_mean_rate_consistency(self):
        # mean(samples) * bins*T/duration equals the trace mean rate exactly
        # whenever T divides the duration
        trace = parse_csv_trace("# duration: 3.0\n0.1,11\n0.7,13\n1.9,17\n2.2,19")
        for T in (0.5, 1.0, 1.5, 3.0):
            s = aggregate(trace, T)
            scaled = s.samples.mean() * (len(s) * T / trace.duration)
            assert scaled == pytest.approx(60 * 8 / 3.0, rel=1e-12)


class TestBlockAggregate:
    def test_pairs(self):
        s = block_aggregate(make_series([2, 4, 6, 8]), 2)
        np.testing.assert_array_equal(s.samples, [3.0, 7.0])
        assert s.bin_width == 2.0

    def test_identity(self):
        orig = make_series([1, 5, 2, 9])
        s = block_aggregate(orig, 1)
        np.testing.assert_array_equal(s.samples, orig.samples)
        assert s.bin_width == orig.bin_width

    def test_remainder_discarded(self):
        s = block_aggregate(make_series([1, 2, 3, 4, 5]), 2)
        np.testing.assert_array_equal(s.samples, [1.5, 3.5])

    @pytest.mark.parametrize("m", [0, -1, 6])
    def test_invalid_block_size(self, m):
        with pytest.raises(ValueError):
            block_aggregate(make_series([1, 2, 3, 4, 5]), m)

    def test_composition(self):
        rng = np.random.default_rng(0)
        s = make_series(rng.uniform(0, 10, 64))
        ab = block_aggregate(block_aggregate(s, 2), 4)
        direct = block_aggregate(s, 8)
        np.testing.assert_allclose(ab.samples, direct.samples, rtol=1e-12)
        assert ab.bin_width == direct.bin_width

    def test_mean_preserved_when_divides(self):
        rng = np.random.default_rng(1)
        s = make_series(rng.uniform(0, 10, 60))
        for m in (2, 3, 5, 6):
            assert block_aggregate(s, m).samples.mean() == pytest.approx(
                s.samples.mean(), rel=1e-12
            )


class TestRateSeriesInvariants:
    def test_rejects_negative_samples(self):
        with pytest.raises(ValueError):
            make_series([1.0, -0.5])

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            make_series([])

    def test_rejects_nonpositive_bin_width(self):
        with pytest.raises(ValueError):
            make_series([1.0], bin_width=0.0)
