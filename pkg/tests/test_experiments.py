import math

import pytest

from lrwpan_sdr.experiments import Switch, ber_csv, csv_header, run_ber, run_ber_point, run_demo_ack, run_demo_throughput
from lrwpan_sdr.medium import LinkModel, two_node_topology
from lrwpan_sdr.phy import PhyConfig

from oracles import cycle_ticks, frame_ticks, goodput_windows


def test_cycle_oracle_values():
    # Hand-checked: 133-octet PPDU = 34052 samples, 11-octet ACK = 2820 samples.
    assert frame_ticks(127) == 4257 and frame_ticks(5) == 353
    assert cycle_ticks(127) == 4257 + 192 + 353 + 192 == 4994
    assert cycle_ticks(127, sf=16) == 2129 + 192 + 177 + 192 == 2690


class TestBer:
    def test_infinite_snr(self):
        p = run_ber_point(math.inf, 5, seed=1)
        assert p.per == 0 and p.cer == 0 and p.lqi_mean >= 250

    def test_low_snr_has_errors(self):
        p = run_ber_point(0.0, 5, seed=1)
        assert p.cer > 0.03 and p.chips == 5 * 2 * (4 + 1 + 1 + 20) * 32

    def test_csv_deterministic(self):
        cfg = PhyConfig()
        a = ber_csv(run_ber([2.0, 6.0], 4, 11), 11, cfg, 20)
        b = ber_csv(run_ber([2.0, 6.0], 4, 11), 11, cfg, 20)
        assert a == b
        assert a.startswith("# lrwpan-sdr ") and "seed=11" in a.splitlines()[0]
        assert "snr_db,cer,per,lqi_mean,chips,frames" in a.splitlines()

    def test_points_independent_seeds(self):
        p1, p2 = run_ber([3.0, 3.0], 4, 5)
        assert p1.cer != p2.cer

    def test_validation(self):
        with pytest.raises(ValueError):
            run_ber([], 1, 0)
        with pytest.raises(ValueError):
            run_ber_point(3.0, 1, 0, psdu_len=4)


class TestAckDemo:
    @pytest.mark.parametrize("latency", [0, 7])
    def test_turnaround(self, latency):
        res = run_demo_ack(frames=10, proc_latency=latency)
        assert [r.turnaround_observed for r in res.rows] == [192 + latency] * 10
        assert res.max_error == 0
        assert all(r.tx_tick % 10_000 == 0 for r in res.rows)
        assert all(r.rx_end_tick == r.tx_tick + frame_ticks(20) for r in res.rows)

    def test_with_delay(self):
        topo = two_node_topology(LinkModel(delay_ticks=4))
        res = run_demo_ack(frames=5, topology=topo)
        assert all(r.rx_end_tick == r.tx_tick + 4 + frame_ticks(20) for r in res.rows)
        assert res.max_error == 0

    def test_csv(self):
        res = run_demo_ack(frames=3)
        text = res.csv(0, PhyConfig())
        lines = [line for line in text.splitlines() if not line.startswith("#")]
        assert lines[0] == "seq,tx_tick,rx_end_tick,ack_tick,turnaround_observed"
        assert lines[1].split(",")[-1] == "192"

    def test_lossy_link_reports_missing(self):
        res = run_demo_ack(frames=20, topology=two_node_topology(LinkModel(chip_snr_db=-6)), seed=3)
        assert res.max_error is None
        assert all(r.turnaround_observed in (None, 192) for r in res.rows)


class TestThroughput:
    def test_matches_oracle(self):
        res = run_demo_throughput(duration_ticks=300_000, window_ticks=50_000)
        oracle = goodput_windows(300_000, 50_000, 127, 100, [])
        for (start, tag, bps), (ostart, sf, obps) in zip(res.windows, oracle):
            assert start == ostart and tag == f"sf{sf}/halfsine"
            assert bps == pytest.approx(obps, rel=0.01)
        assert res.crc_errors == 0

    def test_switch(self):
        sw = [Switch.parse("150000:SPREADING=16")]
        res = run_demo_throughput(duration_ticks=300_000, window_ticks=50_000, switches=sw)
        oracle = goodput_windows(300_000, 50_000, 127, 100, [(150_000, 16)])
        got = [bps for _, _, bps in res.windows]
        assert got == pytest.approx([o for _, _, o in oracle], rel=0.01)
        assert got[-1] > got[0]
        assert [tag for _, tag, _ in res.windows][-1] == "sf16/halfsine"

    def test_switch_parse(self):
        assert Switch.parse("0x10:sfd=0x7A") == Switch(16, "SFD", 0x7A)
        with pytest.raises(ValueError):
            Switch.parse("100SPREADING16")

    def test_ifs_validation(self):
        with pytest.raises(ValueError):
            run_demo_throughput(duration_ticks=1000, ifs_ticks=0)


def test_csv_header():
    text = csv_header("x", 5, PhyConfig(), foo=1)
    lines = text.splitlines()
    assert lines[0].endswith("x seed=5") and lines[1].startswith("# config ") and lines[2] == "# foo=1"
