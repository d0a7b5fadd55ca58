import struct

import numpy as np
import pytest

from lrwpan_sdr.frame import build_ack, build_data_frame
from lrwpan_sdr.pcap import pcap_bytes, read_pcap, write_pcap
from lrwpan_sdr.phy import PhyConfig, PulseShape, tx_frame
from lrwpan_sdr.phy.iqfile import read_iq, read_sidecar, sidecar_path, write_iq


class TestPcap:
    def test_global_header_fields(self):
        blob = pcap_bytes([])
        # Field-by-field against the classic libpcap layout.
        magic, major, minor, zone, sigfigs, snaplen, linktype = struct.unpack("<IHHiIII", blob)
        assert (magic, major, minor, zone, sigfigs, snaplen, linktype) == (0xA1B2C3D4, 2, 4, 0, 0, 128, 195)
        assert blob[:4] == b"\xd4\xc3\xb2\xa1"
        assert len(blob) == 24

    def test_records(self, tmp_path):
        frames = [(1_500_123, build_data_frame(1, b"abc")), (2_000_000, build_ack(1))]
        path = tmp_path / "x.pcap"
        write_pcap(path, frames)
        blob = path.read_bytes()
        sec, usec, incl, orig = struct.unpack_from("<IIII", blob, 24)
        assert (sec, usec, incl, orig) == (1, 500_123, 8, 8)
        assert blob[40:48] == frames[0][1]
        header, records = read_pcap(blob)
        assert header["linktype"] == 195
        assert [(t, d) for t, d, _ in records] == frames

    def test_snaplen_truncates(self):
        long = bytes(200)
        _, records = read_pcap(pcap_bytes([(0, long)]))
        assert records == [(0, bytes(128), 200)]

    def test_bad_magic(self):
        with pytest.raises(ValueError):
            read_pcap(b"\x00" * 24)


class TestIqFile:
    def test_round_trip(self, tmp_path):
        cfg = PhyConfig(chips_per_symbol=16, pulse=PulseShape.RECT)
        iq = tx_frame(b"\x01\x02\x03", cfg, start_tick=77)
        path = tmp_path / "f.iq"
        side = write_iq(path, iq, cfg)
        assert side == sidecar_path(path) and side.name == "f.iq.meta"
        raw = path.read_bytes()
        assert len(raw) == 8 * len(iq)
        floats = np.frombuffer(raw, "<f4")
        assert floats[0] == np.float32(iq.samples[0].real) and floats[1] == np.float32(iq.samples[0].imag)
        back = read_iq(path)
        assert back.start_tick == 77 and back.sample_rate_hz == 8_000_000
        assert np.allclose(back.samples, iq.samples, atol=1e-6)
        meta = read_sidecar(path)
        assert PhyConfig.from_snapshot(meta) == cfg
        assert meta["standard_compliant"] == "false"

    def test_bad_size(self, tmp_path):
        path = tmp_path / "bad.iq"
        path.write_bytes(b"\x00" * 12)
        with pytest.raises(ValueError):
            read_iq(path)

    def test_no_sidecar(self, tmp_path):
        path = tmp_path / "bare.iq"
        path.write_bytes(np.zeros(4, "<f4").tobytes())
        assert read_sidecar(path) == {}
        assert len(read_iq(path)) == 2
