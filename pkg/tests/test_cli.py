import subprocess
import sys

import numpy as np
import pytest

from lrwpan_sdr.cli import main
from lrwpan_sdr.frame import build_mpdu
from lrwpan_sdr.pcap import read_pcap
from lrwpan_sdr.phy.iqfile import read_sidecar


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestEncodeDecode:
    def test_encode_aa(self, tmp_path, capsys):
        out_path = tmp_path / "aa.iq"
        code, out, _ = run(capsys, "encode", "--psdu", "AA", "-o", str(out_path))
        assert code == 0
        assert "ppdu_octets=7" in out and "chips=448" in out and "airtime_us=224" in out
        assert "samples=1796" in out
        assert out_path.stat().st_size == 1796 * 8

    def test_nonstandard_sidecar(self, tmp_path, capsys):
        out_path = tmp_path / "x.iq"
        code, _, _ = run(capsys, "encode", "--psdu", "0102", "--sf", "16", "--pulse", "rect", "-o", str(out_path))
        assert code == 0
        meta = read_sidecar(out_path)
        assert meta["standard_compliant"] == "false" and meta["chips_per_symbol"] == "16"

    @pytest.mark.parametrize(
        "argv",
        [
            ["--psdu", "00" * 128],
            ["--psdu", "XYZ"],
            [],
            ["--psdu", "AA", "--preamble-len", "1"],
            ["--psdu", "AA", "--pulse", "rc", "--rolloff", "2"],
        ],
    )
    def test_encode_errors(self, tmp_path, capsys, argv):
        code, _, err = run(capsys, "encode", "-o", str(tmp_path / "e.iq"), *argv)
        assert code == 2 and "error" in err

    def test_psdu_file(self, tmp_path, capsys):
        src = tmp_path / "p.bin"
        src.write_bytes(b"\x41\x88\x01")
        code, out, _ = run(capsys, "encode", "--psdu-file", str(src), "-o", str(tmp_path / "p.iq"))
        assert code == 0 and "ppdu_octets=9" in out

    @pytest.mark.parametrize(
        "flags",
        [[], ["--sf", "8", "--pulse", "rc", "--rolloff", "0.3"], ["--sf", "64", "--pulse", "rect"],
         ["--length-mode", "extended", "--preamble-len", "8", "--sfd", "0x7A"]],
    )
    def test_round_trip(self, tmp_path, capsys, flags):
        path = tmp_path / "rt.iq"
        psdu = "618807FFFF0100" + "A5" * 10
        full = build_mpdu(bytes.fromhex(psdu)).hex().upper()
        assert run(capsys, "encode", "--psdu", full, "-o", str(path), *flags)[0] == 0
        pcap = tmp_path / "rt.pcap"
        code, out, _ = run(capsys, "decode", str(path), "--pcap", str(pcap))
        assert code == 0
        assert f"crc=OK len={len(full) // 2} psdu={full}" in out and out.strip().endswith("frames=1")
        header, records = read_pcap(pcap.read_bytes())
        assert header["linktype"] == 195 and records[0][1].hex().upper() == full

    def test_decode_noise(self, tmp_path, capsys):
        path = tmp_path / "noise.iq"
        rng = np.random.default_rng(0)
        path.write_bytes(rng.standard_normal(20_000).astype("<f4").tobytes())
        code, out, _ = run(capsys, "decode", str(path))
        assert code == 0 and out.strip() == "frames=0"

    def test_decode_malformed(self, tmp_path, capsys):
        path = tmp_path / "bad.iq"
        path.write_bytes(b"\x00" * 13)
        assert run(capsys, "decode", str(path))[0] == 2
        assert run(capsys, "decode", str(tmp_path / "missing.iq"))[0] == 2


class TestExperiments:
    def test_ber_csv(self, tmp_path, capsys):
        csv = tmp_path / "ber.csv"
        assert run(capsys, "ber", "--snr", "inf,3", "--frames", "3", "--seed", "4", "--csv", str(csv))[0] == 0
        lines = csv.read_text().splitlines()
        assert lines[0].startswith("# lrwpan-sdr") and "seed=4" in lines[0]
        rows = [line for line in lines if not line.startswith("#")]
        assert rows[0].startswith("snr_db,cer,per,lqi_mean")
        assert rows[1].split(",")[2] == "0.000000"

    def test_ber_bad_snr(self, capsys):
        assert run(capsys, "ber", "--snr", "a,b")[0] == 2
        assert run(capsys, "ber", "--snr", ",")[0] == 2

    def test_demo_ack(self, tmp_path, capsys):
        csv = tmp_path / "ack.csv"
        trace = tmp_path / "trace.csv"
        code, out, _ = run(capsys, "demo-ack", "--frames", "5", "--proc-latency", "7", "--csv", str(csv), "--trace", str(trace))
        assert code == 0 and "max_abs_error_ticks=0" in out and "observed=199" in out
        rows = [line for line in csv.read_text().splitlines() if not line.startswith("#")]
        assert all(r.endswith(",199") for r in rows[1:]) and len(rows) == 6
        assert trace.read_text().startswith("tick,node_id,event")

    def test_demo_throughput(self, tmp_path, capsys):
        csv = tmp_path / "tp.csv"
        code, out, _ = run(capsys, "demo-throughput", "--duration", "200000", "--window", "100000",
                           "--switch-at", "100000:SPREADING=16", "--csv", str(csv))
        assert code == 0 and "crc_errors=0" in out
        text = csv.read_text()
        assert "switches=100000:SPREADING=16" in text
        rows = [line for line in text.splitlines() if not line.startswith("#")]
        assert rows[0] == "window_start_tick,config_label,goodput_bps"
        assert rows[2].split(",")[1] == "sf16/halfsine"

    def test_bad_switch(self, capsys):
        assert run(capsys, "demo-throughput", "--duration", "1000", "--switch-at", "oops")[0] == 2
        assert run(capsys, "demo-throughput", "--duration", "1000", "--switch-at", "5:SPREADING=12")[0] == 3

    def test_topology_file(self, tmp_path, capsys):
        topo = tmp_path / "t.ini"
        topo.write_text("[medium]\nseed=2\n[node A]\n[node B]\n[link A <-> B]\ndelay_ticks=3\n")
        code, out, _ = run(capsys, "demo-ack", "--frames", "2", "--topology", str(topo), "--csv", str(tmp_path / "a.csv"))
        assert code == 0 and "max_abs_error_ticks=0" in out
        topo.write_text("[node A]\n[link A Q]\n")
        assert run(capsys, "demo-ack", "--topology", str(topo))[0] == 2

    def test_seeded_reproducible(self, tmp_path, capsys):
        outs = []
        for i in range(2):
            csv = tmp_path / f"b{i}.csv"
            run(capsys, "ber", "--snr", "2", "--frames", "3", "--seed", "9", "--csv", str(csv))
            outs.append(csv.read_bytes())
        assert outs[0] == outs[1]


class TestReg:
    def test_get_chip_id(self, tmp_path, capsys):
        code, out, _ = run(capsys, "reg", "get", "CHIP_ID", "--session", str(tmp_path / "s.ini"))
        assert code == 0 and out.strip() == "0x15C00154"

    def test_illegal(self, tmp_path, capsys):
        code, _, err = run(capsys, "reg", "set", "SPREADING", "12", "--session", str(tmp_path / "s.ini"))
        assert code == 3 and "IllegalValue" in err

    def test_set_persists_per_node(self, tmp_path, capsys):
        session = str(tmp_path / "s.ini")
        assert run(capsys, "reg", "set", "SFD", "0x7A", "--session", session)[0] == 0
        assert run(capsys, "reg", "get", "SFD", "--session", session)[1].strip() == "0x7A"
        assert run(capsys, "reg", "get", "0x14", "--session", session, "--node", "B")[1].strip() == "0xA7"
        dump = run(capsys, "reg", "dump", "--session", session)[1]
        assert "SFD=0x0000007A" in dump.splitlines()

    def test_errors(self, tmp_path, capsys):
        session = str(tmp_path / "s.ini")
        assert run(capsys, "reg", "get", "NOPE", "--session", session)[0] == 3
        assert run(capsys, "reg", "set", "CHIP_ID", "1", "--session", session)[0] == 3
        assert run(capsys, "reg", "set", "SFD", "--session", session)[0] == 2
        assert run(capsys, "reg", "set", "SFD", "zz", "--session", session)[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lrwpan_sdr.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "lrwpan-sdr" in proc.stdout
