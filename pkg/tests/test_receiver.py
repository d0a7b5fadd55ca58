import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrwpan_sdr.frame import FrameConfig, LengthMode, build_mpdu, build_ppdu
from lrwpan_sdr.phy import PhyConfig, rx_frames, tx_frame
from lrwpan_sdr.phy.dsss import spread_octets
from lrwpan_sdr.phy.modem import IqBuffer
from lrwpan_sdr.phy.receiver import RxStatus, detect_preamble, soft_chips

from conftest import CONFIG_MATRIX, random_psdu
from oracles import chip_error_rate


def awgn(x: np.ndarray, snr_db: float, rng, spc: int = 4, amplitude: float = 1.0) -> np.ndarray:
    # Ec/N0 per chip for a half-sine chip of energy amplitude^2 * spc.
    sigma = amplitude * math.sqrt(spc / (2 * 10 ** (snr_db / 10)))
    return x + sigma * (rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size))


class TestDetect:
    def test_offset_zero(self):
        cands = detect_preamble(tx_frame(b"\x01\x02\x03"))
        assert cands[0].sample_offset == 0
        assert abs(cands[0].phase_estimate) < 1e-6
        assert cands[0].metric == pytest.approx(1.0)

    def test_shift(self):
        iq = tx_frame(b"\x01\x02\x03").samples
        cands = detect_preamble(np.concatenate((np.zeros(800), iq)))
        assert cands[0].sample_offset == 800

    @pytest.mark.parametrize("phase", [math.pi / 4, -2.0, 3.0])
    def test_phase(self, phase):
        iq = tx_frame(b"\x11\x22").samples * np.exp(1j * phase)
        c = detect_preamble(iq)[0]
        assert c.sample_offset == 0
        assert abs(np.angle(np.exp(1j * (c.phase_estimate - phase)))) < 0.01

    def test_sorted_by_metric(self, rng):
        iq = tx_frame(b"\x01" * 10).samples
        x = np.concatenate((iq, np.zeros(300), 0.5 * iq))
        x = awgn(x, 8, rng)
        cands = detect_preamble(x)
        assert [c.metric for c in cands] == sorted((c.metric for c in cands), reverse=True)

    def test_false_alarm_calibration(self):
        empty = 0
        for trial in range(100):
            noise = np.random.default_rng(trial)
            x = noise.standard_normal(100_000) + 1j * noise.standard_normal(100_000)
            empty += not detect_preamble(x)
        assert empty >= 99

    def test_short_input(self):
        assert detect_preamble(np.zeros(10, complex)) == []


class TestLoopback:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 127), st.sampled_from(CONFIG_MATRIX), st.integers(0, 2**32 - 1))
    def test_every_config(self, n, cfg, seed):
        psdu = random_psdu(np.random.default_rng(seed), n)
        out = rx_frames(tx_frame(psdu, cfg), cfg)
        assert len(out) == 1
        got, rep = out[0]
        assert got == psdu and rep.crc_ok and rep.status is RxStatus.OK
        assert 0 <= rep.lqi <= 255
        assert rep.config_snapshot == cfg

    def test_standard_lqi(self, rng):
        for n in (1, 2, 20, 127):
            (psdu, rep), = rx_frames(tx_frame(random_psdu(rng, n)))
            assert rep.lqi >= 250
            assert rep.rssi_db == pytest.approx(0.0, abs=0.1)

    def test_empty_psdu(self):
        (psdu, rep), = rx_frames(tx_frame(b""))
        assert psdu == b"" and rep.crc_ok

    def test_phase_rotation_invariant(self, rng):
        psdu = random_psdu(rng, 40)
        for phase in np.linspace(-math.pi, math.pi, 9):
            iq = tx_frame(psdu)
            iq = IqBuffer(iq.samples * np.exp(1j * phase))
            (got, rep), = rx_frames(iq)
            assert got == psdu and rep.crc_ok

    def test_amplitude_invariant(self, rng):
        psdu = random_psdu(rng, 30)
        for amp in (1e-3, 0.3, 40.0):
            (got, rep), = rx_frames(tx_frame(psdu, PhyConfig(amplitude=amp)))
            assert got == psdu

    def test_crc_error_reported(self, rng):
        psdu = bytearray(random_psdu(rng, 20))
        psdu[5] ^= 0x10
        (got, rep), = rx_frames(tx_frame(bytes(psdu)))
        assert got == bytes(psdu)
        assert not rep.crc_ok and rep.status is RxStatus.CRC_ERROR and rep.delivered

    def test_wrong_sfd(self):
        tx_cfg = PhyConfig(frame=FrameConfig(sfd=0x7A))
        results = rx_frames(tx_frame(build_mpdu(b"xyz"), tx_cfg))
        assert all(r.status is RxStatus.BAD_SFD and not r.crc_ok for _, r in results)
        assert rx_frames(tx_frame(build_mpdu(b"xyz"), tx_cfg), tx_cfg)[0][1].crc_ok

    def test_truncated(self, rng):
        iq = tx_frame(random_psdu(rng, 60)).samples
        results = rx_frames(iq[: iq.size // 2])
        assert results and results[0][1].status is RxStatus.TRUNCATED
        assert not results[0][1].delivered

    def test_two_frames(self, rng):
        a, b = random_psdu(rng, 10), random_psdu(rng, 30)
        x = np.concatenate((np.zeros(123), tx_frame(a).samples, np.zeros(500), tx_frame(b).samples))
        out = rx_frames(x)
        assert [p for p, r in out if r.crc_ok] == [a, b]
        assert out[0][1].sync_sample_offset == 123

    def test_extended_length(self, rng):
        cfg = PhyConfig(frame=FrameConfig(length_mode=LengthMode.EXTENDED_16BIT))
        psdu = random_psdu(rng, 400)
        (got, rep), = rx_frames(tx_frame(psdu, cfg), cfg)
        assert got == psdu and rep.crc_ok

    def test_noise_only_buffer(self):
        x = np.random.default_rng(3).standard_normal(50_000) * (1 + 0j)
        assert rx_frames(x) == []


class TestNoise:
    def test_10db_frames(self):
        rng = np.random.default_rng(10)
        ok = 0
        for _ in range(200):
            psdu = random_psdu(rng, 20)
            iq = awgn(tx_frame(psdu).samples, 10.0, rng)
            ok += any(p == psdu and r.crc_ok for p, r in rx_frames(iq))
        assert ok >= 198

    def test_cer_oracle_small(self):
        # Loose sanity check; the acceptance suite runs the full 10^6-chip version.
        rng = np.random.default_rng(7)
        psdu = random_psdu(rng, 127)
        ref = spread_octets(build_ppdu(psdu).octets)
        clean = tx_frame(psdu).samples
        errors = total = 0
        for _ in range(15):
            soft = soft_chips(awgn(clean, 4.32, rng), PhyConfig(), 0, ref.size)
            errors += int(np.count_nonzero(np.sign(soft) != ref))
            total += ref.size
        assert errors / total == pytest.approx(chip_error_rate(4.32), rel=0.25)

    def test_soft_chips_noiseless(self, rng):
        psdu = random_psdu(rng, 12)
        ref = spread_octets(build_ppdu(psdu).octets)
        soft = soft_chips(tx_frame(psdu), PhyConfig(), 0, ref.size)
        assert np.allclose(soft, ref)
