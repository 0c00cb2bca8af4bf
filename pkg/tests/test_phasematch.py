import math

import numpy as np
import pytest

from chirpecho import phasematch as pm

K_580NM_PER_MM = 2.0 * math.pi / 580e-6  # rad/mm


def _collinear(sign: float, L: float = 1.0) -> pm.WaveVectorSet:
    k_s = np.array([1.0, 0.0, 0.0])
    k_c = sign * k_s
    return pm.WaveVectorSet(k_s=k_s, k_1=k_c, k_2=k_c, k_3=k_c, L=L)


def test_forward_collinear_secondary_echo():
    ws = _collinear(+1.0)
    for sign in ("negative", "positive"):
        k_e = pm.echo_wavevectors(ws, sign)[3]
        assert np.array_equal(k_e, ws.k_s)


def test_backward_controls_silence_primary():
    ws = _collinear(-1.0)
    echoes = pm.echo_wavevectors(ws, "negative")
    assert np.array_equal(echoes[2], -3.0 * ws.k_s)
    echoes_pos = pm.echo_wavevectors(ws, "positive")
    assert np.array_equal(echoes_pos[1], -3.0 * ws.k_s)
    verdict = pm.is_silenced(echoes[2], ws.k_s_mag, L=1e4)
    assert verdict.silenced


def test_backward_echo_presets_exact():
    for name, sign in (("backward_negative", "negative"), ("backward_positive", "positive")):
        ws = pm.geometry_preset(name, k_mag=1.0, L=1.0)
        k_e3 = pm.echo_wavevectors(ws, sign)[3]
        assert np.array_equal(k_e3, -ws.k_s)  # exact float arithmetic
        assert not pm.is_silenced(k_e3, ws.k_s_mag, ws.L).silenced
        # the primary stage is far off the light cone
        primary_stage = 2 if sign == "negative" else 1
        k_p = pm.echo_wavevectors(ws, sign)[primary_stage]
        assert abs(np.linalg.norm(k_p) - math.sqrt(3.0)) < 1e-12


def test_silencing_arithmetic_oracle():
    # |k_e| = 3 k_s at 580 nm over 1 mm: mismatch = 2 k_s L
    k_s = K_580NM_PER_MM
    verdict = pm.is_silenced(np.array([3.0 * k_s, 0.0, 0.0]), k_s, L=1.0)
    expected = 2.0 * K_580NM_PER_MM * 1.0
    assert verdict.mismatch == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.1666e4, rel=1e-4)
    assert verdict.silenced


def test_matched_echo_not_silenced():
    verdict = pm.is_silenced(np.array([0.0, 0.0, 2.0]), 2.0, L=123.0)
    assert verdict.mismatch == 0.0
    assert not verdict.silenced


def test_threshold_parameter():
    v = pm.is_silenced(np.array([1.1, 0.0, 0.0]), 1.0, L=40.0)
    assert v.mismatch == pytest.approx(4.0)
    assert v.silenced  # 4.0 > pi
    assert not pm.is_silenced(np.array([1.1, 0.0, 0.0]), 1.0, L=40.0, threshold=2.0).silenced


def test_linearity_and_negation():
    rng = np.random.default_rng(11)
    vecs = {k: rng.normal(size=3) for k in ("k_s", "k_1", "k_2", "k_3")}
    for k in vecs:
        vecs[k] *= 1.0 / np.linalg.norm(vecs[k])
    ws = pm.WaveVectorSet(L=1.0, **vecs)
    neg = pm.WaveVectorSet(L=1.0, **{k: -v for k, v in vecs.items()})
    for sign in ("negative", "positive"):
        a = pm.echo_wavevectors(ws, sign)
        b = pm.echo_wavevectors(neg, sign)
        for stage in a:
            assert np.allclose(b[stage], -a[stage], atol=1e-15)


def test_secondary_magnitude_bound():
    rng = np.random.default_rng(5)
    for _ in range(100):
        dirs = rng.normal(size=(4, 3))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        ws = pm.WaveVectorSet(k_s=dirs[0], k_1=dirs[1], k_2=dirs[2], k_3=dirs[3], L=1.0)
        for sign in ("negative", "positive"):
            k_e3 = pm.echo_wavevectors(ws, sign)[3]
            assert np.linalg.norm(k_e3) <= 5.0 + 1e-12


def test_chirp_sign_swap_exchanges_stage_maps():
    ws = pm.geometry_preset("backward_negative")
    neg = pm.echo_wavevectors(ws, "negative")
    pos = pm.echo_wavevectors(ws, "positive")
    assert set(neg) == {3, 2}
    assert set(pos) == {3, 1}
    # the two chirp directions give genuinely different bookkeeping, and
    # each backward preset works only with its own sign
    assert not np.array_equal(neg[3], pos[3])
    ws_pos = pm.geometry_preset("backward_positive")
    assert np.array_equal(pm.echo_wavevectors(ws_pos, "positive")[3], -ws_pos.k_s)
    assert not np.array_equal(pm.echo_wavevectors(ws_pos, "negative")[3], -ws_pos.k_s)


def test_magnitude_mismatch_warning():
    with pytest.warns(UserWarning, match="magnitudes differ"):
        pm.WaveVectorSet(
            k_s=np.array([1.0, 0.0, 0.0]),
            k_1=np.array([1.5, 0.0, 0.0]),
            k_2=np.array([1.0, 0.0, 0.0]),
            k_3=np.array([1.0, 0.0, 0.0]),
            L=100.0,
        )


def test_validation():
    with pytest.raises(ValueError):
        pm.WaveVectorSet(
            k_s=np.array([1.0, 0.0]), k_1=np.zeros(3), k_2=np.zeros(3),
            k_3=np.zeros(3), L=1.0,
        )
    with pytest.raises(ValueError):
        pm.geometry_preset("sideways")
    with pytest.raises(ValueError):
        pm.echo_wavevectors(_collinear(1.0), "sideways")
    with pytest.raises(ValueError):
        pm.is_silenced(np.ones(3), 1.0, L=0.0)
