import struct

import numpy as np
import pytest

from marcrelay.channel import (ChannelSet, PowerBudget, derive_gains, load_channels, make_rng,
                               parse_channels, sample_rayleigh, save_channels)
from marcrelay.exceptions import InvalidDimensionsError, MalformedFileError, NotFiniteError

from conftest import random_unitary


def test_sampling_is_deterministic():
    a = sample_rayleigh(1, [1], 1, 42)
    b = sample_rayleigh(1, [1], 1, 42)
    assert a == b
    assert a != sample_rayleigh(1, [1], 1, 43)


def test_scenario_shapes():
    c = sample_rayleigh(8, [4] * 8, 4, 7)
    assert c.K == 8 and c.M_r == 4 and c.M == (4,) * 8
    assert all(H.shape == (4, 4) for H in c.H_r)
    assert c.h.shape == (4,)


def test_unit_power_entries():
    c = sample_rayleigh(1, [1000], 100, 3)
    z = np.concatenate([c.H_r[0].ravel(), c.h])
    assert z.size >= 10**5
    assert 0.99 <= np.mean(np.abs(z) ** 2) <= 1.01
    # circular symmetry: each quadrature carries half the power
    assert np.var(z.real) == pytest.approx(0.5, abs=0.01)
    assert np.var(z.imag) == pytest.approx(0.5, abs=0.01)
    assert abs(np.mean(z)) < 0.01


def test_seed_tuples():
    assert sample_rayleigh(2, 2, 2, (5, 0)) == sample_rayleigh(2, 2, 2, ((5,), 0))
    assert sample_rayleigh(2, 2, 2, (5, 0)) != sample_rayleigh(2, 2, 2, (5, 1))


@pytest.mark.parametrize("args", [(0, [], 2), (1, [0], 2), (1, [1], 0), (2, [1], 1)])
def test_invalid_dimensions(args):
    with pytest.raises(InvalidDimensionsError):
        sample_rayleigh(*args, seed=0)


def test_channel_validation():
    with pytest.raises(InvalidDimensionsError):
        ChannelSet((np.ones((3, 2)),), np.ones(2))
    with pytest.raises(NotFiniteError):
        ChannelSet((np.full((2, 2), np.inf),), np.ones(2))


def test_channel_is_immutable():
    c = sample_rayleigh(1, 2, 2, 0)
    with pytest.raises(ValueError):
        c.H_r[0][0, 0] = 1.0


def test_power_budget_validation():
    with pytest.raises(ValueError):
        PowerBudget([1.0, -1.0], 1.0)
    with pytest.raises(NotFiniteError):
        PowerBudget([1.0], np.nan)


class TestDeriveGains:
    def test_scalar(self):
        g = derive_gains(ChannelSet((np.array([[2.0]]),), np.array([1.0])))
        assert g.sigma1_sq == 1.0
        np.testing.assert_allclose(g.alpha1, [4.0])

    def test_identity(self):
        g = derive_gains(ChannelSet((np.eye(2),), np.ones(2)))
        assert g.alpha1[0] == pytest.approx(1.0)
        assert g.sigma1_sq == 2.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_svd(self, seed):
        c = sample_rayleigh(3, 4, 4, seed)
        s = [np.linalg.svd(H, compute_uv=False)[0] for H in c.H_r]
        np.testing.assert_allclose(derive_gains(c).alpha1, np.square(s), rtol=1e-10)
        assert derive_gains(c).sigma1_sq == pytest.approx(np.linalg.norm(c.h) ** 2, rel=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_unitary_invariance(self, seed):
        r = np.random.default_rng(seed)
        c = sample_rayleigh(2, [3, 2], 4, seed)
        rotated = ChannelSet(tuple(H @ random_unitary(r, H.shape[1]) for H in c.H_r), c.h)
        np.testing.assert_allclose(derive_gains(rotated).alpha1, derive_gains(c).alpha1,
                                   rtol=1e-9)


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path):
        c = sample_rayleigh(3, [1, 2, 3], 4, 11)
        path = tmp_path / "c.txt"
        save_channels(c, path)
        back = load_channels(path)
        assert back == c
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.startswith(b"MARC v1 K=3 Mr=4 M=1,2,3\n")
        assert raw.count(b"\n") == 1 + 4 * 6 + 4

    def test_extreme_values_round_trip(self, tmp_path):
        H = np.array([[1e-300 + 5e300j, -0.1 - 0j], [np.pi, -np.e * 1j]])
        c = ChannelSet((H,), np.array([1 / 3, 2 / 3 + 1j / 7]))
        save_channels(c, tmp_path / "x.txt")
        assert load_channels(tmp_path / "x.txt") == c

    def test_comments_are_skipped(self, tmp_path):
        c = sample_rayleigh(1, 1, 1, 0)
        save_channels(c, tmp_path / "c.txt", ["violation", "note"])
        text = (tmp_path / "c.txt").read_text()
        assert text.startswith("# violation\n# note\n")
        assert load_channels(tmp_path / "c.txt") == c

    def test_declared_k_mismatch(self):
        with pytest.raises(MalformedFileError, match="line 1"):
            parse_channels("MARC v1 K=2 Mr=1 M=1\n1 0\n1 0\n")

    def test_wrong_entry_count(self):
        with pytest.raises(MalformedFileError):
            parse_channels("MARC v1 K=1 Mr=1 M=1\n1 0\n")

    def test_bad_entry_reports_line(self):
        with pytest.raises(MalformedFileError, match="line 3"):
            parse_channels("MARC v1 K=1 Mr=1 M=1\n1 0\nx 0\n")

    def test_bad_header(self):
        with pytest.raises(MalformedFileError):
            parse_channels("MARC v2 K=1 Mr=1 M=1\n1 0\n1 0\n")
        with pytest.raises(MalformedFileError):
            parse_channels("")

    def test_text_is_independent_of_byte_order(self, tmp_path):
        # binary encodings differ by endianness; the decimal text must decode to
        # the same doubles as either encoding
        c = sample_rayleigh(2, 2, 3, 5)
        save_channels(c, tmp_path / "c.txt")
        loaded = load_channels(tmp_path / "c.txt")
        vals = np.concatenate([H.ravel() for H in c.H_r] + [c.h])
        got = np.concatenate([H.ravel() for H in loaded.H_r] + [loaded.h])
        for fmt in ("<d", ">d"):
            for a, b in zip(vals, got):
                for x, y in ((a.real, b.real), (a.imag, b.imag)):
                    assert struct.unpack(fmt, struct.pack(fmt, x)) == struct.unpack(
                        fmt, struct.pack(fmt, y))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_channels(tmp_path / "nope.txt")


def test_first_entry_uses_first_two_uniforms():
    u = make_rng(9).random(2)
    expected = np.sqrt(-np.log1p(-u[0])) * np.exp(2j * np.pi * u[1])
    z = sample_rayleigh(1, 1, 1, 9).H_r[0][0, 0]
    assert z == pytest.approx(expected, abs=1e-15)
