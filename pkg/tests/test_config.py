import pytest

from qspet.config import ConfigError, default_config, load_config, parse_config


def test_defaults():
    c = default_config()
    assert c.device.linewidth_ghz == 7.44
    assert c.device.escape_efficiency == 0.8
    assert c.ring_params().escape_efficiency("s") == pytest.approx(0.8)
    assert c.round_trip() == pytest.approx(0.98961, abs=1e-5)
    assert c.fsr() == pytest.approx(197.53e9, rel=1e-4)
    assert c.frequency_grid().shape == (128, 128)


def test_round_trip_ini():
    c = default_config()
    assert parse_config(c.to_ini()) == c
    c2 = parse_config("[noise]\nseed = 7\n[interference]\nmode = stimulated\n")
    assert c2.noise.seed == 7 and c2.interference.mode == "stimulated"
    assert parse_config(c2.to_ini()) == c2
    assert c2.with_seed(3).noise.seed == 3


@pytest.mark.parametrize("text, match", [
    ("[device]\nfoo = 1\n", r"a\.ini:2: unknown key 'foo' in \[device\]"),
    ("[bogus]\n", r"a\.ini:1: unknown section \[bogus\]"),
    ("[grid]\n\npoints = 12.5\n", r"a\.ini:3: \[grid\.points\] expected an integer"),
    ("[noise]\nseed = 1\n\n\nwindow = 4\n", r"a\.ini:5: \[noise\.window\] must be an odd integer >= 1"),
    ("[interference]\neta = 1.5\n", r"a\.ini:2: \[interference\.eta\]"),
    ("[loss]\nescape_signal = 0\n", r"a\.ini:2: \[loss\.escape_signal\] unphysical escape efficiency"),
    ("[device]\nwaveguide_propagation_phase = maybe\n", r"a\.ini:2: .*boolean"),
    ("[device]\nlinewidth_ghz = nan\n", r"a\.ini:2: .*finite"),
])
def test_line_anchored_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text, "a.ini")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config(tmp_path / "nope.ini")
