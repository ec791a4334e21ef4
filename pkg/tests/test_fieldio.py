import numpy as np
import pytest

from qspet.fields import ComplexField2D, FrequencyGrid, Interferogram, JspMap, RealField2D, jsp
from qspet.fieldio import load_field, read_pgm, save_field, save_heatmap, to_image, write_pgm
from qspet.noise import CountField

from .conftest import random_field


@pytest.fixture
def g():
    return FrequencyGrid(194e12, 195e12, 40e9, 30e9, 7, 5)


def test_csv_header_and_order(tmp_path, g):
    f = random_field(g, 1)
    csv, js = save_field(f, tmp_path, "f")
    lines = csv.read_text().splitlines()
    assert lines[0] == "nu_s_offset_hz,nu_i_offset_hz,re,im"
    assert len(lines) == 1 + g.n_signal * g.n_idler
    rows = np.loadtxt(csv, delimiter=",", skiprows=1)
    # signal index varies fastest
    np.testing.assert_allclose(rows[: g.n_signal, 0], g.detuning_signal)
    assert np.all(rows[: g.n_signal, 1] == rows[0, 1])
    np.testing.assert_allclose(rows[1, 2] + 1j * rows[1, 3], f.values[1, 0])


def test_round_trips(tmp_path, g):
    c = random_field(g, 2)
    r = RealField2D(g, np.abs(c.values))
    ifg = Interferogram(g, np.abs(c.values) ** 2, theta=0.75, eta=0.3, process="stimulated")
    cnt = CountField(g, np.arange(g.n_signal * g.n_idler).reshape(g.shape), theta=0.25, eta=0.5, process="spontaneous")
    m = jsp(c)
    m2 = JspMap(g, m.phase, m.valid, provenance="stimulated", offset=0.4)
    for k, obj in enumerate((c, r, ifg, cnt, m, m2)):
        _, js = save_field(obj, tmp_path, f"o{k}")
        back = load_field(js)
        assert type(back) is type(obj)
        assert back.grid == obj.grid
        if isinstance(obj, JspMap):
            np.testing.assert_array_equal(back.phase, obj.phase)
            np.testing.assert_array_equal(back.valid, obj.valid)
            assert back.provenance == obj.provenance and back.offset == obj.offset
            assert (back.intensity is None) == (obj.intensity is None)
        else:
            np.testing.assert_array_equal(back.values, obj.values)
        if isinstance(obj, (Interferogram, CountField)):
            assert (back.theta, back.eta, back.process) == (obj.theta, obj.eta, obj.process)


def test_load_rejects_mismatch(tmp_path, g):
    _, js = save_field(random_field(g, 3), tmp_path, "f")
    csv = tmp_path / "f.csv"
    lines = csv.read_text().splitlines()
    csv.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(ValueError, match="expected 35 rows"):
        load_field(js)


def test_pgm(tmp_path, g):
    v = np.arange(g.n_signal * g.n_idler, dtype=float).reshape(g.shape)
    write_pgm(tmp_path / "a.pgm", v)
    img = read_pgm(tmp_path / "a.pgm")
    assert img.shape == (g.n_idler, g.n_signal)
    assert img[-1, 0] == 0 and img[0, -1] == 255
    np.testing.assert_array_equal(img, to_image(v))
    p = save_heatmap(jsp(random_field(g, 4)), tmp_path, "m")
    assert read_pgm(p).dtype == np.uint8
