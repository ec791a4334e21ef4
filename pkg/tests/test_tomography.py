import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qspet.fields import ComplexField2D, FrequencyGrid, Interferogram, JspMap, jsp, normalize, wrap_phase
from qspet.sources import stimulated_phase_shift
from qspet.tomography import (
    SET_PHASE_OFFSET,
    SPONTANEOUS_THETAS,
    STIMULATED_THETAS,
    TomographyRun,
    compare_jsp,
    confidence_masks,
    extract_jsp,
    remove_offset,
    synthesize_run,
)

from .conftest import random_field

G = FrequencyGrid(1.9e14, 1.8e14, 10e9, 10e9, 21, 21)


def _gauss(grid=G):
    ds, di = grid.detuning_mesh()
    return np.exp(-(ds**2 + di**2) / (2 * 3e9**2))


def _flat_ref(grid=G):
    return normalize(ComplexField2D(grid, np.ones(grid.shape)))


def _valid_err(m: JspMap, target):
    return np.abs(wrap_phase(m.phase - target))[m.valid]


def test_canonical_theta_sets():
    r = normalize(ComplexField2D(G, _gauss()))
    sp = synthesize_run(r, _flat_ref(), 0.5)
    st_ = synthesize_run(r, _flat_ref(), 0.5, "stimulated")
    np.testing.assert_allclose(sp.thetas, [0, np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    np.testing.assert_allclose(st_.thetas, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert SPONTANEOUS_THETAS == tuple(sp.thetas) and STIMULATED_THETAS == tuple(st_.thetas)
    assert st_.interferograms[0].process == "stimulated"


def test_run_invariants():
    r = normalize(ComplexField2D(G, _gauss()))
    run = synthesize_run(r, _flat_ref(), 0.5)
    with pytest.raises(ValueError):
        TomographyRun(run.interferograms[:3])
    with pytest.raises(ValueError):
        TomographyRun(run.interferograms, mode="stimulated")
    shuffled = TomographyRun.from_interferograms(run.interferograms[::-1], "spontaneous")
    assert shuffled.thetas == run.thetas
    with pytest.raises(ValueError):
        synthesize_run(r, _flat_ref(), 0.5, mode="other")


def test_balanced_identical_sources_null_at_half_pi():
    f = normalize(ComplexField2D(G, _gauss()))
    run = synthesize_run(f, f, 0.5)
    assert np.max(run.interferograms[2].values) < 1e-25


@pytest.mark.parametrize("phase,want", [(0.0, 0.0), (np.pi / 2, np.pi / 2)])
def test_constant_phase_examples(phase, want):
    r = normalize(ComplexField2D(G, _gauss() * np.exp(1j * phase)))
    m = extract_jsp(synthesize_run(r, _flat_ref(), 0.5))
    assert m.valid.any()
    assert np.max(_valid_err(m, want)) < 1e-9


@pytest.mark.parametrize("eta", [0.2, 0.5, 0.8])
def test_linear_ramp_recovered(eta):
    ds, di = G.detuning_mesh()
    target = 0.9e-9 * ds - 0.4e-9 * di
    r = normalize(ComplexField2D(G, _gauss() * np.exp(1j * target)))
    m = extract_jsp(synthesize_run(r, _flat_ref(), eta))
    assert m.valid.sum() > 0.5 * m.valid.size
    assert np.max(_valid_err(m, target)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(phi0=st.floats(-np.pi, np.pi), seed=st.integers(0, 300))
def test_reference_phase_shift(phi0, seed):
    r = random_field(G, seed)
    w = _flat_ref()
    a = extract_jsp(synthesize_run(r, w, 0.5))
    b = extract_jsp(synthesize_run(r, w * np.exp(1j * phi0), 0.5))
    sel = a.valid & b.valid
    assert np.max(np.abs(wrap_phase(b.phase - a.phase + phi0))[sel]) < 1e-8


def test_stimulated_offset_is_constant(device, small_grid):
    from qspet.sources import jsa_stimulated_ring, jsa_waveguide

    r, p, w = device
    st_ = jsa_stimulated_ring(r, p, small_grid)
    wg = jsa_waveguide(w, p, small_grid)
    m = extract_jsp(synthesize_run(st_, wg, 0.5, "stimulated"))
    assert m.offset == SET_PHASE_OFFSET
    d = wrap_phase(m.phase - np.angle(st_.values))[m.valid]
    assert np.max(np.abs(wrap_phase(d - SET_PHASE_OFFSET))) < 1e-9
    clean = remove_offset(m)
    assert clean.offset == 0.0
    assert np.max(np.abs(wrap_phase(clean.phase - np.angle(st_.values))[m.valid])) < 1e-9


def test_floor_marks_degenerate_pixels():
    v = _gauss()
    v[0, :] = 0
    r = normalize(ComplexField2D(G, v))
    w = normalize(ComplexField2D(G, v))
    m = extract_jsp(synthesize_run(r, w, 0.5))
    assert not m.valid[0].any()
    assert m.valid[10, 10]
    run = TomographyRun(tuple(Interferogram(G, np.zeros(G.shape), theta=t) for t in SPONTANEOUS_THETAS))
    assert not extract_jsp(run).valid.any()
    with pytest.raises(ValueError):
        extract_jsp(run, floor=-1)


def test_compare_examples():
    inten = _gauss() ** 2
    a = JspMap(G, wrap_phase(np.linspace(-3, 3, G.n_signal)[:, None] * np.ones(G.shape)), np.ones(G.shape, bool), intensity=inten)
    rep = compare_jsp(a, a)
    assert [lv.level for lv in rep.levels] == [0.25, 0.10, 0.01]
    assert all(lv.rms == 0 for lv in rep.levels)
    assert all(lv.circular_correlation == pytest.approx(1) for lv in rep.levels)
    b = JspMap(G, wrap_phase(a.phase + np.pi), a.valid, intensity=inten)
    assert compare_jsp(a, b).by_level(0.1).rms == pytest.approx(np.pi)
    none = JspMap(G, a.phase, np.zeros(G.shape, bool), intensity=inten)
    with pytest.raises(ValueError, match="no overlapping valid region"):
        compare_jsp(a, none)
    d = rep.to_dict()
    assert set(d["levels"][0]) == {"level", "n_pixels", "rms_rad", "max_abs_rad", "mean_rad", "circular_correlation"}


def test_compare_spontaneous_vs_stimulated_matches_law(device, grid, jsas):
    r, _, _ = device
    a, b = jsp(jsas["ring"]), jsp(jsas["stim"], provenance="stimulated")
    masks = confidence_masks(a.intensity_field())
    rep = compare_jsp(a, b, masks)
    law = np.broadcast_to(stimulated_phase_shift(r, grid.nu_signal)[:, None], grid.shape)
    sel = masks[0.1] & a.valid & b.valid
    want = math.sqrt(np.mean(law[sel] ** 2))
    assert rep.by_level(0.1).rms == pytest.approx(want, rel=1e-9)
