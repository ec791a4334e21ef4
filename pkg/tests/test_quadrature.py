import math

import numpy as np
import pytest

from qspet.quadrature import QuadratureError, adaptive_simpson


def test_gaussian_and_lorentzian_closed_forms():
    s = np.array([0.5, 1.0, 2.0])

    def f(x, idx):
        return np.exp(-x[None, :] ** 2 / (2 * s[idx, None] ** 2)) + 1j / (1 + x[None, :] ** 2)

    vals, panels = adaptive_simpson(f, -30, 30, 3, rtol=1e-10)
    exact = s * math.sqrt(2 * math.pi) + 2j * math.atan(30)
    np.testing.assert_allclose(vals, exact, rtol=1e-8)
    assert np.all(panels >= 64) and np.all(panels % 2 == 0)


def test_polynomial_exact_at_min_panels():
    # Simpson is exact for cubics, so the first refinement already agrees
    vals, panels = adaptive_simpson(lambda x, idx: np.broadcast_to(x**3 - x + 1, (len(idx), len(x))), 0, 2, 1)
    assert vals[0] == pytest.approx(4 - 2 + 2, rel=1e-14)
    assert panels[0] == 128


def test_result_independent_of_batching():
    w = np.linspace(0.5, 6, 17)

    def f(x, idx):
        return np.exp(1j * w[idx, None] * x[None, :]) * np.exp(-x[None, :] ** 2)

    all_vals, _ = adaptive_simpson(f, -8, 8, w.size)
    for k in (0, 5, 16):
        one, _ = adaptive_simpson(lambda x, idx: f(x, np.array([k])[idx]), -8, 8, 1)
        assert one[0] == all_vals[k]


def test_non_convergence_reports_diagnostics():
    with pytest.raises(QuadratureError) as exc:
        adaptive_simpson(lambda x, idx: np.exp(1j * 1e5 * x)[None, :].repeat(len(idx), 0), 0, 1, 2, max_panels=256)
    assert exc.value.panels == 256
    assert exc.value.rel_change > 1e-6
    assert list(exc.value.items) == [0, 1]


def test_rejects_odd_panels():
    with pytest.raises(ValueError):
        adaptive_simpson(lambda x, idx: x[None, :], 0, 1, 1, min_panels=7)
