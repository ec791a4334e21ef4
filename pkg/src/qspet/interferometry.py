"""Two-source interference: pump split, beamsplitter, coincidence and SET fringes.

All constant phases of the circuit (the ``i`` picked up by the ring-arm pump
in the splitting MZI, any fixed phase of the reference JSA) are absorbed into
the calibration of ``theta``. :func:`output_distribution` keeps them explicit
and reproduces :func:`coincidence_probability` on the ``ff`` port pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .fields import ComplexField2D, Interferogram, check_same_grid

SQRT_HALF = 1 / math.sqrt(2)


@dataclass(frozen=True)
class SplitterSetting:
    eta: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")

    def at(self, theta: float) -> "SplitterSetting":
        return SplitterSetting(self.eta, theta)


@dataclass(frozen=True)
class SourceAmplitudes:
    """Superposition weights of the ring (N_R) and waveguide (N_W) pair states."""

    N_R: complex
    N_W: complex

    def __post_init__(self):
        total = abs(self.N_R) ** 2 + abs(self.N_W) ** 2
        if abs(total - 1) > 1e-12:
            raise ValueError(f"|N_R|^2 + |N_W|^2 = {total!r}, expected 1")


def weights_from_eta(eta: float, brightness_ratio: float = 1.0) -> SourceAmplitudes:
    """Pair amplitudes for pump fraction ``eta`` sent to the waveguide.

    SFWM consumes two pump photons, so each source's pair amplitude scales with
    the pump *power* in its arm: n_W ~ eta, n_R ~ (1 - eta) * brightness_ratio.
    """
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not brightness_ratio > 0:
        raise ValueError("brightness_ratio must be positive")
    n_r = (1 - eta) * brightness_ratio
    n_w = eta
    norm = math.hypot(n_r, n_w)
    return SourceAmplitudes(complex(n_r / norm), complex(n_w / norm))


def _coincidence(r, ref, w, theta):
    return 0.25 * np.abs(w.N_R * r * np.exp(2j * theta) + w.N_W * ref) ** 2


def _classical(r, ref, w, theta):
    return 0.25 * np.abs(w.N_R * r * np.exp(1j * theta) + w.N_W * ref) ** 2


def _set(r, ref, w, theta):
    return 0.5 * np.abs(w.N_R * r * np.exp(1j * theta) + 1j * w.N_W * ref) ** 2


def coincidence_probability(phi_r: ComplexField2D, phi_w: ComplexField2D, s: SplitterSetting, w: SourceAmplitudes) -> Interferogram:
    """P = 1/4 |N_R Phi_R e^{2i theta} + N_W Phi_W|^2 (both photons pass the phase shifter)."""
    grid = check_same_grid(phi_r, phi_w)
    return Interferogram(grid, _coincidence(phi_r.values, phi_w.values, w, s.theta), theta=s.theta, eta=s.eta, process="spontaneous")


def classical_fringe(phi_r: ComplexField2D, phi_w: ComplexField2D, s: SplitterSetting, w: SourceAmplitudes) -> Interferogram:
    """Single-photon-equivalent fringe: the same superposition with e^{i theta}."""
    grid = check_same_grid(phi_r, phi_w)
    return Interferogram(grid, _classical(phi_r.values, phi_w.values, w, s.theta), theta=s.theta, eta=s.eta, process="classical")


def set_interference(f_r: ComplexField2D, f_w: ComplexField2D, s: SplitterSetting, w: SourceAmplitudes) -> Interferogram:
    """Seeded-idler intensity at one MZI output, 1/2 |N_R F_R e^{i theta} + i N_W F_W|^2.

    The classical seed fixes the signal phase, so the ring arm accumulates a
    single theta; the beamsplitter cross term contributes the factor i.
    """
    grid = check_same_grid(f_r, f_w)
    return Interferogram(grid, _set(f_r.values, f_w.values, w, s.theta), theta=s.theta, eta=s.eta, process="stimulated")


def beamsplitter_transform(c, d):
    """Balanced beamsplitter on mode amplitudes: (c, d) -> ((c + i d)/sqrt2, (i c + d)/sqrt2)."""
    c = np.asarray(c, dtype=complex)
    d = np.asarray(d, dtype=complex)
    return SQRT_HALF * (c + 1j * d), SQRT_HALF * (1j * c + d)


def output_distribution(phi_r: ComplexField2D, phi_w: ComplexField2D, s: SplitterSetting, w: SourceAmplitudes) -> dict[str, np.ndarray]:
    """Coincidence probabilities for every (signal port, idler port) pair.

    Keys are ``"ee", "ef", "fe", "ff"`` (signal port first). The ring pair
    carries the pump-split phase i^2 = -1 explicitly, under which ``"ff"``
    equals :func:`coincidence_probability`.
    """
    check_same_grid(phi_r, phi_w)
    ring = -1.0 * w.N_R * phi_r.values * np.exp(2j * s.theta)
    ref = w.N_W * phi_w.values
    c_out = beamsplitter_transform(1, 0)
    d_out = beamsplitter_transform(0, 1)
    ports = {"e": 0, "f": 1}
    out = {}
    for ks, xs in ports.items():
        for ki, xi in ports.items():
            amp = ring * c_out[xs] * c_out[xi] + ref * d_out[xs] * d_out[xi]
            out[ks + ki] = np.abs(amp) ** 2
    return out


def visibility_from_amplitudes(a, b):
    """Two-beam fringe visibility 2ab / (a^2 + b^2)."""
    a = np.abs(np.asarray(a, float))
    b = np.abs(np.asarray(b, float))
    return 2 * a * b / (a**2 + b**2)


def amplitude_ratio_for_visibility(v: float) -> float:
    """Amplitude ratio r <= 1 with 2r / (1 + r^2) = v."""
    if not 0 < v <= 1:
        raise ValueError("visibility must lie in (0, 1]")
    return (1 - math.sqrt(1 - v * v)) / v


@dataclass(frozen=True)
class FringeFit:
    """Least-squares sinusoid offset + amplitude * cos(2 pi theta / period + phase)."""

    offset: float
    amplitude: float
    phase: float
    period: float
    residual_rms: float

    @property
    def visibility(self) -> float:
        return abs(self.amplitude) / self.offset

    @property
    def maximum(self) -> float:
        return self.offset + abs(self.amplitude)

    @property
    def minimum(self) -> float:
        return self.offset - abs(self.amplitude)


def _linear_sinusoid(theta, y, k):
    A = np.column_stack([np.ones_like(theta), np.cos(k * theta), np.sin(k * theta)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return coef, float(np.sum(resid**2))


def fit_fringe(theta, values, period: Optional[float] = None) -> FringeFit:
    """Fit a sinusoid to fringe samples; the period is fitted when not given."""
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(values, dtype=float)
    if theta.size < 8:
        raise ValueError("need at least 8 phase samples")
    if period is None:
        span = np.ptp(theta)
        k_lo = np.pi / span  # half a cycle across the samples
        k_hi = np.pi * theta.size / span
        ks = np.linspace(k_lo, k_hi, 4000)
        k0 = ks[int(np.argmin([_linear_sinusoid(theta, y, k)[1] for k in ks]))]
        c0, _ = _linear_sinusoid(theta, y, k0)

        def resid(p):
            c, a, b, k = p
            return c + a * np.cos(k * theta) + b * np.sin(k * theta) - y

        sol = least_squares(resid, x0=[c0[0], c0[1], c0[2], k0], xtol=1e-14, ftol=1e-14, gtol=1e-14)
        c, a, b, k = sol.x
        if k < 0:
            k, b = -k, -b
    else:
        k = 2 * np.pi / period
        (c, a, b), _ = _linear_sinusoid(theta, y, k)
    amp = math.hypot(a, b)
    ph = math.atan2(-b, a)
    rms = float(np.sqrt(np.mean((c + a * np.cos(k * theta) + b * np.sin(k * theta) - y) ** 2)))
    return FringeFit(float(c), amp, ph, float(2 * np.pi / k), rms)


def fringe_visibility(theta, values, period: Optional[float] = None) -> float:
    """(max - min) / (max + min) of the fitted sinusoid."""
    return fit_fringe(theta, values, period).visibility


def pixel_fringe(phi_r: ComplexField2D, phi_w: ComplexField2D, w: SourceAmplitudes, index, theta, kind: str = "coincidence"):
    """Fringe at one pixel ``index=(i_s, i_i)`` over an array of theta values."""
    func = {"coincidence": _coincidence, "classical": _classical, "set": _set}[kind]
    check_same_grid(phi_r, phi_w)
    return func(phi_r.values[index], phi_w.values[index], w, np.asarray(theta, dtype=float))
