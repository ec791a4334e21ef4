"""Forward models of the two photon-pair sources.

The ring JSAs keep the resonator response factors outside the pump integral:
after the energy-conservation delta removes one pump frequency, the remaining
integral depends on the signal and idler frequencies only through their sum.
It is therefore evaluated once per grid anti-diagonal.

Linewidth convention
--------------------
``Gamma_k`` (Gamma-bar) enters the resonance denominator as
``2*pi*(nu_k - nu) +/- 1j*Gamma_k``. The transmission FWHM in Hz is then
``Gamma_k / pi``; build records with :meth:`RingParams.from_linewidths` when
starting from a measured FWHM such as 7.44 GHz.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fields import ComplexField2D, FrequencyGrid, normalize, wrap_phase
from .quadrature import adaptive_simpson
from .units import C_LIGHT, UM, fwhm_to_half_linewidth

# Fourier-limited time-bandwidth products (intensity FWHMs).
TBP_GAUSSIAN = 2 * math.log(2) / math.pi  # 0.4413
TBP_SECH2 = 4 * math.log(1 + math.sqrt(2)) ** 2 / math.pi**2  # 0.3148
_SECH2_FWHM = 2 * math.acosh(math.sqrt(2))  # FWHM of sech^2(x)

ENVELOPE_EDGE_FLOOR = 1e-6


@dataclass(frozen=True)
class PumpSpectrum:
    """Spectral amplitude of a transform-limited (optionally chirped) pulse.

    Parameters
    ----------
    center : float
        Carrier frequency [Hz].
    duration_fwhm : float
        Intensity FWHM of the pulse [s].
    shape : {"gaussian", "sech2"}
    chirp : float
        Quadratic spectral phase coefficient [rad/Hz^2].
    amplitude_scale : float
        Peak spectral amplitude.
    """

    center: float
    duration_fwhm: float
    shape: str = "gaussian"
    chirp: float = 0.0
    amplitude_scale: float = 1.0

    def __post_init__(self):
        if not self.duration_fwhm > 0:
            raise ValueError("pump duration must be positive")
        if self.shape not in ("gaussian", "sech2"):
            raise ValueError(f"unknown pump shape {self.shape!r}")

    @property
    def spectral_fwhm(self) -> float:
        """FWHM of the spectral intensity |alpha|^2 [Hz]."""
        tbp = TBP_GAUSSIAN if self.shape == "gaussian" else TBP_SECH2
        return tbp / self.duration_fwhm

    def support_halfwidth(self, floor: float = ENVELOPE_EDGE_FLOOR) -> float:
        """Detuning beyond which |alpha| < floor * peak."""
        w = self.spectral_fwhm
        if self.shape == "gaussian":
            # |alpha| = exp(-2 ln2 x^2 / w^2)
            return w * math.sqrt(math.log(1 / floor) / (2 * math.log(2)))
        # |alpha| = sech(c x / w)
        return w * math.acosh(1 / floor) / _SECH2_FWHM


def pump_envelope(p: PumpSpectrum, nu):
    """Complex pump amplitude alpha(nu)."""
    x = np.asarray(nu, dtype=float) - p.center
    w = p.spectral_fwhm
    if p.shape == "gaussian":
        mag = np.exp(-2 * np.log(2) * (x / w) ** 2)
    else:
        mag = 1 / np.cosh(_SECH2_FWHM * x / w)
    env = p.amplitude_scale * mag
    if p.chirp:
        return env * np.exp(1j * p.chirp * x**2)
    return env.astype(complex)


@dataclass(frozen=True)
class RingParams:
    """Resonances, couplings and linewidths of the ring modes p, s, i.

    ``gamma_k`` are complex coupling coefficients (units of sqrt(Gamma)),
    ``Gamma_k`` the half-width half-maximum in the angular convention
    described in the module docstring, ``length`` the geometric length [m].
    """

    nu_p: float
    nu_s: float
    nu_i: float
    gamma_p: complex
    gamma_s: complex
    gamma_i: complex
    Gamma_p: float
    Gamma_s: float
    Gamma_i: float
    length: float

    def __post_init__(self):
        for k in "psi":
            if not getattr(self, f"Gamma_{k}") > 0:
                raise ValueError(f"Gamma_{k} must be positive")
            eff = self.escape_efficiency(k)
            if eff > 1 + 1e-12:
                raise ValueError(f"|gamma_{k}|^2 / (2 Gamma_{k}) = {eff:.4g} exceeds 1")
        if not self.length > 0:
            raise ValueError("ring length must be positive")

    @classmethod
    def from_linewidths(
        cls,
        nu_p: float,
        nu_s: float,
        nu_i: float,
        fwhm_hz,
        length: float,
        escape_efficiency=0.8,
    ) -> "RingParams":
        """Build from transmission FWHMs [Hz] and escape efficiencies.

        ``fwhm_hz`` and ``escape_efficiency`` take a scalar or a (p, s, i)
        triple. Couplings are real and positive with
        ``|gamma|^2 = 2 * Gamma * escape_efficiency``.
        """
        fw = np.broadcast_to(np.asarray(fwhm_hz, dtype=float), (3,))
        ee = np.broadcast_to(np.asarray(escape_efficiency, dtype=float), (3,))
        if np.any(ee <= 0) or np.any(ee > 1):
            raise ValueError("escape efficiency must lie in (0, 1]")
        G = fwhm_to_half_linewidth(fw)
        g = np.sqrt(2 * G * ee)
        return cls(
            float(nu_p), float(nu_s), float(nu_i),
            complex(g[0]), complex(g[1]), complex(g[2]),
            float(G[0]), float(G[1]), float(G[2]),
            float(length),
        )

    def center(self, k: str) -> float:
        return getattr(self, f"nu_{k}")

    def coupling(self, k: str) -> complex:
        return getattr(self, f"gamma_{k}")

    def half_linewidth(self, k: str) -> float:
        return getattr(self, f"Gamma_{k}")

    def escape_efficiency(self, k: str) -> float:
        return abs(self.coupling(k)) ** 2 / (2 * self.half_linewidth(k))


@dataclass(frozen=True)
class WaveguideParams:
    """Straight/spiral waveguide source with a quadratic effective-index model.

    ``n_eff = n1 + n2*(lam - lam0) + n3*(lam - lam0)**2`` with ``lam`` in um.
    ``propagation_phase`` keeps the exp(i dk L / 2) factor (referenced to the
    grid center) instead of the real sinc alone.
    """

    length: float
    group_index: float = 4.181
    n1: float = 2.4473
    n2: float = -1.1327
    n3: float = -0.0440
    lambda0_um: float = 1.55
    propagation_phase: bool = False

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("waveguide length must be positive")

    def n_eff(self, nu):
        lam_um = C_LIGHT / np.asarray(nu, dtype=float) / UM
        d = lam_um - self.lambda0_um
        return self.n1 + self.n2 * d + self.n3 * d**2

    def wavenumber(self, nu):
        nu = np.asarray(nu, dtype=float)
        return 2 * np.pi * nu * self.n_eff(nu) / C_LIGHT


def field_enhancement(r: RingParams, k: str, sign: str, nu):
    """Resonant field enhancement gamma_k^* / (sqrt(L) (2 pi (nu_k - nu) +/- i Gamma_k))."""
    if k not in ("p", "s", "i"):
        raise ValueError(f"mode must be one of p, s, i; got {k!r}")
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    s = 1.0 if sign == "+" else -1.0
    nu = np.asarray(nu, dtype=float)
    den = 2 * np.pi * (r.center(k) - nu) + s * 1j * r.half_linewidth(k)
    return np.conj(r.coupling(k)) / (math.sqrt(r.length) * den)


def _window_halfwidth(p: PumpSpectrum, window_fwhm: float) -> float:
    # 2 % margin keeps the bound strictly inside the floor
    half = max(window_fwhm * p.spectral_fwhm, 1.02 * p.support_halfwidth())
    edge = np.abs(pump_envelope(p, p.center + half)) / p.amplitude_scale
    if edge >= ENVELOPE_EDGE_FLOOR:
        raise ValueError(f"pump envelope {edge:.2e} of peak at integration bound; widen the window")
    return half


def _pump_integral(p, nu_sum, r=None, rtol=1e-6, window_fwhm=5.0, threads=None):
    """Integrate alpha(nu) alpha(S - nu) [F_p-(nu) F_p-(S - nu)] dnu for each S in ``nu_sum``.

    The window is centred on S/2 (u = nu - S/2), so the same abscissae serve
    every anti-diagonal.
    """
    half_sum = 0.5 * np.asarray(nu_sum, dtype=float).ravel()
    H = _window_halfwidth(p, window_fwhm)

    def integrand(u, idx):
        n1 = half_sum[idx, None] + u[None, :]
        n2 = half_sum[idx, None] - u[None, :]
        val = pump_envelope(p, n1) * pump_envelope(p, n2)
        if r is not None:
            val = val * field_enhancement(r, "p", "-", n1) * field_enhancement(r, "p", "-", n2)
        return val

    def run(sub):
        vals, _ = adaptive_simpson(lambda u, idx: integrand(u, sub[idx]), -H, H, sub.size, rtol=rtol)
        return vals

    items = np.arange(half_sum.size)
    if not threads or threads <= 1 or items.size < 2:
        out = run(items)
    else:
        chunks = np.array_split(items, min(threads, items.size))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = np.concatenate(list(pool.map(run, chunks)))
    return out.reshape(np.shape(nu_sum))


def pump_overlap(r: RingParams, p: PumpSpectrum, nu_sum, rtol: float = 1e-6, window_fwhm: float = 5.0, threads=None):
    """The pump integral surviving energy conservation, as a function of nu_s + nu_i."""
    return _pump_integral(p, nu_sum, r=r, rtol=rtol, window_fwhm=window_fwhm, threads=threads)


def pump_autoconvolution(p: PumpSpectrum, nu_sum, rtol: float = 1e-6, window_fwhm: float = 5.0, threads=None):
    """psi(S) = integral of alpha(nu) alpha(S - nu) dnu."""
    return _pump_integral(p, nu_sum, r=None, rtol=rtol, window_fwhm=window_fwhm, threads=threads)


def _sum_axis(g: FrequencyGrid):
    """Unique nu_s + nu_i values of the grid and the inverse index map."""
    off = g.detuning_signal[:, None] + g.detuning_idler[None, :]
    keys, inverse = np.unique(np.round(off, 3), return_inverse=True)
    return g.center_signal + g.center_idler + keys, inverse.reshape(g.shape)


def ring_amplitude(r: RingParams, p: PumpSpectrum, nu_s, nu_i, process: str = "spontaneous", rtol: float = 1e-6):
    """Unnormalised ring JSA at arbitrary (nu_s, nu_i) points (broadcast together).

    For ``process="stimulated"`` ``nu_s`` is the seed frequency.
    """
    nu_s, nu_i = np.broadcast_arrays(np.asarray(nu_s, float), np.asarray(nu_i, float))
    overlap = pump_overlap(r, p, nu_s + nu_i, rtol=rtol)
    sign = "+" if process == "spontaneous" else "-"
    return overlap * np.conj(field_enhancement(r, "s", sign, nu_s)) * np.conj(field_enhancement(r, "i", "+", nu_i))


def _ring_jsa(r, p, g, signal_sign, rtol, threads):
    sums, inv = _sum_axis(g)
    overlap = pump_overlap(r, p, sums, rtol=rtol, threads=threads)[inv]
    fs = np.conj(field_enhancement(r, "s", signal_sign, g.nu_signal))
    fi = np.conj(field_enhancement(r, "i", "+", g.nu_idler))
    return normalize(ComplexField2D(g, overlap * fs[:, None] * fi[None, :]))


def jsa_spontaneous_ring(r: RingParams, p: PumpSpectrum, g: FrequencyGrid, rtol: float = 1e-6, threads: Optional[int] = None) -> ComplexField2D:
    """Normalised JSA of spontaneous FWM in the ring."""
    return _ring_jsa(r, p, g, "+", rtol, threads)


def jsa_stimulated_ring(r: RingParams, p: PumpSpectrum, g: FrequencyGrid, rtol: float = 1e-6, threads: Optional[int] = None) -> ComplexField2D:
    """Normalised stimulated-FWM response; the signal axis is the seed frequency.

    Identical to the spontaneous JSA except the seed enters through F_{s-}
    rather than F_{s+}, which leaves |JSA| unchanged and rotates the phase by
    ``-2 atan2(Gamma_s, 2 pi (nu_s_res - nu_seed))``.
    """
    return _ring_jsa(r, p, g, "-", rtol, threads)


def stimulated_phase_shift(r: RingParams, nu_seed):
    """arg(Phi_St) - arg(Phi_Sp) at seed frequency ``nu_seed`` (wrapped)."""
    return wrap_phase(-2 * np.arctan2(r.Gamma_s, 2 * np.pi * (r.nu_s - np.asarray(nu_seed, float))))


def phase_mismatch(w: WaveguideParams, nu_s, nu_i):
    """Degenerate-pump mismatch dk = 2 k((nu_s + nu_i)/2) - k(nu_s) - k(nu_i) [1/m]."""
    nu_s = np.asarray(nu_s, float)
    nu_i = np.asarray(nu_i, float)
    return 2 * w.wavenumber(0.5 * (nu_s + nu_i)) - w.wavenumber(nu_s) - w.wavenumber(nu_i)


def jsa_waveguide(w: WaveguideParams, p: PumpSpectrum, g: FrequencyGrid, rtol: float = 1e-6, threads: Optional[int] = None) -> ComplexField2D:
    """Normalised waveguide JSA: pump autoconvolution times the phase-matching sinc."""
    sums, inv = _sum_axis(g)
    psi = pump_autoconvolution(p, sums, rtol=rtol, threads=threads)[inv]
    dk = phase_mismatch(w, g.nu_signal[:, None], g.nu_idler[None, :])
    x = dk * w.length / 2
    pm = np.sinc(x / np.pi).astype(complex)
    if w.propagation_phase:
        x0 = phase_mismatch(w, g.center_signal, g.center_idler) * w.length / 2
        pm = pm * np.exp(1j * (x - x0))
    return normalize(ComplexField2D(g, psi * pm))
