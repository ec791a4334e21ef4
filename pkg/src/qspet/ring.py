"""All-pass ring lineshapes with a tunable (MZI) coupler, and their fitting.

The all-pass transmission

    T(phi) = (a^2 - 2 t a cos(phi) + t^2) / (1 - 2 t a cos(phi) + (t a)^2)

is symmetric under t <-> a, so an intensity spectrum alone cannot tell
over- from under-coupling. :func:`fit_lineshape` resolves the pair with a
known round-trip amplitude when one is given, otherwise with ``branch``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .units import C_LIGHT

CRITICAL_TOLERANCE = 1e-3
ER_CAP_DB = 60.0


@dataclass(frozen=True)
class CouplerSetting:
    """Self-coupling amplitude ``t`` and round-trip amplitude ``a``."""

    t: float
    a: float

    def __post_init__(self):
        if not 0 <= self.t <= 1:
            raise ValueError(f"self-coupling t must lie in [0, 1], got {self.t}")
        if not 0 < self.a <= 1:
            raise ValueError(f"round-trip amplitude a must lie in (0, 1], got {self.a}")

    @property
    def regime(self) -> str:
        return classify_regime(self.t, self.a)


@dataclass(frozen=True)
class VoltageCalibration:
    """Heater voltage -> MZI coupler self-coupling.

    The thermal phase grows quadratically with voltage,
    ``phase = phase0 + phase_per_v2 * V**2``, and a balanced MZI coupler
    transmits ``t = |cos(phase / 2)|`` to the bus.
    """

    phase0: float = 0.0
    phase_per_v2: float = 0.1

    def self_coupling(self, volts) -> np.ndarray:
        phase = self.phase0 + self.phase_per_v2 * np.asarray(volts, float) ** 2
        return np.abs(np.cos(phase / 2))

    def setting(self, volts: float, a: float) -> CouplerSetting:
        return CouplerSetting(float(self.self_coupling(volts)), a)


def classify_regime(t: float, a: float, tol: float = CRITICAL_TOLERANCE) -> str:
    if abs(t - a) < tol:
        return "critical"
    return "over" if t < a else "under"


def transmission(c: CouplerSetting, phi):
    """Through-port intensity transmission at round-trip phase ``phi``."""
    t, a = c.t, c.a
    cphi = np.cos(np.asarray(phi, float))
    return (a * a - 2 * t * a * cphi + t * t) / (1 - 2 * t * a * cphi + (t * a) ** 2)


def fwhm_phase(t: float, a: float) -> float:
    """Full width (in round-trip phase) at half the dip depth below unity."""
    ta = t * a
    s = (1 - ta) / (2 * math.sqrt(ta))
    if s >= 1:
        return 2 * math.pi
    return 4 * math.asin(s)


def on_resonance_transmission(t: float, a: float) -> float:
    return ((a - t) / (1 - t * a)) ** 2


def extinction_ratio_db(t: float, a: float, cap_db: float = ER_CAP_DB) -> float:
    tmin = on_resonance_transmission(t, a)
    if tmin <= 10 ** (-cap_db / 10):
        return cap_db
    return -10 * math.log10(tmin)


def quality_factor(center_hz: float, fwhm_hz: float) -> float:
    return center_hz / fwhm_hz


def free_spectral_range(length: float, group_index: float) -> float:
    return C_LIGHT / (group_index * length)


def round_trip_amplitude(loss_db_per_cm: float, length: float) -> float:
    """Round-trip field amplitude for a propagation loss in dB/cm over ``length`` [m]."""
    return 10 ** (-loss_db_per_cm * length * 100 / 20)


def coupler_for_linewidth(fwhm_hz: float, fsr_hz: float, a: float, branch: str = "over") -> CouplerSetting:
    """Self-coupling giving the requested FWHM at fixed loss ``a``."""
    s = math.sin(math.pi * fwhm_hz / fsr_hz / 2)
    # (1 - x) / (2 sqrt(x)) = s  ->  sqrt(x) = sqrt(s^2 + 1) - s
    ta = (math.sqrt(s * s + 1) - s) ** 2
    t = ta / a
    if t > 1 or (branch == "over" and t > a) or (branch == "under" and t < a):
        raise ValueError("no coupler setting on that branch gives this linewidth")
    return CouplerSetting(t, a)


@dataclass(frozen=True)
class LineshapeFit:
    center: float
    fwhm: float
    q_factor: float
    extinction_ratio_db: float
    regime: str
    t: float
    a: float
    residual_rms: float

    def to_dict(self) -> dict:
        return asdict(self)


class LineshapeFitError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def _half_depth_width(nu, T):
    """Crude FWHM of the dip from the data, for the initial guess."""
    tmin = T.min()
    level = 0.5 * (tmin + 1.0)
    below = np.flatnonzero(T <= level)
    return max(nu[below[-1]] - nu[below[0]], abs(nu[1] - nu[0]))


def fit_lineshape(
    nu,
    T,
    fsr: float,
    a_known: Optional[float] = None,
    branch: str = "over",
    er_cap_db: float = ER_CAP_DB,
    critical_tol: float = CRITICAL_TOLERANCE,
    min_samples_per_fwhm: int = 10,
) -> LineshapeFit:
    """Least-squares fit of one all-pass resonance dip.

    Parameters
    ----------
    nu, T : array_like
        Optical frequency [Hz] and intensity transmission.
    fsr : float
        Free spectral range [Hz], maps detuning to round-trip phase.
    a_known : float, optional
        Round-trip amplitude, e.g. from the propagation loss; picks which
        of the two fitted amplitudes is ``a``.
    branch : {"over", "under"}
        Assignment used when ``a_known`` is not given.
    """
    nu = np.asarray(nu, float)
    T = np.asarray(T, float)
    order = np.argsort(nu)
    nu, T = nu[order], T[order]
    if T.min() > 0.9 * T.max():
        raise LineshapeFitError("no resonance dip found in spectrum")
    if branch not in ("over", "under"):
        raise ValueError("branch must be 'over' or 'under'")

    nu_ref = nu[int(np.argmin(T))]
    scale = 2 * math.pi / fsr

    # initial guess from depth and width
    w0 = _half_depth_width(nu, T)
    s = min(math.sin(scale * w0 / 4), 0.999)
    ta0 = (math.sqrt(s * s + 1) - s) ** 2
    diff0 = math.sqrt(max(T.min(), 0.0)) * (1 - ta0)
    sum0 = math.sqrt(diff0**2 + 4 * ta0)
    hi0 = min((sum0 + diff0) / 2, 1.0)
    lo0 = min(ta0 / hi0, hi0)

    def model(p):
        x, y, d = p
        return transmission(CouplerSetting(min(x, 1.0), min(y, 1.0)), scale * (nu - nu_ref - d))

    def resid(p):
        return model(p) - T

    sol = least_squares(
        resid,
        x0=[lo0, hi0, 0.0],
        bounds=([1e-6, 1e-6, -w0], [1.0, 1.0, w0]),
        x_scale=[1e-3, 1e-3, w0 / 10],
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=20000,
    )
    rms = float(np.sqrt(np.mean(sol.fun**2)))
    if not sol.success or rms > 1e-2 * max(T.max() - T.min(), 1e-12):
        raise LineshapeFitError(f"lineshape fit did not converge (rms residual {rms:.3e})", residual=rms)
    x, y, d = sol.x
    lo, hi = sorted((float(x), float(y)))
    if a_known is not None:
        t, a = (lo, hi) if abs(hi - a_known) <= abs(lo - a_known) else (hi, lo)
    else:
        t, a = (lo, hi) if branch == "over" else (hi, lo)

    center = float(nu_ref + d)
    fwhm = fwhm_phase(t, a) / scale
    n_in = int(np.count_nonzero(np.abs(nu - center) <= fwhm / 2))
    if n_in < min_samples_per_fwhm:
        raise LineshapeFitError(f"only {n_in} samples inside the FWHM (need {min_samples_per_fwhm})", residual=rms)
    return LineshapeFit(
        center=center,
        fwhm=float(fwhm),
        q_factor=quality_factor(center, fwhm),
        extinction_ratio_db=extinction_ratio_db(t, a, er_cap_db),
        regime=classify_regime(t, a, critical_tol),
        t=t,
        a=a,
        residual_rms=rms,
    )


def synthetic_spectrum(c: CouplerSetting, fsr: float, center: float, n: int = 801, span_fwhm: float = 10.0):
    """Sample T(nu) over ``span_fwhm`` linewidths around ``center`` (at most one FSR)."""
    width = min(span_fwhm * fwhm_phase(c.t, c.a) * fsr / (2 * math.pi), fsr)
    nu = center + np.linspace(-width / 2, width / 2, n)
    return nu, transmission(c, 2 * math.pi * (nu - center) / fsr)


def regime_sweep(
    settings: Sequence[CouplerSetting],
    fsr: float,
    center: float,
    n: int = 801,
    span_fwhm: float = 10.0,
) -> list[LineshapeFit]:
    """Synthesise and fit one spectrum per coupler setting (loss known per setting)."""
    fits = []
    for c in settings:
        nu, T = synthetic_spectrum(c, fsr, center, n, span_fwhm)
        fits.append(fit_lineshape(nu, T, fsr, a_known=c.a))
    return fits
