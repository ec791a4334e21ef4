"""Physical constants and unit conversions used across the package."""

from __future__ import annotations

import numpy as np

C_LIGHT = 299_792_458.0  # [m/s]

GHZ = 1e9
PS = 1e-12
NM = 1e-9
UM = 1e-6


def wavelength_nm_to_hz(wavelength_nm):
    """Vacuum wavelength [nm] -> optical frequency [Hz]."""
    return C_LIGHT / (np.asarray(wavelength_nm, dtype=float) * NM)


def hz_to_wavelength_nm(nu):
    """Optical frequency [Hz] -> vacuum wavelength [nm]."""
    return C_LIGHT / np.asarray(nu, dtype=float) / NM


def linewidth_pm_to_hz(linewidth_pm, wavelength_nm):
    """Convert a small wavelength linewidth to frequency, dnu = c dlambda / lambda^2."""
    lam = wavelength_nm * NM
    return C_LIGHT * linewidth_pm * 1e-12 / lam**2


def fwhm_to_half_linewidth(fwhm_hz):
    """Map a transmission FWHM [Hz] to the Gamma-bar used in ``2*pi*(nu_k - nu) +/- i*Gamma``.

    |F|^2 drops to half its peak when ``2*pi*|nu_k - nu| = Gamma``, so the
    FWHM in Hz is ``Gamma / pi``.
    """
    return np.pi * fwhm_hz


def half_linewidth_to_fwhm(gamma_bar):
    return gamma_bar / np.pi
