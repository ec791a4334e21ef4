"""Measurement realism: filter response, Poisson coincidence counts, smoothing."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import ndimage
from scipy.special import erf

from .fields import FrequencyGrid, Interferogram, RealField2D
from .tomography import TomographyRun

DEFAULT_SIGMA_PIXELS = 1.0
DEFAULT_WINDOW = 3
BOUNDARY_MODE = "reflect"  # half-sample mirror: d c b a | a b c d | d c b a


@dataclass(frozen=True)
class NoiseConfig:
    pairs_per_setting: float
    seed: int = 0
    dark_rate_fraction: float = 0.0

    def __post_init__(self):
        if self.pairs_per_setting < 0:
            raise ValueError("pairs_per_setting must be >= 0")
        if self.dark_rate_fraction < 0:
            raise ValueError("dark_rate_fraction must be >= 0")


@dataclass(frozen=True)
class FilterResponse:
    """Spectral response of one tunable on-chip filter."""

    shape: str = "lorentzian"
    fwhm: float = 1.25e9

    def __post_init__(self):
        if self.shape not in ("lorentzian", "gaussian"):
            raise ValueError(f"unknown filter shape {self.shape!r}")
        if not self.fwhm > 0:
            raise ValueError("filter FWHM must be positive")

    def cdf(self, x):
        x = np.asarray(x, float)
        if self.shape == "lorentzian":
            return 0.5 + np.arctan(2 * x / self.fwhm) / np.pi
        sigma = self.fwhm / (2 * math.sqrt(2 * math.log(2)))
        return 0.5 * (1 + erf(x / (sigma * math.sqrt(2))))


def filter_kernel(f: FilterResponse, step: float, n: int) -> np.ndarray:
    """Pixel-integrated, unit-sum kernel covering +/- (n - 1) samples."""
    k = np.arange(-(n - 1), n)
    w = f.cdf((k + 0.5) * step) - f.cdf((k - 0.5) * step)
    return w / w.sum()


def apply_instrument_response(P: Interferogram, f_s: FilterResponse, f_i: FilterResponse) -> Interferogram:
    """Separable convolution of an interferogram with the signal/idler filter responses."""
    g = P.grid
    if f_s.fwhm >= g.span_signal or f_i.fwhm >= g.span_idler:
        raise ValueError("filter FWHM must be smaller than the grid span")
    out = ndimage.convolve1d(P.values, filter_kernel(f_s, g.step_signal, g.n_signal), axis=0, mode=BOUNDARY_MODE)
    out = ndimage.convolve1d(out, filter_kernel(f_i, g.step_idler, g.n_idler), axis=1, mode=BOUNDARY_MODE)
    return replace(P, values=np.clip(out, 0, None))


@dataclass(frozen=True)
class CountField:
    """Integer coincidence counts on a grid at one phase setting."""

    grid: FrequencyGrid
    values: np.ndarray
    theta: float = 0.0
    eta: float = 0.5
    process: str = "spontaneous"

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.int64, copy=True)
        if vals.shape != self.grid.shape:
            raise ValueError("counts shape does not match grid")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def as_interferogram(self) -> Interferogram:
        return Interferogram(self.grid, self.values.astype(float), theta=self.theta, eta=self.eta, process=self.process)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def expected_counts(P: RealField2D, n: NoiseConfig) -> np.ndarray:
    total = float(np.sum(P.values))
    if total <= 0 or n.pairs_per_setting == 0:
        return np.zeros(P.grid.shape)
    lam = n.pairs_per_setting * P.values / total
    return lam + n.dark_rate_fraction * lam.max()


def sample_counts(P: Interferogram, n: NoiseConfig, stream: int = 0) -> CountField:
    """Poisson counts with mean ``pairs_per_setting * P / sum(P)`` plus a flat background.

    ``stream`` selects an independent random stream (one per phase setting).
    """
    if np.any(P.values < 0):
        raise ValueError("interferogram must be non-negative")
    lam = expected_counts(P, n)
    counts = _rng(n.seed, stream).poisson(lam)
    return CountField(P.grid, counts, theta=P.theta, eta=P.eta, process=P.process)


def _apply(field, func):
    def run(v):
        out = func(v)
        # running-sum filters leave ~1e-17 negatives on non-negative data
        return np.maximum(out, 0) if v.min() >= 0 else out

    if isinstance(field, np.ndarray):
        return run(np.asarray(field, float))
    return replace(field, values=run(np.asarray(field.values, float)))


def gaussian_filter2d(field, sigma_pixels: float = DEFAULT_SIGMA_PIXELS):
    """Gaussian low-pass with mirror boundaries; sigma 0 is the identity."""
    if sigma_pixels < 0:
        raise ValueError("sigma must be >= 0")
    if sigma_pixels == 0:
        return field
    return _apply(field, lambda v: ndimage.gaussian_filter(v, sigma_pixels, mode=BOUNDARY_MODE))


def moving_average2d(field, window: int = DEFAULT_WINDOW):
    """Square boxcar average with mirror boundaries; ``window`` odd and >= 1."""
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 1")
    if window == 1:
        return field
    return _apply(field, lambda v: ndimage.uniform_filter(v, window, mode=BOUNDARY_MODE))


def smooth(field, sigma_pixels: float = DEFAULT_SIGMA_PIXELS, window: int = DEFAULT_WINDOW):
    """Gaussian filter followed by the moving average."""
    return moving_average2d(gaussian_filter2d(field, sigma_pixels), window)


@dataclass(frozen=True)
class MeasuredRun:
    counts: tuple
    noisy: TomographyRun
    smoothed: TomographyRun


def measure_run(
    run: TomographyRun,
    noise: NoiseConfig,
    filters: Optional[tuple[FilterResponse, FilterResponse]] = None,
    sigma_pixels: float = DEFAULT_SIGMA_PIXELS,
    window: int = DEFAULT_WINDOW,
) -> MeasuredRun:
    """Filter (optional), count and smooth each interferogram of a run.

    Stream ``k`` of the seed drives setting ``k``, so settings are sampled
    independently and reproducibly.
    """
    ifgs = run.interferograms
    if filters is not None:
        ifgs = tuple(apply_instrument_response(i, *filters) for i in ifgs)
    counts = tuple(sample_counts(i, noise, stream=k) for k, i in enumerate(ifgs))
    noisy = tuple(c.as_interferogram() for c in counts)
    smoothed = tuple(smooth(i, sigma_pixels, window) for i in noisy)
    settings = dict(run.settings, pairs_per_setting=noise.pairs_per_setting, seed=noise.seed)
    return MeasuredRun(
        counts,
        TomographyRun(noisy, mode=run.mode, eta=run.eta, settings=settings),
        TomographyRun(smoothed, mode=run.mode, eta=run.eta, settings=dict(settings, sigma_pixels=sigma_pixels, window=window)),
    )
