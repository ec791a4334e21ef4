"""Frequency grids and two-dimensional spectral fields.

Every array in this package is indexed ``[signal, idler]``. Grids are uniform
and rectangular and carry absolute center frequencies, so detunings can be
rebuilt from the record alone.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np


class DegenerateFieldError(ValueError):
    pass


class GridMismatchError(ValueError):
    pass


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform signal x idler detuning grid.

    Parameters
    ----------
    center_signal, center_idler : float
        Absolute frequencies at the grid centers [Hz].
    span_signal, span_idler : float
        Full width of each axis [Hz]; the first and last samples sit at +/- span/2.
    n_signal, n_idler : int
        Number of samples per axis (>= 2).
    """

    center_signal: float
    center_idler: float
    span_signal: float
    span_idler: float
    n_signal: int
    n_idler: int

    def __post_init__(self):
        if int(self.n_signal) < 2 or int(self.n_idler) < 2:
            raise ValueError(f"grid needs at least 2 points per axis, got ({self.n_signal}, {self.n_idler})")
        if not (self.span_signal > 0 and self.span_idler > 0):
            raise ValueError("grid spans must be positive")
        object.__setattr__(self, "n_signal", int(self.n_signal))
        object.__setattr__(self, "n_idler", int(self.n_idler))

    @classmethod
    def square(cls, center_signal: float, center_idler: float, span: float, n: int) -> "FrequencyGrid":
        return cls(center_signal, center_idler, span, span, n, n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_signal, self.n_idler)

    @property
    def step_signal(self) -> float:
        return self.span_signal / (self.n_signal - 1)

    @property
    def step_idler(self) -> float:
        return self.span_idler / (self.n_idler - 1)

    @property
    def cell_area(self) -> float:
        return self.step_signal * self.step_idler

    @property
    def detuning_signal(self) -> np.ndarray:
        return -self.span_signal / 2 + np.arange(self.n_signal) * self.step_signal

    @property
    def detuning_idler(self) -> np.ndarray:
        return -self.span_idler / 2 + np.arange(self.n_idler) * self.step_idler

    @property
    def nu_signal(self) -> np.ndarray:
        return self.center_signal + self.detuning_signal

    @property
    def nu_idler(self) -> np.ndarray:
        return self.center_idler + self.detuning_idler

    def detuning_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.detuning_signal, self.detuning_idler, indexing="ij")

    def to_dict(self) -> dict:
        return {
            "center_signal_hz": float(self.center_signal),
            "center_idler_hz": float(self.center_idler),
            "span_signal_hz": float(self.span_signal),
            "span_idler_hz": float(self.span_idler),
            "n_signal": self.n_signal,
            "n_idler": self.n_idler,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrequencyGrid":
        return cls(
            float(d["center_signal_hz"]),
            float(d["center_idler_hz"]),
            float(d["span_signal_hz"]),
            float(d["span_idler_hz"]),
            int(d["n_signal"]),
            int(d["n_idler"]),
        )


def check_same_grid(*fields_) -> FrequencyGrid:
    grid = fields_[0].grid
    for f in fields_[1:]:
        if f.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {f.grid}")
    return grid


@dataclass(frozen=True)
class ComplexField2D:
    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values, complex)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", vals)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.cell_area)

    def __mul__(self, scalar):
        return ComplexField2D(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class RealField2D:
    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values, float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Interferogram(RealField2D):
    """Non-negative detection probability (or intensity) map at one phase setting.

    ``process`` is ``"spontaneous"`` for biphoton coincidences, ``"stimulated"``
    for seeded idler intensity and ``"classical"`` for the single-photon
    reference fringe.
    """

    theta: float = 0.0
    eta: float = 0.5
    process: str = "spontaneous"

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.values < 0):
            raise ValueError("interferogram values must be non-negative")

    def with_values(self, values) -> "Interferogram":
        return replace(self, values=values)


@dataclass(frozen=True)
class JspMap:
    """Wrapped phase map with a validity mask.

    ``intensity`` is an optional weighting used to draw confidence contours
    (the JSI for maps taken directly from a JSA, the squared interference
    amplitude for maps extracted from interferograms). ``offset`` records a
    known constant phase included in ``phase``.
    """

    grid: FrequencyGrid
    phase: np.ndarray
    valid: np.ndarray
    provenance: str = "spontaneous"
    intensity: Optional[np.ndarray] = None
    offset: float = 0.0

    def __post_init__(self):
        phase = _frozen(self.phase, float)
        valid = _frozen(self.valid, bool)
        if phase.shape != self.grid.shape or valid.shape != self.grid.shape:
            raise ValueError("phase/valid shape does not match grid")
        if self.provenance not in ("spontaneous", "stimulated", "reference"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "valid", valid)
        if self.intensity is not None:
            inten = _frozen(self.intensity, float)
            if inten.shape != self.grid.shape:
                raise ValueError("intensity shape does not match grid")
            object.__setattr__(self, "intensity", inten)

    def intensity_field(self) -> RealField2D:
        if self.intensity is None:
            raise ValueError("phase map carries no intensity for contouring")
        return RealField2D(self.grid, self.intensity)

    def centered(self) -> "JspMap":
        """Subtract the circular mean of the valid pixels (shape-only comparison)."""
        mean = circular_mean(self.phase[self.valid])
        return replace(self, phase=wrap_phase(self.phase - mean), offset=float(wrap_phase(self.offset - mean)))


def wrap_phase(phi):
    """Wrap to the principal branch (-pi, pi]."""
    phi = np.asarray(phi, dtype=float)
    out = np.pi - np.mod(np.pi - phi, 2 * np.pi)
    return out if out.ndim else float(out)


def circular_mean(phi) -> float:
    phi = np.asarray(phi, dtype=float)
    if phi.size == 0:
        raise ValueError("circular mean of an empty set")
    return float(np.angle(np.mean(np.exp(1j * phi))))


def normalize(f: ComplexField2D) -> ComplexField2D:
    """Scale ``f`` to unit norm, sum |v|^2 dnu_s dnu_i = 1, keeping every phase."""
    n2 = f.norm_squared()
    if not np.isfinite(n2) or n2 <= 0:
        raise DegenerateFieldError("degenerate field")
    return ComplexField2D(f.grid, f.values / np.sqrt(n2))


def jsi(f: ComplexField2D) -> RealField2D:
    return RealField2D(f.grid, np.abs(f.values) ** 2)


def jsp(f: ComplexField2D, floor: float = 0.01, provenance: str = "spontaneous") -> JspMap:
    """Principal argument of ``f``; pixels below ``floor * max|f|^2`` are flagged invalid."""
    if floor < 0:
        raise ValueError("floor must be >= 0")
    inten = np.abs(f.values) ** 2
    phase = wrap_phase(np.angle(f.values))
    valid = inten >= floor * inten.max()
    if inten.max() == 0:
        valid = np.zeros_like(valid)
    return JspMap(f.grid, phase, valid, provenance=provenance, intensity=inten)


def contour_mask(intensity: RealField2D, levels: Sequence[float]) -> list[np.ndarray]:
    """One boolean mask per level, true where ``intensity >= level * max``."""
    levels = list(levels)
    if not levels:
        raise ValueError("at least one contour level is required")
    peak = float(np.max(intensity.values))
    if not peak > 0:
        raise ValueError("intensity maximum must be positive")
    masks = []
    for lvl in levels:
        if not 0 < lvl < 1:
            raise ValueError(f"contour level must lie in (0, 1), got {lvl}")
        masks.append(intensity.values >= lvl * peak)
    return masks


def resample_nearest(f, grid: FrequencyGrid):
    """Nearest-neighbour resampling of a field onto ``grid`` (absolute frequencies)."""
    src = f.grid
    i = np.rint((grid.nu_signal - src.nu_signal[0]) / src.step_signal).astype(int)
    j = np.rint((grid.nu_idler - src.nu_idler[0]) / src.step_idler).astype(int)
    i = np.clip(i, 0, src.n_signal - 1)
    j = np.clip(j, 0, src.n_idler - 1)
    return type(f)(grid, f.values[np.ix_(i, j)]) if not isinstance(f, Interferogram) else replace(
        f, grid=grid, values=f.values[np.ix_(i, j)]
    )


CONFIDENCE_LEVELS = (0.25, 0.10, 0.01)
