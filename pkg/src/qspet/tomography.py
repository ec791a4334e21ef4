"""Four-setting phase tomography and phase-map comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .fields import (
    CONFIDENCE_LEVELS,
    ComplexField2D,
    Interferogram,
    JspMap,
    RealField2D,
    check_same_grid,
    contour_mask,
    wrap_phase,
)
from .interferometry import (
    SourceAmplitudes,
    SplitterSetting,
    coincidence_probability,
    set_interference,
    weights_from_eta,
)

PI = math.pi
# Order matters: positions (0, 1, 2, 3) enter atan2(P3 - P1, P0 - P2).
SPONTANEOUS_THETAS = (0.0, PI / 4, PI / 2, 3 * PI / 4)
STIMULATED_THETAS = (0.0, PI / 2, PI, 3 * PI / 2)
CANONICAL_THETAS = {"spontaneous": SPONTANEOUS_THETAS, "stimulated": STIMULATED_THETAS}

# The i on the reference term of the seeded interference rotates the
# recovered phase by a constant -pi/2.
SET_PHASE_OFFSET = -PI / 2

DEFAULT_VALIDITY_FLOOR = 1e-4


@dataclass(frozen=True)
class TomographyRun:
    """Four interferograms in canonical theta order plus the settings that made them."""

    interferograms: tuple
    mode: str = "spontaneous"
    eta: float = 0.5
    settings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in CANONICAL_THETAS:
            raise ValueError(f"unknown mode {self.mode!r}")
        ifg = tuple(self.interferograms)
        if len(ifg) != 4:
            raise ValueError(f"a run needs exactly 4 interferograms, got {len(ifg)}")
        check_same_grid(*ifg)
        want = CANONICAL_THETAS[self.mode]
        got = [i.theta for i in ifg]
        if not np.allclose(got, want, atol=1e-12, rtol=0):
            raise ValueError(f"{self.mode} run needs theta {want}, got {tuple(got)}")
        object.__setattr__(self, "interferograms", ifg)

    @classmethod
    def from_interferograms(cls, items: Sequence[Interferogram], mode: str, **kw) -> "TomographyRun":
        """Order an arbitrary collection of four interferograms by the mode's theta set."""
        want = CANONICAL_THETAS[mode]
        ordered = []
        for t in want:
            hits = [i for i in items if abs(wrap_phase(i.theta - t)) < 1e-9]
            if len(hits) != 1:
                raise ValueError(f"expected one interferogram at theta={t:.6f}, found {len(hits)}")
            ordered.append(hits[0])
        eta = kw.pop("eta", ordered[0].eta)
        return cls(tuple(ordered), mode=mode, eta=eta, **kw)

    @property
    def grid(self):
        return self.interferograms[0].grid

    @property
    def thetas(self) -> tuple:
        return tuple(i.theta for i in self.interferograms)


def synthesize_run(
    phi_r: ComplexField2D,
    phi_w: ComplexField2D,
    eta: float,
    mode: str = "spontaneous",
    brightness_ratio: float = 1.0,
    weights: Optional[SourceAmplitudes] = None,
) -> TomographyRun:
    """Noiseless interferograms at the canonical phase settings of ``mode``."""
    if mode not in CANONICAL_THETAS:
        raise ValueError(f"unknown mode {mode!r}")
    w = weights if weights is not None else weights_from_eta(eta, brightness_ratio)
    make = coincidence_probability if mode == "spontaneous" else set_interference
    ifg = tuple(make(phi_r, phi_w, SplitterSetting(eta, t), w) for t in CANONICAL_THETAS[mode])
    return TomographyRun(ifg, mode=mode, eta=eta, settings={"brightness_ratio": brightness_ratio})


def quartet_differences(run: TomographyRun) -> tuple[np.ndarray, np.ndarray]:
    """(numerator, denominator) = (P3 - P1, P0 - P2) in canonical order."""
    p0, p1, p2, p3 = (i.values for i in run.interferograms)
    return p3 - p1, p0 - p2


def extract_jsp(run: TomographyRun, floor: float = DEFAULT_VALIDITY_FLOOR) -> JspMap:
    """Recover the wrapped JSP from a four-setting run.

    Pixels where both quartet differences fall below ``floor`` times the
    largest value of any interferogram are marked invalid. Stimulated runs
    carry the constant ``SET_PHASE_OFFSET`` in ``offset``; it is not removed.
    """
    if floor < 0:
        raise ValueError("floor must be >= 0")
    num, den = quartet_differences(run)
    gmax = max(float(np.max(i.values)) for i in run.interferograms)
    thresh = floor * gmax
    valid = (np.abs(num) >= thresh) | (np.abs(den) >= thresh)
    if gmax == 0:
        valid[:] = False
    phase = wrap_phase(np.arctan2(num, den))
    offset = SET_PHASE_OFFSET if run.mode == "stimulated" else 0.0
    return JspMap(run.grid, phase, valid, provenance=run.mode, intensity=num**2 + den**2, offset=offset)


def remove_offset(m: JspMap) -> JspMap:
    """Subtract the map's recorded constant offset."""
    return replace(m, phase=wrap_phase(m.phase - m.offset), offset=0.0)


def confidence_masks(intensity: RealField2D, levels: Sequence[float] = CONFIDENCE_LEVELS) -> dict[float, np.ndarray]:
    return dict(zip(levels, contour_mask(intensity, levels)))


def circular_correlation(a, b) -> float:
    """Circular correlation coefficient of two angle samples."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    sa = np.sin(a - np.angle(np.mean(np.exp(1j * a))))
    sb = np.sin(b - np.angle(np.mean(np.exp(1j * b))))
    den = math.sqrt(float(np.sum(sa**2) * np.sum(sb**2)))
    return float(np.sum(sa * sb) / den) if den > 0 else float("nan")


@dataclass(frozen=True)
class LevelMetrics:
    level: float
    n_pixels: int
    rms: float
    max_abs: float
    mean: float
    circular_correlation: float


@dataclass(frozen=True)
class JspComparison:
    levels: tuple

    def by_level(self, level: float) -> LevelMetrics:
        for m in self.levels:
            if math.isclose(m.level, level):
                return m
        raise KeyError(level)

    def to_dict(self) -> dict:
        return {
            "levels": [
                {
                    "level": m.level,
                    "n_pixels": m.n_pixels,
                    "rms_rad": m.rms,
                    "max_abs_rad": m.max_abs,
                    "mean_rad": m.mean,
                    "circular_correlation": m.circular_correlation,
                }
                for m in self.levels
            ]
        }


def compare_jsp(a: JspMap, b: JspMap, masks: Optional[Mapping[float, np.ndarray]] = None) -> JspComparison:
    """RMS / max of the wrapped difference a - b inside each contour mask.

    ``masks`` maps contour level to boolean mask; by default the 25/10/1 %
    contours of ``a``'s intensity are used.
    """
    check_same_grid(a, b)
    if masks is None:
        masks = confidence_masks(a.intensity_field())
    diff = wrap_phase(a.phase - b.phase)
    out = []
    for level, mask in masks.items():
        sel = np.asarray(mask, bool) & a.valid & b.valid
        if not sel.any():
            raise ValueError(f"no overlapping valid region at contour level {level}")
        d = diff[sel]
        out.append(
            LevelMetrics(
                level=float(level),
                n_pixels=int(sel.sum()),
                rms=float(np.sqrt(np.mean(d**2))),
                max_abs=float(np.max(np.abs(d))),
                mean=float(np.angle(np.mean(np.exp(1j * d)))),
                circular_correlation=circular_correlation(a.phase[sel], b.phase[sel]),
            )
        )
    return JspComparison(tuple(out))
