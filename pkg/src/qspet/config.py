"""Run configuration: an INI file with unit-suffixed keys.

Every key is optional; missing keys take the device defaults below. Unknown
sections or keys and malformed values raise :class:`ConfigError` with the
file name and line number of the offending entry.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .fields import FrequencyGrid
from .noise import FilterResponse, NoiseConfig
from .ring import CouplerSetting, VoltageCalibration, free_spectral_range, round_trip_amplitude
from .sources import PumpSpectrum, RingParams, WaveguideParams
from .units import GHZ, NM, PS, UM, wavelength_nm_to_hz


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DeviceConfig:
    pump_wavelength_nm: float = 1546.23
    signal_wavelength_nm: float = 1538.55
    idler_wavelength_nm: float = 1553.98
    linewidth_ghz: float = 7.44
    escape_efficiency: float = 0.8
    ring_length_um: float = 363.0
    group_index: float = 4.181
    waveguide_length_mm: float = 2.8
    waveguide_propagation_phase: bool = False
    pulse_duration_ps: float = 15.0
    pump_shape: str = "gaussian"
    pump_chirp_rad_per_ghz2: float = 0.0


@dataclass(frozen=True)
class GridConfig:
    span_ghz: float = 25.0
    points: int = 128


@dataclass(frozen=True)
class InterferenceConfig:
    mode: str = "spontaneous"
    eta: float = 0.5
    brightness_ratio: float = 1.0
    validity_floor: float = 1e-4


@dataclass(frozen=True)
class NoiseSection:
    pairs_per_setting: float = 1e5
    seed: int = 0
    dark_rate_fraction: float = 0.0
    sigma_pixels: float = 1.0
    window: int = 3
    apply_filter: bool = True
    filter_fwhm_ghz: float = 1.25
    filter_shape: str = "lorentzian"


@dataclass(frozen=True)
class LossConfig:
    # empty means "use the device escape efficiency"
    escape_signal: Optional[float] = None
    escape_idler: Optional[float] = None


@dataclass(frozen=True)
class RingSweepConfig:
    loss_db_per_cm: float = 2.5
    sweep_t_min: float = 0.90
    sweep_t_max: float = 0.999
    sweep_points: int = 12
    calibration_phase0_rad: float = 0.0
    calibration_phase_per_v2_rad: float = 0.1
    sweep_volts: tuple = ()
    spectrum_points: int = 801
    span_fwhm: float = 10.0


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "qspet_out"
    format: str = "both"
    figures: bool = True


_SECTIONS = {
    "device": DeviceConfig,
    "grid": GridConfig,
    "interference": InterferenceConfig,
    "noise": NoiseSection,
    "loss": LossConfig,
    "ring": RingSweepConfig,
    "output": OutputConfig,
}


@dataclass(frozen=True)
class RunConfig:
    device: DeviceConfig = field(default_factory=DeviceConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    interference: InterferenceConfig = field(default_factory=InterferenceConfig)
    noise: NoiseSection = field(default_factory=NoiseSection)
    loss: LossConfig = field(default_factory=LossConfig)
    ring: RingSweepConfig = field(default_factory=RingSweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        validate(self)

    # physical records
    @property
    def nu_p(self) -> float:
        return wavelength_nm_to_hz(self.device.pump_wavelength_nm)

    @property
    def nu_s(self) -> float:
        return wavelength_nm_to_hz(self.device.signal_wavelength_nm)

    @property
    def nu_i(self) -> float:
        return wavelength_nm_to_hz(self.device.idler_wavelength_nm)

    def ring_params(self) -> RingParams:
        d = self.device
        return RingParams.from_linewidths(
            self.nu_p, self.nu_s, self.nu_i, d.linewidth_ghz * GHZ, d.ring_length_um * UM, d.escape_efficiency
        )

    def pump(self) -> PumpSpectrum:
        d = self.device
        return PumpSpectrum(
            center=self.nu_p,
            duration_fwhm=d.pulse_duration_ps * PS,
            shape=d.pump_shape,
            chirp=d.pump_chirp_rad_per_ghz2 / GHZ**2,
        )

    def waveguide(self) -> WaveguideParams:
        d = self.device
        return WaveguideParams(
            length=d.waveguide_length_mm * 1e-3,
            group_index=d.group_index,
            propagation_phase=d.waveguide_propagation_phase,
        )

    def frequency_grid(self) -> FrequencyGrid:
        return FrequencyGrid.square(self.nu_s, self.nu_i, self.grid.span_ghz * GHZ, self.grid.points)

    def noise_config(self) -> NoiseConfig:
        n = self.noise
        return NoiseConfig(n.pairs_per_setting, n.seed, n.dark_rate_fraction)

    def filters(self) -> Optional[tuple[FilterResponse, FilterResponse]]:
        n = self.noise
        if not n.apply_filter:
            return None
        f = FilterResponse(n.filter_shape, n.filter_fwhm_ghz * GHZ)
        return f, f

    def escape_efficiencies(self) -> tuple[float, float]:
        d, lo = self.device.escape_efficiency, self.loss
        return (
            d if lo.escape_signal is None else lo.escape_signal,
            d if lo.escape_idler is None else lo.escape_idler,
        )

    def fsr(self) -> float:
        return free_spectral_range(self.device.ring_length_um * UM, self.device.group_index)

    def round_trip(self) -> float:
        return round_trip_amplitude(self.ring.loss_db_per_cm, self.device.ring_length_um * UM)

    def calibration(self) -> VoltageCalibration:
        r = self.ring
        return VoltageCalibration(r.calibration_phase0_rad, r.calibration_phase_per_v2_rad)

    def sweep_settings(self) -> list[CouplerSetting]:
        """Coupler settings for the regime sweep: from volts when given, else a linear t ramp."""
        a, r = self.round_trip(), self.ring
        if r.sweep_volts:
            cal = self.calibration()
            return [cal.setting(v, a) for v in r.sweep_volts]
        n = r.sweep_points
        ts = [r.sweep_t_min + k * (r.sweep_t_max - r.sweep_t_min) / max(n - 1, 1) for k in range(n)]
        return [CouplerSetting(t, a) for t in ts]

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, noise=replace(self.noise, seed=int(seed)))

    def with_output(self, directory=None, fmt=None) -> "RunConfig":
        o = self.output
        return replace(
            self,
            output=replace(o, directory=o.directory if directory is None else str(directory), format=o.format if fmt is None else fmt),
        )

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            sec = asdict(getattr(self, f.name))
            out[f.name] = {k: list(v) if isinstance(v, tuple) else v for k, v in sec.items()}
        return out

    def to_ini(self) -> str:
        lines = []
        for sec, vals in self.to_dict().items():
            lines.append(f"[{sec}]")
            for k, v in vals.items():
                if v is None:
                    v = ""
                elif isinstance(v, bool):
                    v = "true" if v else "false"
                elif isinstance(v, list):
                    v = ", ".join(repr(float(x)) for x in v)
                lines.append(f"{k} = {v}")
            lines.append("")
        return "\n".join(lines)


def _check(cond: bool, where: tuple, msg: str):
    if not cond:
        raise ConfigError(msg if where is None else f"{where[0]}:{where[1]}: [{where[2]}] {msg}")


def validate(cfg: RunConfig, anchors: Optional[dict] = None) -> None:
    """Check module invariants; ``anchors`` maps (section, key) to (file, line)."""

    def at(sec, key):
        if anchors and (sec, key) in anchors:
            path, line = anchors[(sec, key)]
            return (path, line, f"{sec}.{key}")
        return ("<config>", 0, f"{sec}.{key}")

    d, g, it, n, lo, r, o = cfg.device, cfg.grid, cfg.interference, cfg.noise, cfg.loss, cfg.ring, cfg.output
    for key in ("pump_wavelength_nm", "signal_wavelength_nm", "idler_wavelength_nm", "linewidth_ghz",
                "ring_length_um", "group_index", "waveguide_length_mm", "pulse_duration_ps"):
        _check(getattr(d, key) > 0, at("device", key), "must be positive")
    _check(0 < d.escape_efficiency <= 1, at("device", "escape_efficiency"), "must lie in (0, 1]")
    _check(d.pump_shape in ("gaussian", "sech2"), at("device", "pump_shape"), "must be 'gaussian' or 'sech2'")
    _check(g.span_ghz > 0, at("grid", "span_ghz"), "must be positive")
    _check(g.points >= 2, at("grid", "points"), "must be >= 2")
    _check(it.mode in ("spontaneous", "stimulated"), at("interference", "mode"), "must be 'spontaneous' or 'stimulated'")
    _check(0 <= it.eta <= 1, at("interference", "eta"), "must lie in [0, 1]")
    _check(it.brightness_ratio > 0, at("interference", "brightness_ratio"), "must be positive")
    _check(it.validity_floor >= 0, at("interference", "validity_floor"), "must be >= 0")
    _check(n.pairs_per_setting >= 0, at("noise", "pairs_per_setting"), "must be >= 0")
    _check(n.seed >= 0, at("noise", "seed"), "must be >= 0")
    _check(n.dark_rate_fraction >= 0, at("noise", "dark_rate_fraction"), "must be >= 0")
    _check(n.sigma_pixels >= 0, at("noise", "sigma_pixels"), "must be >= 0")
    _check(n.window >= 1 and n.window % 2 == 1, at("noise", "window"), "must be an odd integer >= 1")
    _check(n.filter_fwhm_ghz > 0, at("noise", "filter_fwhm_ghz"), "must be positive")
    _check(n.filter_shape in ("lorentzian", "gaussian"), at("noise", "filter_shape"), "must be 'lorentzian' or 'gaussian'")
    for key in ("escape_signal", "escape_idler"):
        v = getattr(lo, key)
        _check(v is None or 0 < v <= 1, at("loss", key), "unphysical escape efficiency")
    _check(r.loss_db_per_cm >= 0, at("ring", "loss_db_per_cm"), "must be >= 0")
    _check(0 <= r.sweep_t_min <= r.sweep_t_max <= 1, at("ring", "sweep_t_min"), "need 0 <= sweep_t_min <= sweep_t_max <= 1")
    _check(r.sweep_points >= 1, at("ring", "sweep_points"), "must be >= 1")
    _check(r.spectrum_points >= 16, at("ring", "spectrum_points"), "must be >= 16")
    _check(r.span_fwhm > 0, at("ring", "span_fwhm"), "must be positive")
    _check(o.format in ("csv", "pgm", "both"), at("output", "format"), "must be csv, pgm or both")


def _coerce(raw: str, default, name: str, annotation):
    text = raw.strip()
    if isinstance(default, bool):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        v = float(text)
        if v != int(v):
            raise ValueError(f"expected an integer, got {raw!r}")
        return int(v)
    if isinstance(default, float) or "float" in str(annotation):
        if default is None and text == "":
            return None
        v = float(text)
        if not math.isfinite(v):
            raise ValueError(f"expected a finite number, got {raw!r}")
        return v
    if isinstance(default, tuple):
        return tuple(float(x) for x in text.split(",") if x.strip())
    return text


_KEY_RE = re.compile(r"^\s*([^=:\s\[][^=:]*?)\s*[=:]")
_SEC_RE = re.compile(r"^\s*\[([^\]]+)\]")


def _anchors(text: str, path: str) -> dict:
    out, sec = {}, None
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.lstrip().startswith(("#", ";")):
            continue
        m = _SEC_RE.match(line)
        if m:
            sec = m.group(1).strip()
            out.setdefault((sec, None), (path, lineno))
            continue
        m = _KEY_RE.match(line)
        if m and sec is not None:
            out.setdefault((sec, m.group(1).strip().lower()), (path, lineno))
    return out


def parse_config(text: str, path: str = "<config>") -> RunConfig:
    """Parse INI text into a validated :class:`RunConfig`."""
    anchors = _anchors(text, path)
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", 0)
        raise ConfigError(f"{path}:{lineno}: {exc.message.splitlines()[0] if hasattr(exc, 'message') else exc}") from exc

    parts = {}
    for sec in cp.sections():
        if sec not in _SECTIONS:
            line = anchors.get((sec, None), (path, 0))[1]
            raise ConfigError(f"{path}:{line}: unknown section [{sec}] (allowed: {', '.join(_SECTIONS)})")
        cls = _SECTIONS[sec]
        defaults = {f.name: (f.default, f.type) for f in fields(cls)}
        kwargs = {}
        for key, raw in cp.items(sec):
            line = anchors.get((sec, key), (path, 0))[1]
            if key not in defaults:
                raise ConfigError(f"{path}:{line}: unknown key '{key}' in [{sec}]")
            default, ann = defaults[key]
            try:
                kwargs[key] = _coerce(raw, default, key, ann)
            except ValueError as exc:
                raise ConfigError(f"{path}:{line}: [{sec}.{key}] {exc}") from exc
        parts[sec] = cls(**kwargs)

    cfg = object.__new__(RunConfig)
    for name, cls in _SECTIONS.items():
        object.__setattr__(cfg, name, parts.get(name, cls()))
    validate(cfg, anchors)
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{p}: cannot read config ({exc.strerror})") from exc
    return parse_config(text, str(p))


def default_config() -> RunConfig:
    return RunConfig()
