"""Simulation and phase tomography of photon-pair joint spectra.

A ring resonator and a reference waveguide are pumped coherently; the
coincidence interference between their pairs at four phase settings
recovers the joint spectral phase of the ring.
"""

from .config import ConfigError, RunConfig, default_config, load_config, parse_config
from .fields import (
    ComplexField2D,
    DegenerateFieldError,
    FrequencyGrid,
    GridMismatchError,
    Interferogram,
    JspMap,
    RealField2D,
    contour_mask,
    jsi,
    jsp,
    normalize,
    wrap_phase,
)
from .interferometry import (
    SourceAmplitudes,
    SplitterSetting,
    classical_fringe,
    coincidence_probability,
    fit_fringe,
    fringe_visibility,
    output_distribution,
    set_interference,
    weights_from_eta,
)
from .loss import LossyJsa, lossy_coincidence, split_jsa_phantom
from .noise import FilterResponse, NoiseConfig, apply_instrument_response, measure_run, sample_counts, smooth
from .ring import CouplerSetting, LineshapeFit, LineshapeFitError, fit_lineshape, regime_sweep
from .sources import (
    PumpSpectrum,
    RingParams,
    WaveguideParams,
    jsa_spontaneous_ring,
    jsa_stimulated_ring,
    jsa_waveguide,
)
from .tomography import TomographyRun, compare_jsp, extract_jsp, synthesize_run

__version__ = "0.1.0"
