"""Scattering loss in the ring, modelled with a phantom output channel.

Each photon of a ring pair leaves either through the real bus waveguide
("r", probability = escape efficiency) or through the loss channel ("l").
Only the rr part can produce a coincidence at the detectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fields import ComplexField2D, Interferogram
from .interferometry import SourceAmplitudes, SplitterSetting, coincidence_probability
from .sources import RingParams
from .tomography import synthesize_run


@dataclass(frozen=True)
class LossyJsa:
    rr: ComplexField2D
    rl: ComplexField2D
    lr: ComplexField2D
    ll: ComplexField2D
    escape_s: float
    escape_i: float

    def component_norms(self) -> dict[str, float]:
        return {k: getattr(self, k).norm_squared() for k in ("rr", "rl", "lr", "ll")}


def _check_escape(eta) -> None:
    eta = np.asarray(eta, float)
    if np.any(~(eta > 0)) or np.any(eta > 1):
        raise ValueError("unphysical escape efficiency")


def split_jsa_phantom(
    phi: ComplexField2D,
    r: Optional[RingParams] = None,
    escape_s=None,
    escape_i=None,
    escape_profile: Optional[Callable] = None,
) -> LossyJsa:
    """Split a lossless ring JSA into real/lost channel components.

    ``phi`` must already use the ring's total (coupling + scattering)
    linewidth. Escape efficiencies default to ``|gamma_k|^2 / (2 Gamma_k)``
    from ``r``. ``escape_profile(nu_s, nu_i) -> (eta_s, eta_i)`` optionally
    makes them frequency dependent; the rl/lr/ll components share the shape of
    ``phi`` and never reach the coincidence counter.
    """
    if escape_s is None or escape_i is None:
        if r is None:
            raise ValueError("give ring parameters or explicit escape efficiencies")
        escape_s = r.escape_efficiency("s") if escape_s is None else escape_s
        escape_i = r.escape_efficiency("i") if escape_i is None else escape_i
    es = np.asarray(escape_s, float)
    ei = np.asarray(escape_i, float)
    if escape_profile is not None:
        g = phi.grid
        es, ei = escape_profile(g.nu_signal[:, None], g.nu_idler[None, :])
        es, ei = np.broadcast_arrays(np.asarray(es, float), np.asarray(ei, float))
    _check_escape(es)
    _check_escape(ei)
    v = phi.values
    parts = {
        "rr": np.sqrt(es * ei) * v,
        "rl": np.sqrt(es * (1 - ei)) * v,
        "lr": np.sqrt((1 - es) * ei) * v,
        "ll": np.sqrt((1 - es) * (1 - ei)) * v,
    }
    # frequency-dependent profiles report their mean efficiency
    return LossyJsa(
        **{k: ComplexField2D(phi.grid, val) for k, val in parts.items()},
        escape_s=float(np.mean(es)),
        escape_i=float(np.mean(ei)),
    )


def lossy_coincidence(lossy: LossyJsa, phi_w: ComplexField2D, s: SplitterSetting, w: SourceAmplitudes) -> Interferogram:
    """Coincidence interferogram of a lossy ring: only the rr component is detected."""
    return coincidence_probability(lossy.rr, phi_w, s, w)


def synthesize_lossy_run(lossy: LossyJsa, phi_w: ComplexField2D, eta: float, brightness_ratio: float = 1.0):
    """Spontaneous four-setting run built from the rr component."""
    return synthesize_run(lossy.rr, phi_w, eta, "spontaneous", brightness_ratio)
