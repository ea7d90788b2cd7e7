"""Optical interconnect library: closed-form device, timing and thermal models.

All functions are pure. Lengths follow the units stated on each argument;
powers are in mW throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable


class ModelError(ValueError):
    """Raised when device parameters make a model undefined."""


@dataclass(frozen=True)
class DeviceModels:
    tau_o: float = 11.0            # ps/mm, optical waveguide
    tau_e: float = 37.0            # ps/mm, Cu global wire
    tau_conv: float = 96.2         # ps, modulation + detection per bit
    alpha_wg: float = 1.5          # dB/cm
    loss_mod_db: float = 2.0       # dB
    p_det_sense: float = 0.1       # mW
    p_channel: float = 0.2         # mW per active (net, trunk)
    p_trunk_base: float = 1.0      # mW per active trunk
    p_cross_unit: float = 0.05     # mW per active crossing
    k_trunk_thm: float = 0.01      # mW / (degC * mm)
    k_ring_thm: float = 0.1        # mW per unit bandwidth ratio
    lambda0: float = 1550.0        # nm
    drift_sens: float = 0.12       # nm/degC
    channel_spacing: float = 0.8   # nm
    q_nominal: float = 8869.0
    temp_threshold: float = 15.0   # degC
    p_laser_max: float = 1.0       # mW per channel

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ModelError(f"{f.name} must be finite, got {v!r}")
            if v < 0:
                raise ModelError(f"{f.name} must be non-negative, got {v!r}")
        if not self.tau_e > self.tau_o > 0:
            raise ModelError(
                f"need tau_e > tau_o > 0, got tau_e={self.tau_e}, tau_o={self.tau_o}")
        if self.q_nominal <= 0:
            raise ModelError("q_nominal must be positive")
        if self.channel_spacing <= 0:
            raise ModelError("channel_spacing must be positive")
        if self.lambda0 <= 0:
            raise ModelError("lambda0 must be positive")


@dataclass(frozen=True)
class RingGeometry:
    """Ring resonator geometry. ``circumference_L`` in um, ``n_g`` dimensionless."""

    r1: float
    r2: float
    a: float
    circumference_L: float
    n_g: float

    def __post_init__(self):
        for name in ("r1", "r2", "a"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ModelError(f"{name} must lie in (0, 1), got {v!r}")
        if self.circumference_L <= 0 or self.n_g <= 0:
            raise ModelError("circumference_L and n_g must be positive")

    @property
    def round_trip(self) -> float:
        return self.r1 * self.r2 * self.a


def critical_length(models: DeviceModels) -> float:
    """Shortest link (mm) for which optical signalling beats a Cu wire.

    Solves ``tau_conv + tau_o * L <= tau_e * L`` at equality.
    """
    dtau = models.tau_e - models.tau_o
    if not (math.isfinite(dtau) and dtau > 0):
        raise ModelError("critical length undefined unless tau_e > tau_o")
    return models.tau_conv / dtau


def ring_q_factor(g: RingGeometry, lambda0: float) -> float:
    """Loaded quality factor of a ring.

    ``lambda0`` and ``g.circumference_L`` must share a length unit.
    """
    if lambda0 <= 0:
        raise ModelError("lambda0 must be positive")
    rra = g.round_trip
    if rra >= 1.0:
        raise ModelError("r1*r2*a >= 1: resonator Q diverges")
    return math.sqrt(rra) * g.circumference_L * math.pi * g.n_g / ((1.0 - rra) * lambda0)


def group_index(n_e_at: Callable[[float], float], lam: float,
                rel_step: float = 1e-6) -> float:
    """Group index from an effective-index profile by central difference."""
    h = lam * rel_step
    dn = (n_e_at(lam + h) - n_e_at(lam - h)) / (2.0 * h)
    n_g = n_e_at(lam) - lam * dn
    if not math.isfinite(n_g):
        raise ModelError(f"non-finite group index at lambda={lam}")
    return n_g


def channel_bandwidth(f_resonant_thz: float, q: float) -> float:
    """Resonance bandwidth in GHz for a resonant frequency given in THz."""
    if q <= 0:
        raise ModelError("Q must be positive")
    return f_resonant_thz * 1e3 / q


def thermal_drift(delta_t: float, models: DeviceModels) -> float:
    """Resonance wavelength drift (nm) for a temperature swing in degC."""
    if delta_t < 0:
        raise ModelError("temperature variation must be non-negative")
    return models.drift_sens * delta_t


def ring_thermal_penalty(delta_t: float, models: DeviceModels) -> tuple[bool, float]:
    """Q de-tuning cost of keeping one ring working under ``delta_t``.

    Returns ``(feasible, p_ring)`` where ``p_ring`` is the per-ring power in
    mW. The ring bandwidth must widen to twice the drift; once that exceeds
    the channel spacing neighbouring channels alias and the location is
    unusable, reported as ``(False, inf)``.
    """
    bw_req = 2.0 * thermal_drift(delta_t, models)
    if bw_req > models.channel_spacing:
        return False, math.inf
    nominal_bw = models.lambda0 / models.q_nominal
    return True, models.k_ring_thm * bw_req / nominal_bw


def loss_to_power(loss_db: float, models: DeviceModels) -> float:
    """Laser power above the detector floor needed to make up ``loss_db``."""
    if loss_db < 0:
        raise ModelError("loss must be non-negative")
    return models.p_det_sense * (10.0 ** (loss_db / 10.0) - 1.0)


def path_loss_db(wl_o_mm: float, models: DeviceModels) -> float:
    """Modulator insertion loss plus propagation over ``wl_o_mm``."""
    return models.loss_mod_db + models.alpha_wg * wl_o_mm / 10.0
