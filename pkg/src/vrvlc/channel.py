"""Line-of-sight Lambertian VLC channel and photodiode noise.

Scalar helpers work on one transmitter/detector pair. `received_power`
evaluates the same model over whole batches of posed detectors and is
what the sweeps use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .headset import PosedDetector

ELECTRON_CHARGE = 1.602176634e-19  # C
BOLTZMANN = 1.380649e-23  # J/K

# reference arena defaults
DEFAULT_TX_POWER = 10.0  # W
DEFAULT_DIVERGENCE = 60.0  # deg
DEFAULT_R_HEADSET = 7.62e-2  # m
DEFAULT_R_PD = 2.5e-3  # m


@dataclass(frozen=True)
class Transmitter:
    position: tuple[float, float, float]
    power_t: float = DEFAULT_TX_POWER
    divergence_half_angle: float = DEFAULT_DIVERGENCE
    pointing: tuple[float, float, float] = (0.0, 0.0, -1.0)

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "pointing", tuple(float(v) for v in self.pointing))
        if len(self.position) != 3 or len(self.pointing) != 3:
            raise ValueError("position and pointing must be 3-vectors")
        if not self.power_t > 0:
            raise ValueError("power_t must be positive")
        if not 0 < self.divergence_half_angle < 90:
            raise ValueError("divergence half-angle must lie in (0, 90) deg")
        if abs(math.hypot(*self.pointing) - 1.0) > 1e-9:
            raise ValueError("pointing must be a unit vector")

    @property
    def lambertian_order(self) -> float:
        return lambertian_order(self.divergence_half_angle)


@dataclass(frozen=True)
class ChannelParams:
    a_pd: float = math.pi * DEFAULT_R_PD**2  # m^2
    responsivity: float = 0.53  # A/W
    bandwidth: float = 10e6  # Hz
    filter_transmission: float = 0.9
    refractive_index: float = 1.5
    fov_half_angle: float = 22.5  # deg
    background_current: float = 5100e-6  # A
    i2: float = 0.562
    i3: float = 0.0868
    electron_charge: float = ELECTRON_CHARGE
    boltzmann: float = BOLTZMANN
    # thermal-noise constants (Komine-Nakagawa receiver model)
    temperature: float = 295.0  # K
    open_loop_gain: float = 10.0
    capacitance_per_area: float = 112e-12 / 1e-4  # F/m^2 (112 pF/cm^2)
    fet_channel_noise_factor: float = 1.5
    fet_transconductance: float = 30e-3  # S

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be a positive finite number, got {v!r}")
        if self.filter_transmission > 1:
            raise ValueError("filter_transmission must be in (0, 1]")
        if self.fov_half_angle > 90:
            raise ValueError("fov_half_angle must be in (0, 90] deg")


@dataclass(frozen=True)
class LinkGeometry:
    distance: float
    irradiance_angle: float
    incidence_angle: float


def lambertian_order(divergence_half_angle: float) -> float:
    """-ln 2 / ln cos(half-power angle); equals 1 at 60 deg."""
    if not 0 < divergence_half_angle < 90:
        raise ValueError("divergence half-angle must lie in (0, 90) deg")
    return -math.log(2.0) / math.log(math.cos(math.radians(divergence_half_angle)))


def concentrator_gain(psi: float, params: ChannelParams) -> float:
    if psi < 0:
        raise ValueError("incidence angle must be non-negative")
    if psi > params.fov_half_angle:
        return 0.0
    return params.refractive_index**2 / math.sin(math.radians(params.fov_half_angle)) ** 2


def angle_between(u: Sequence[float], v: Sequence[float]) -> float:
    """Angle in degrees between two non-zero vectors, via atan2(|u x v|, u.v)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("zero-length direction vector")
    u, v = u / nu, v / nv
    return math.degrees(math.atan2(np.linalg.norm(np.cross(u, v)), float(np.dot(u, v))))


def irradiance_angle(tx: Transmitter, pd_position: Sequence[float]) -> float:
    d = np.asarray(pd_position, dtype=float) - np.asarray(tx.position)
    if not np.any(d):
        raise ValueError("detector coincides with transmitter")
    return angle_between(tx.pointing, d)


def incidence_angle(pd: PosedDetector, tx: Transmitter) -> float:
    d = np.asarray(tx.position) - np.asarray(pd.world_position, dtype=float)
    if not np.any(d):
        raise ValueError("detector coincides with transmitter")
    return angle_between(pd.world_normal, d)


def link_geometry(tx: Transmitter, pd: PosedDetector) -> LinkGeometry:
    d = float(np.linalg.norm(np.asarray(tx.position) - np.asarray(pd.world_position)))
    return LinkGeometry(d, irradiance_angle(tx, pd.world_position), incidence_angle(pd, tx))


def los_received_power(tx: Transmitter, pd: PosedDetector, params: ChannelParams) -> float:
    geo = link_geometry(tx, pd)
    if geo.distance == 0:
        raise ValueError("detector coincides with transmitter")
    phi, psi = geo.irradiance_angle, geo.incidence_angle
    if phi >= 90.0 or psi > params.fov_half_angle:
        return 0.0
    m = tx.lambertian_order
    return (
        tx.power_t
        * (m + 1.0)
        * params.a_pd
        / (2.0 * math.pi * geo.distance**2)
        * math.cos(math.radians(phi)) ** m
        * params.filter_transmission
        * concentrator_gain(psi, params)
        * math.cos(math.radians(psi))
    )


def _angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # u, v already unit-length along the last axis
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.einsum("...i,...i->...", u, v)
    return np.degrees(np.arctan2(cross, dot))


def received_power(
    transmitters: Sequence[Transmitter],
    positions: np.ndarray,
    normals: np.ndarray,
    params: ChannelParams,
) -> np.ndarray:
    """LOS power from every transmitter to every posed detector.

    positions, normals: (..., N, 3). Returns (..., M, N) for M transmitters.
    """
    positions = np.asarray(positions, dtype=float)
    normals = np.asarray(normals, dtype=float)
    gain = params.refractive_index**2 / math.sin(math.radians(params.fov_half_angle)) ** 2
    out = np.empty(positions.shape[:-2] + (len(transmitters), positions.shape[-2]))
    for k, tx in enumerate(transmitters):
        v = np.asarray(tx.position) - positions  # detector -> transmitter
        d = np.linalg.norm(v, axis=-1)
        if np.any(d == 0):
            raise ValueError("detector coincides with transmitter")
        v_hat = v / d[..., None]
        psi = _angles(normals, v_hat)
        phi = _angles(np.broadcast_to(np.asarray(tx.pointing), v_hat.shape), -v_hat)
        m = tx.lambertian_order
        cos_phi = np.cos(np.radians(phi))
        p = (
            tx.power_t
            * (m + 1.0)
            * params.a_pd
            / (2.0 * math.pi * d**2)
            * np.power(np.clip(cos_phi, 0.0, None), m)
            * params.filter_transmission
            * gain
            * np.cos(np.radians(psi))
        )
        visible = (phi < 90.0) & (psi <= params.fov_half_angle)
        out[..., k, :] = np.where(visible, p, 0.0)
    return out


def shot_noise_variance(total_received_power, params: ChannelParams):
    """Shot-noise variance (A^2) from the total optical power on a detector.

    Accepts scalars or arrays; the background term is added element-wise.
    """
    p = np.asarray(total_received_power, dtype=float)
    if np.any(p < 0):
        raise ValueError("received power must be non-negative")
    q, B = params.electron_charge, params.bandwidth
    var = 2.0 * q * params.responsivity * p * B + 2.0 * q * params.background_current * params.i2 * B
    return float(var) if var.ndim == 0 else var


def thermal_noise_variance(params: ChannelParams) -> float:
    kT = params.boltzmann * params.temperature
    C, A, B = params.capacitance_per_area, params.a_pd, params.bandwidth
    feedback = 8.0 * math.pi * kT / params.open_loop_gain * C * A * params.i2 * B**2
    fet = (
        16.0 * math.pi**2 * kT * params.fet_channel_noise_factor / params.fet_transconductance
        * C**2 * A**2 * params.i3 * B**3
    )
    return feedback + fet


def noise_variance(total_received_power, params: ChannelParams):
    return shot_noise_variance(total_received_power, params) + thermal_noise_variance(params)
