"""Hemispherical multi-photodetector headset geometry.

One detector sits at the apex of the hemisphere; the rest are arranged in
rings ("layers") of constant inclination. Positions are expressed in a
headset frame centered on the hemisphere center with the apex along +z.
Angles are degrees at every public interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np


@dataclass(frozen=True)
class HeadsetParams:
    r_headset: float  # m
    r_pd: float  # m
    theta_d: float  # deg, angular distance between neighbouring detectors

    def __post_init__(self):
        if not (self.r_headset > 0 and self.r_pd > 0):
            raise ValueError("r_headset and r_pd must be positive")
        if self.r_pd >= self.r_headset:
            raise ValueError("r_pd must be smaller than r_headset")
        if not (0 < self.theta_d <= 90):
            raise ValueError(f"theta_d={self.theta_d!r} violates 0 < theta_d <= 90")
        theta_min = min_angular_distance(self.r_pd, self.r_headset)
        if self.theta_d < theta_min:
            raise ValueError(
                f"theta_d={self.theta_d!r} below minimum angular distance {theta_min:.6g} deg"
            )


@dataclass(frozen=True)
class DetectorPlacement:
    layer_index: int
    inclination: float  # deg
    azimuth: float  # deg
    local_position: tuple[float, float, float]
    local_normal: tuple[float, float, float]


@dataclass(frozen=True)
class HeadsetLayout:
    params: HeadsetParams
    n_layers: int
    theta_z: float
    detectors: tuple[DetectorPlacement, ...]
    layer_counts: tuple[int, ...] = field(default=())

    @property
    def n_pd(self) -> int:
        return len(self.detectors)

    def positions(self) -> np.ndarray:
        """Local detector positions as an (N, 3) array."""
        return np.array([d.local_position for d in self.detectors], dtype=float)

    def normals(self) -> np.ndarray:
        return np.array([d.local_normal for d in self.detectors], dtype=float)


def normalize_angle(deg: float) -> float:
    """Map an angle to (-180, 180]."""
    if not math.isfinite(deg):
        raise ValueError(f"angle must be finite, got {deg!r}")
    a = math.fmod(deg, 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return a


@dataclass(frozen=True)
class Orientation:
    """Head orientation; yaw about z, pitch about y, roll about x (degrees)."""

    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", normalize_angle(float(self.yaw)))
        object.__setattr__(self, "pitch", normalize_angle(float(self.pitch)))
        object.__setattr__(self, "roll", normalize_angle(float(self.roll)))

    def as_array(self) -> np.ndarray:
        return np.array([self.yaw, self.pitch, self.roll], dtype=float)


@dataclass(frozen=True)
class PosedDetector:
    world_position: np.ndarray
    world_normal: np.ndarray


def min_angular_distance(r_pd: float, r_headset: float) -> float:
    """Smallest admissible detector spacing in degrees, 2*atan(r_pd / r_headset)."""
    if r_pd <= 0 or r_headset <= 0:
        raise ValueError("r_pd and r_headset must be positive")
    return math.degrees(2.0 * math.atan(r_pd / r_headset))


def layer_structure(theta_d: float) -> tuple[int, float, list[int]]:
    """Return (n_layers, layer spacing theta_z, detectors per layer)."""
    n_layers = math.ceil((90.0 - theta_d / 2.0) / theta_d)
    theta_z = 90.0 / n_layers if theta_d * n_layers > 90.0 else theta_d
    counts = [
        math.ceil(360.0 / theta_d * math.sin(math.radians(theta_z * j)))
        for j in range(1, n_layers + 1)
    ]
    return n_layers, theta_z, counts


def _unit_radial(inclination: float, azimuth: float) -> tuple[float, float, float]:
    t, p = math.radians(inclination), math.radians(azimuth)
    return (math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t))


def build_layout(params: HeadsetParams) -> HeadsetLayout:
    n_layers, theta_z, counts = layer_structure(params.theta_d)
    r = params.r_headset
    dets = [DetectorPlacement(0, 0.0, 0.0, (0.0, 0.0, r), (0.0, 0.0, 1.0))]
    for j, n_j in enumerate(counts, start=1):
        inclination = theta_z * j
        for i in range(n_j):
            azimuth = 360.0 / n_j * i
            n = _unit_radial(inclination, azimuth)
            dets.append(
                DetectorPlacement(j, inclination, azimuth, (r * n[0], r * n[1], r * n[2]), n)
            )
    return HeadsetLayout(params, n_layers, theta_z, tuple(dets), tuple(counts))


def rotation_matrices(orientations: np.ndarray) -> np.ndarray:
    """Batch of R = Rz(yaw) @ Ry(pitch) @ Rx(roll).

    `orientations` is (..., 3) with columns yaw, pitch, roll in degrees.
    Returns (..., 3, 3).
    """
    o = np.radians(np.asarray(orientations, dtype=float))
    cz, sz = np.cos(o[..., 0]), np.sin(o[..., 0])
    cy, sy = np.cos(o[..., 1]), np.sin(o[..., 1])
    cx, sx = np.cos(o[..., 2]), np.sin(o[..., 2])
    R = np.empty(o.shape[:-1] + (3, 3))
    # expanded product of the three elementary rotations
    R[..., 0, 0] = cz * cy
    R[..., 0, 1] = cz * sy * sx - sz * cx
    R[..., 0, 2] = cz * sy * cx + sz * sx
    R[..., 1, 0] = sz * cy
    R[..., 1, 1] = sz * sy * sx + cz * cx
    R[..., 1, 2] = sz * sy * cx - cz * sx
    R[..., 2, 0] = -sy
    R[..., 2, 1] = cy * sx
    R[..., 2, 2] = cy * cx
    return R


def rotation_matrix(o: Orientation) -> np.ndarray:
    return rotation_matrices(o.as_array())


def pose_arrays(
    layout: HeadsetLayout, orientations: np.ndarray, head_center: Sequence[float]
) -> tuple[np.ndarray, np.ndarray]:
    """World positions and normals for a batch of orientations, each (K, N, 3)."""
    R = rotation_matrices(np.atleast_2d(orientations))
    pos = np.einsum("kij,nj->kni", R, layout.positions()) + np.asarray(head_center, float)
    nrm = np.einsum("kij,nj->kni", R, layout.normals())
    return pos, nrm


def pose_detectors(
    layout: HeadsetLayout, o: Orientation, head_center: Sequence[float]
) -> list[PosedDetector]:
    R = rotation_matrix(o)
    c = np.asarray(head_center, dtype=float)
    out = []
    for d in layout.detectors:
        out.append(
            PosedDetector(c + R @ np.asarray(d.local_position), R @ np.asarray(d.local_normal))
        )
    return out


LAYOUT_HEADER = "layer,index,inclination_deg,azimuth_deg,x_m,y_m,z_m,nx,ny,nz"


def format_number(x: float) -> str:
    """9 significant digits, always with a decimal point for finite values."""
    s = format(float(x), ".9g")
    if s == "-0":
        s = "0"
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def layout_rows(layout: HeadsetLayout) -> Iterable[str]:
    yield LAYOUT_HEADER
    for k, d in enumerate(layout.detectors):
        fields = [d.inclination, d.azimuth, *d.local_position, *d.local_normal]
        yield f"{d.layer_index},{k}," + ",".join(format_number(v) for v in fields)


def write_layout_csv(layout: HeadsetLayout, out: TextIO) -> None:
    for row in layout_rows(layout):
        out.write(row + "\n")
