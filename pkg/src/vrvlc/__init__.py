"""Simulator for VLC-connected VR headsets with hemispherical angle-diversity receivers."""

from .arena import (
    Arena,
    OrientationTrace,
    UserState,
    assign_transmitter,
    default_arena,
    load_orientation_trace,
    sample_orientations,
    user_grid,
)
from .channel import (
    ChannelParams,
    LinkGeometry,
    Transmitter,
    concentrator_gain,
    incidence_angle,
    irradiance_angle,
    lambertian_order,
    los_received_power,
    received_power,
    shot_noise_variance,
    thermal_noise_variance,
)
from .combining import (
    BranchObservation,
    SinrReport,
    combine,
    combine_egc,
    combine_mrc,
    combine_sbc,
    per_detector_sinr,
    shannon_rate,
)
from .headset import (
    DetectorPlacement,
    HeadsetLayout,
    HeadsetParams,
    Orientation,
    PosedDetector,
    build_layout,
    min_angular_distance,
    pose_detectors,
    rotation_matrix,
)
from .sweep import (
    CoverageSpec,
    SweepPoint,
    SweepResult,
    connectivity_sweep,
    link_active,
    npd_study,
    sinr_alpha_sweep,
    trace_replay,
)

__version__ = "0.1.0"

__all__ = [
    "Arena",
    "OrientationTrace",
    "UserState",
    "assign_transmitter",
    "default_arena",
    "load_orientation_trace",
    "sample_orientations",
    "user_grid",
    "ChannelParams",
    "LinkGeometry",
    "Transmitter",
    "concentrator_gain",
    "incidence_angle",
    "irradiance_angle",
    "lambertian_order",
    "los_received_power",
    "received_power",
    "shot_noise_variance",
    "thermal_noise_variance",
    "BranchObservation",
    "SinrReport",
    "combine",
    "combine_egc",
    "combine_mrc",
    "combine_sbc",
    "per_detector_sinr",
    "shannon_rate",
    "DetectorPlacement",
    "HeadsetLayout",
    "HeadsetParams",
    "Orientation",
    "PosedDetector",
    "build_layout",
    "min_angular_distance",
    "pose_detectors",
    "rotation_matrix",
    "CoverageSpec",
    "SweepPoint",
    "SweepResult",
    "connectivity_sweep",
    "link_active",
    "npd_study",
    "sinr_alpha_sweep",
    "trace_replay",
]
