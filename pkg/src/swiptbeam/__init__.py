"""Joint beamforming / signal-splitting optimization for SWIPT downlinks."""

from .channel import ChannelConfig, ChannelRealization, draw_channel, pathloss_db
from .conic import (
    PSD,
    SOC,
    ConeConstraint,
    ConicProgram,
    Nonneg,
    RotatedSOC,
    Zero,
    certify,
)
from .ipm import PsdCapabilityError, SolverResult, SolverStatus, solve
from .network import DesignPoint, NetworkInstance, ResidualReport
from .surrogate import (
    ExpansionPoint,
    MinorantCoefficients,
    clamp_alpha,
    minorant_coefficients,
    minorant_value,
    perspective_bound,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "ChannelRealization",
    "ConeConstraint",
    "ConicProgram",
    "DesignPoint",
    "ExpansionPoint",
    "MinorantCoefficients",
    "NetworkInstance",
    "Nonneg",
    "PSD",
    "PsdCapabilityError",
    "ResidualReport",
    "RotatedSOC",
    "SOC",
    "SolverResult",
    "SolverStatus",
    "Zero",
    "certify",
    "clamp_alpha",
    "draw_channel",
    "minorant_coefficients",
    "minorant_value",
    "pathloss_db",
    "perspective_bound",
    "solve",
]
