"""Emergent-velocity model of double-slit interference and EPR detection ordering."""
from .core import (
    NODE_RTOL,
    ChannelKind,
    ChannelSet,
    ExperimentConfig,
    FieldSample,
    ModelConstants,
    NodeRegion,
    SlitPacket,
    build_channels,
    conditional_probabilities,
    field_sample,
    j_total,
    p_total,
    two_slit_velocity,
    velocity_total,
)
from .dynamics import (
    EmergentFlow,
    EnsembleSpec,
    IntegratorSpec,
    Trajectory,
    acceleration_total,
    integrate_many,
    integrate_trajectory,
    run_ensemble,
)
from .oracle import bohm_velocity, born_density, psi_total, quantum_current
from .relativity import Apparatus, Boost, Event, boost_event, interval

__version__ = "0.1.0"
