"""Flow matching with auxiliary paths.

Thin wrapper over the compiled core; see ``auxfm._core`` for the full list.
"""

from ._core import (
    NULL_LABEL,
    DomainError,
    IoError,
    NumericError,
    PrototypeModel,
    ShapeError,
    VelocityModel,
    cfg_sample,
    conditional_sample,
    config_keys,
    continuity_check,
    distance_error,
    energy_distance,
    euler_sample,
    load_prototype,
    load_velocity,
    make_bimodal_ring,
    make_ring,
    mode_accuracy,
    save_prototype,
    save_velocity,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
