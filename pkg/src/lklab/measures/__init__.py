"""Driving measures and their entropy, energy and distance functionals."""

from .core import (
    TWO_PI,
    AtomicSlice,
    CircleDensity,
    DrivingMeasure,
    MeasureSlice,
    TimeChange,
)
from .flat import bin_measure, flat_distance, flat_distance_binned
from .functionals import (
    average_in_time,
    coarse_grained_entropy,
    dirichlet_energy,
    invariant_entropy,
    mass_profile_entropy,
    pinsker_bound,
    slice_entropy,
    time_change,
    total_energy,
    total_entropy,
)
from .io import (
    MEASURE_SCHEMA,
    EntropyReport,
    dump_measure,
    load_measure,
    measure_from_dict,
    measure_to_dict,
)

__all__ = [
    "TWO_PI",
    "AtomicSlice",
    "CircleDensity",
    "DrivingMeasure",
    "MeasureSlice",
    "TimeChange",
    "bin_measure",
    "flat_distance",
    "flat_distance_binned",
    "average_in_time",
    "coarse_grained_entropy",
    "dirichlet_energy",
    "invariant_entropy",
    "mass_profile_entropy",
    "pinsker_bound",
    "slice_entropy",
    "time_change",
    "total_energy",
    "total_entropy",
    "MEASURE_SCHEMA",
    "EntropyReport",
    "dump_measure",
    "load_measure",
    "measure_from_dict",
    "measure_to_dict",
]
