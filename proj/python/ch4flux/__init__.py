"""Methane plume retrieval and emission quantification."""

from ._core import (
    PPMM_TO_PPB,
    ContractError,
    NumericalError,
    __version__,
    compare,
    effective_wind,
    flux,
    pixel_area,
    quantify,
    relative_difference,
    retrieve,
    run_cli,
    scaling_factor,
    sensor_spec,
    simulate,
)

__all__ = [
    "PPMM_TO_PPB",
    "ContractError",
    "NumericalError",
    "__version__",
    "compare",
    "effective_wind",
    "flux",
    "pixel_area",
    "quantify",
    "relative_difference",
    "retrieve",
    "run_cli",
    "scaling_factor",
    "sensor_spec",
    "simulate",
]
