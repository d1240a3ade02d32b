"""Excitation energy transport on networks.

Node labels are 1-based, as on the command line and in files.
"""

from ._eet import (  # noqa: F401
    Error,
    Integrator,
    InvalidArgument,
    Network,
    Noise,
    NumericalError,
    apply_disorder,
    complete_network,
    dark_dimension,
    dark_projector,
    default_config,
    delete_edge,
    disorder_sweep,
    expansion,
    hamiltonian,
    hopping_sweep,
    liouvillian,
    network_from_json,
    parse_network,
    predicted_efficiency,
    propagate_exact,
    run,
    saturation_sweep,
    set_hopping,
    simulate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
