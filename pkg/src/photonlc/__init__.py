"""LC-orbit optimization of circuits that emit photonic graph states."""

__version__ = "0.1.0"

from .circuit import Circuit, CostReport, cost_report, simulate_forward  # noqa: E402
from .graphs import Graph, apply_lc_sequence, erdos_renyi, local_complement, make_rgs  # noqa: E402
from .mapper import map_to_circuit, min_emitters, verify_circuit  # noqa: E402

__all__ = [
    "Circuit",
    "CostReport",
    "Graph",
    "apply_lc_sequence",
    "cost_report",
    "erdos_renyi",
    "local_complement",
    "make_rgs",
    "map_to_circuit",
    "min_emitters",
    "simulate_forward",
    "verify_circuit",
]
