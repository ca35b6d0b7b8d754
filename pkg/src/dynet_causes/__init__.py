"""Counterfactual causal explanations for hazards in DyNetKAT network models."""

from importlib import resources

from .causality import CauseOptions, CauseReport, compute_causes
from .errors import DynetError
from .language import load_spec, parse_spec, pretty_print
from .lts import build_lts, export_lts

__version__ = "0.1.0"

RUNNING_EXAMPLE_HAZARD = (
    "proc(s1,s2) ; (!send(VirtualCircuitEnd,one))* ; proc(s3,s4) ; any*"
)


def running_example_text() -> str:
    """Source of the bundled virtual-circuit specification."""
    return resources.files(__package__).joinpath("data/virtual_circuit.dnk").read_text(encoding="utf-8")


__all__ = [
    "CauseOptions",
    "CauseReport",
    "DynetError",
    "RUNNING_EXAMPLE_HAZARD",
    "build_lts",
    "compute_causes",
    "export_lts",
    "load_spec",
    "parse_spec",
    "pretty_print",
    "running_example_text",
]
