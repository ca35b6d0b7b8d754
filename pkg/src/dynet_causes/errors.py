"""Exception hierarchy shared by every pipeline stage.

Each error carries a ``stage`` tag so the CLI can print a stable prefix
(``io:``, ``parse:``, ``validate:`` ...) and pick an exit code.
"""

from __future__ import annotations


class DynetError(Exception):
    stage = "error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is not None:
            return f"line {self.line}, column {self.column}: {self.message}"
        return self.message

    def diagnostic(self) -> str:
        return f"{self.stage}: {self}"


class SpecSyntaxError(DynetError):
    """Lexical or grammatical error in a specification file."""

    stage = "parse"


class SchemaError(DynetError):
    """A packet, test or assignment does not conform to the field schema."""

    stage = "validate"


class GuardednessError(DynetError):
    stage = "validate"

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        path = " -> ".join(self.cycle + self.cycle[:1])
        super().__init__(f"unguarded recursion through [{', '.join(self.cycle)}] ({path})")


class CapacityError(DynetError):
    """Packet space too large for exhaustive comparison."""

    stage = "capacity"


class StateBudgetExceeded(DynetError):
    stage = "budget"

    def __init__(self, max_states: int, frontier: int):
        self.max_states = max_states
        self.frontier = frontier
        super().__init__(
            f"state budget of {max_states} exceeded with {frontier} configurations still on the frontier"
        )


class HazardSyntaxError(DynetError):
    stage = "hazard"


class AlphabetMismatch(DynetError):
    stage = "product"

    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__("hazard automaton lacks LTS labels: " + ", ".join(self.missing))
