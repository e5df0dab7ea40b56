"""Exception hierarchy shared by all engine modules.

Every error carries a stable ``code`` string that the session protocol
reuses as its wire-level error code, so transports never need to map
exception types by hand.
"""


class EngineError(Exception):
    code = "engine_error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ParseError(EngineError):
    """Malformed document (map, weight table, graph, book, challenge)."""

    code = "parse_error"

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class RegistryError(EngineError):
    code = "unknown_block"


class BoundsError(EngineError):
    code = "out_of_bounds"


class ArgumentError(EngineError):
    code = "bad_argument"


class ConstraintError(EngineError):
    code = "constraint_violation"


class StateError(EngineError):
    code = "bad_state"


class StalenessError(EngineError):
    """Terrain changed after the last run; results no longer apply."""

    code = "stale_run"


class GateError(EngineError):
    code = "gate_locked"


class OracleError(EngineError):
    code = "oracle_cap"


class ProtocolError(EngineError):
    code = "bad_message"
