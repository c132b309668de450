"""Exception types raised across the package."""


class ArenaError(Exception):
    """Base class for every error raised by newsarena."""


# -- data ingest ------------------------------------------------------------

class DataError(ArenaError, ValueError):
    pass


class MalformedRow(DataError):
    def __init__(self, line: int, reason: str = ""):
        self.line = line
        super().__init__(f"malformed row at line {line}" + (f": {reason}" if reason else ""))


class MalformedLine(DataError):
    def __init__(self, line: int, reason: str = ""):
        self.line = line
        super().__init__(f"malformed line {line}" + (f": {reason}" if reason else ""))


class NonUniformSpacing(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class SeriesTooShort(DataError):
    pass


# -- metrics / evaluation -----------------------------------------------------

class LengthMismatch(ArenaError, ValueError):
    pass


class ZeroActualForMape(ArenaError, ValueError):
    pass


class NonPositiveScore(ArenaError, ValueError):
    pass


class TooFewAgents(ArenaError):
    pass


class KeyMismatch(ArenaError, KeyError):
    def __str__(self):  # KeyError repr-quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class AllWouldBeEliminated(ArenaError):
    pass


class NoPublications(ArenaError):
    pass


# -- gateway ------------------------------------------------------------------

class UnknownTemplate(ArenaError, KeyError):
    def __str__(self):
        return f"unknown template: {self.args[0]!r}" if self.args else "unknown template"


class MissingBinding(ArenaError, KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"missing binding: {self.name!r}"


class GatewayError(ArenaError):
    """Failure talking to a model backend."""


class Timeout(GatewayError, TimeoutError):
    pass


class RateLimited(GatewayError):
    pass


class BackendUnavailable(GatewayError):
    pass


class MalformedJson(GatewayError, ValueError):
    def __init__(self, message: str, text: str = ""):
        self.text = text
        super().__init__(message)


# -- logic / embeddings -------------------------------------------------------

class DimensionMismatch(ArenaError, ValueError):
    pass


class ZeroNorm(ArenaError, ValueError):
    pass


# -- communication / reflection / prediction ---------------------------------

class MalformedDisclosure(ArenaError, ValueError):
    pass


class DeadTarget(ArenaError):
    """A message named an agent that is no longer alive (logged, never raised by route)."""


class MalformedReflection(ArenaError, ValueError):
    pass


class PredictorFailure(ArenaError):
    pass


# -- orchestration ------------------------------------------------------------

class ConfigInvalid(ArenaError, ValueError):
    pass


class DataUnloadable(ArenaError):
    pass


class LedgerCorrupt(ArenaError):
    def __init__(self, index: int, reason: str = ""):
        self.index = index
        super().__init__(f"ledger record {index} is corrupt" + (f": {reason}" if reason else ""))
