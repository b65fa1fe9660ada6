"""Exception hierarchy shared across the simulator."""


class RadSimError(Exception):
    """Base class for all simulator errors."""


# --- configuration / parsing ------------------------------------------------

class ConfigError(RadSimError):
    """Raised while parsing an architecture file; carries the offending line."""

    def __init__(self, message, line_no=None, line=None):
        self.line_no = line_no
        self.line = line
        if line_no is not None:
            message = f"line {line_no}: {message}" + (f" [{line!r}]" if line else "")
        super().__init__(message)


class UnknownKey(ConfigError):
    pass


class MissingRequiredKey(ConfigError):
    pass


class MalformedValue(ConfigError):
    pass


# --- placement --------------------------------------------------------------

class PlacementError(ConfigError):
    pass


class DuplicatePort(PlacementError):
    pass


class RouterOutOfRange(PlacementError):
    pass


class OversubscribedRouter(PlacementError):
    pass


# --- simulation construction ------------------------------------------------

class BuildError(RadSimError):
    pass


class UnplacedPort(BuildError):
    pass


class DomainMismatch(BuildError):
    pass


class KindMismatch(BuildError):
    pass


# --- NoC / adapter runtime --------------------------------------------------

class InvalidRouter(RadSimError):
    pass


class CreditOverflow(RadSimError):
    """Simulator bug: a credit counter exceeded the VC buffer depth."""


class ProtocolViolation(RadSimError):
    """Simulator bug: flit stream broke head/body/tail framing on a VC."""


class UnroutableDestination(RadSimError):
    pass


class OversizedTransaction(RadSimError):
    pass


class UnknownInterface(RadSimError):
    pass


# --- workload ---------------------------------------------------------------

class WorkloadError(RadSimError):
    pass


class OversizedWorkload(WorkloadError):
    pass


# --- telemetry --------------------------------------------------------------

class TelemetryError(RadSimError):
    pass


class UnknownTrace(TelemetryError):
    pass


class IncompleteTrace(TelemetryError):
    pass


class IncompleteRun(TelemetryError):
    pass


class LadderViolation(TelemetryError):
    """A trace's timestamp ladder is not monotonically non-decreasing."""


class IoFailure(TelemetryError):
    pass
