"""Exception hierarchy shared by the simulator, the policies and the harness."""


class WlanSimError(Exception):
    """Base class for every error raised by wlanbalance."""


class ScenarioError(WlanSimError):
    """A scenario file could not be turned into a valid Scenario.

    ``kind`` is one of ``"syntax"``, ``"unknown-field"``, ``"schema"`` or
    ``"invariant"``; ``location`` is a human readable path into the document
    (``"stations -> 2 -> traffic"``) or ``"line 4, column 7"`` for syntax errors.
    """

    def __init__(self, message: str, kind: str = "schema", location: str = ""):
        self.kind = kind
        self.location = location
        text = f"{message} (at {location})" if location else message
        super().__init__(text)


class ConfigurationError(WlanSimError):
    """A run was requested with an inconsistent network state or config."""


class UnknownEntityError(WlanSimError, KeyError):
    """Lookup of an access point, station, profile or rate tier failed."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown entity"


class UndefinedStatisticError(WlanSimError, ValueError):
    """A metric was requested on a sample too small to define it."""


class PolicyUsageError(WlanSimError):
    """A policy operation was invoked with a policy kind that does not support it."""


class ExperimentError(WlanSimError):
    """An experiment specification is empty, inconsistent or not applicable."""
