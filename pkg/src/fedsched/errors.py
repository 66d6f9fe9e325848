"""Exception hierarchy shared by every module."""


class FedSchedError(Exception):
    """Base class for all errors raised by fedsched."""


class NoRouteError(FedSchedError):
    """Destination unreachable from the source within a snapshot."""

    def __init__(self, src, dst, window_index=None, clients=()):
        self.src = src
        self.dst = dst
        self.window_index = window_index
        self.clients = tuple(clients)
        where = "" if window_index is None else f" in window {window_index}"
        super().__init__(f"no route from {src} to {dst}{where}")


class EmptyPathError(FedSchedError, ValueError):
    pass


class OutOfHorizonError(FedSchedError):
    def __init__(self, time_s, horizon_s):
        self.time_s = time_s
        self.horizon_s = horizon_s
        super().__init__(f"time {time_s:.6f}s is outside the temporal-graph horizon [0, {horizon_s:.6f})")


class WindowOverrunError(FedSchedError):
    """Raised in strict mode when a transmission outlives its snapshot."""


class ZeroBandwidthError(FedSchedError, ValueError):
    pass


class UnknownClientError(FedSchedError, KeyError):
    pass


class TooManyClientsError(FedSchedError):
    pass


class MissingPolicyError(FedSchedError):
    pass


class ScenarioError(FedSchedError, ValueError):
    """Malformed scenario, plan, graph or schedule file. ``field`` names the offender."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class TransmissionOverrunWarning(UserWarning):
    """A transmission pinned to one snapshot extends past that snapshot's window."""
