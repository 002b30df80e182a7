"""Exception hierarchy shared by every module."""


class RTIError(Exception):
    """Base class for all simulator errors."""


class ForbiddenTransition(RTIError):
    pass


class GroundStateEmitter(RTIError):
    pass


class NoAbsorbers(RTIError):
    """Every offer component was pruned: no offer wave exists at all."""


class ChannelMismatch(RTIError):
    pass


class EnergyMismatch(RTIError):
    pass


class NoEligible(RTIError):
    pass


class InvalidAlpha(RTIError):
    pass


class InvalidThresholds(RTIError):
    pass


class InvalidTarget(RTIError):
    pass


class DuplicateEvent(RTIError):
    pass


class UnknownEvent(RTIError):
    pass


class CycleDetected(RTIError):
    pass


class ScenarioError(RTIError):
    """Scenario-level validation failure (bad ids, empty emitter list, ...)."""


class SchemaError(ScenarioError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class NormalizationError(ScenarioError):
    pass
