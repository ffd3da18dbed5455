class PhaseEstimationError(Exception):
    """Base class for errors raised by sqzphase."""


class InvalidState(PhaseEstimationError, ValueError):
    pass


class NoPhaseInformation(PhaseEstimationError, ValueError):
    """The probe carries no phase information, so the requested bound diverges."""


class UninformativePosterior(PhaseEstimationError, ValueError):
    """The posterior is flat; there is no mode to report."""


class ConfigError(PhaseEstimationError, ValueError):
    """One or more configuration problems, all collected in ``errors``."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
