class DreamError(Exception):
    """Base class for every error raised by the package."""


class EvaluationError(DreamError):
    pass


class ModelError(DreamError):
    """Ill-formed component type, instance, map or configuration."""


class FiringError(DreamError):
    pass


class UniverseTooLarge(DreamError):
    pass


class WellFormednessError(DreamError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class Quiescent(DreamError):
    """No candidate interaction exists in the current configuration."""
