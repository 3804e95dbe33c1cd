"""Exception types raised across the package."""


class ArenaError(Exception):
    """Base class for all package errors."""


class DomainError(ArenaError, ValueError):
    """A numeric input was outside the domain of a rating formula."""


class ValidationError(ArenaError, ValueError):
    """Invalid configuration or malformed arguments."""


class TemplateError(ArenaError, KeyError):
    """A prompt template references a placeholder that was not supplied."""

    def __init__(self, placeholder: str, template: str = ""):
        self.placeholder = placeholder
        self.template = template
        where = f" in template {template!r}" if template else ""
        super().__init__(f"missing placeholder {{{placeholder}}}{where}")

    def __str__(self) -> str:
        return self.args[0]


class ParseError(ArenaError, ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class CurveUndefinedError(ArenaError, ValueError):
    """A curve or area was requested for data lacking a required class."""


class CheckpointError(ArenaError):
    """A checkpoint file is missing, truncated or otherwise unreadable."""


class JudgeSetupError(ArenaError):
    """A judge could not be configured (missing credentials, bad parameters)."""
