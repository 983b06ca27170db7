"""Error types and the engine's certification switch."""
import logging
import threading

logger = logging.getLogger(__name__)

_certify = False
_certify_lock = threading.Lock()


class NonHomogeneousError(ValueError):
    """A generator or matrix entry is not homogeneous."""


class CertificateError(RuntimeError):
    """An engine self-check failed; the result is not trustworthy."""


class SessionError(ValueError):
    """Problem in a session file, with a 1-based position when known."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class UndefinedNameError(SessionError):
    def __init__(self, name, kind="name", line=None, column=None):
        self.name = name
        super().__init__(f"undefined {kind} '{name}'", line, column)


def set_certification(enabled: bool):
    """Turn post-hoc certificate checks on or off for the whole engine."""
    global _certify
    with _certify_lock:
        _certify = bool(enabled)
    logger.debug(f"Certification {'enabled' if enabled else 'disabled'}")


def certification_enabled() -> bool:
    return _certify


def certify(condition, message):
    """Raise CertificateError when certification is on and condition fails.

    condition may be a zero-argument callable so expensive checks are skipped
    when certification is off.
    """
    if not _certify:
        return
    ok = condition() if callable(condition) else condition
    if not ok:
        logger.error(f"Certificate failed: {message}")
        raise CertificateError(message)
