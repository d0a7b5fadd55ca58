"""Exception types shared across the package."""


class FrameError(ValueError):
    """Malformed or out-of-range frame."""


class LengthOverflow(FrameError):
    pass


class BadSfd(FrameError):
    pass


class Truncated(FrameError):
    pass


class TooShort(FrameError):
    pass


class ConfigError(ValueError):
    """Invalid PHY or scheduler configuration."""


class RegisterError(Exception):
    """Base class for register access failures."""


class UnknownRegister(RegisterError, KeyError):
    pass


class ReadOnlyRegister(RegisterError):
    pass


class IllegalValue(RegisterError, ConfigError):
    pass


class SchedulerError(Exception):
    pass


class RingFull(SchedulerError):
    pass


class UnknownHandle(SchedulerError, KeyError):
    pass


class TimeInPast(SchedulerError):
    pass
