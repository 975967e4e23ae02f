"""Exception classes shared by all pipeline stages.

The CLI maps them to exit codes: configuration problems exit with 1, bad
input data with 2 and filesystem problems (any ``OSError``) with 3.
"""


class TransdirError(Exception):
    exit_code = 1


class ConfigError(TransdirError):
    """Invalid parameters or an experiment that cannot be set up."""

    exit_code = 1


class DataError(TransdirError):
    """Input data violates a format or consistency contract."""

    exit_code = 2

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
