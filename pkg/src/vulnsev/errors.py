"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI:
    2  usage errors (bad flags, bad config values)
    3  data errors (datasets, vector files, unparseable code)
    4  provider errors (transport, HTTP status, bad response bodies)
    5  anything else
"""


class VulnsevError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(VulnsevError):
    """Invalid configuration or parameter value."""

    exit_code = 2


class DataError(VulnsevError):
    """Invalid or inconsistent input data."""

    exit_code = 3


class DatasetError(DataError):
    """Malformed dataset file or record."""


class ScoreRangeError(DataError):
    """CVSS score outside [0.0, 10.0]."""


class NoSeverityError(DataError):
    """CVSS score in [0.0, 0.1): the 'None' band, outside the four levels."""


class ParseFailure(DataError):
    """Source code could not be parsed into a syntax tree."""


class VectorFormatError(DataError):
    """Vector file violates the VEC1 binary format."""


class MissingVectorError(DataError):
    """A record id has no stored embedding vector."""


class ProviderError(VulnsevError):
    """Base class for LLM provider failures."""

    exit_code = 4


class TransportError(ProviderError):
    """Network failure or timeout after exhausting retries."""


class ProviderHttpError(ProviderError):
    """Non-2xx HTTP response from the provider."""

    def __init__(self, status: int, body: str = ""):
        super().__init__(f"provider returned HTTP {status}")
        self.status = status
        self.body = body


class ProtocolError(ProviderError):
    """Response body does not follow the chat-completion schema."""


class BudgetError(UsageError):
    """Token budget too small to hold even the minimal prompt skeleton."""
