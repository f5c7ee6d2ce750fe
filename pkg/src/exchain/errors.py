"""Error types shared across the toolkit.

Grouped in one module so callers can catch the base class, or a specific
failure mode, without importing the module that raised it.
"""

from __future__ import annotations


class ExchainError(Exception):
    """Base class for every error raised by this package."""


# --- documentation ingestion ---------------------------------------------

class MalformedClause(ExchainError):
    """Text passed off as a Throws clause that cannot be parsed as one."""


class PageStructureError(ExchainError):
    """No method declaration could be located on a documentation page."""


# --- knowledge-base files --------------------------------------------------

class FormatVersionMismatch(ExchainError):
    """A knowledge-base file declares a version this build cannot read."""


class SchemaViolation(ExchainError):
    """A knowledge-base record breaks the file schema or an invariant.

    The offending record is kept on the exception for diagnostics.
    """

    def __init__(self, message: str, record: object = None):
        super().__init__(message)
        self.record = record


# --- source analysis --------------------------------------------------------

class ParseError(ExchainError):
    """Source text falls outside the supported Java subset."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class UnresolvedCall(ExchainError):
    """Handling detection was asked about a call that is not resolved."""


class NoRelevantApis(ExchainError):
    """No resolved call site carries knowledge-base specifications."""


# --- prompt construction ----------------------------------------------------

class EmptyItems(ExchainError):
    """An exception prompt was requested without any items to describe."""


# --- chat client -------------------------------------------------------------

class ReplayMiss(ExchainError):
    """Strict replay found no cassette entry for a request digest."""

    def __init__(self, digest: str):
        super().__init__(f"no cassette entry for request digest {digest}")
        self.digest = digest


class TransportError(ExchainError):
    """The endpoint could not be reached, after retries where applicable."""

    def __init__(self, message: str, retries: int = 0):
        super().__init__(message)
        self.retries = retries


class EndpointError(ExchainError):
    """The endpoint answered with an error status."""

    def __init__(self, status: int, body_excerpt: str = ""):
        super().__init__(f"endpoint returned status {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


# --- chain and evaluation ----------------------------------------------------

class LlmError(ExchainError):
    """A chain step failed on the client side; carries the loop index."""

    def __init__(self, message: str, loop_index: int):
        super().__init__(f"loop {loop_index}: {message}")
        self.loop_index = loop_index


class ChainAbort(ExchainError):
    """The deterministic checker rejected generated code mid-chain.

    The transcript up to the failure and the offending code are retained.
    """

    def __init__(self, message: str, transcript, code: str, loop_index: int):
        super().__init__(message)
        self.transcript = tuple(transcript)
        self.code = code
        self.loop_index = loop_index


class UnparseableVerdict(ExchainError):
    """A yes/no answer contained neither an affirmative nor a negative."""


class EmptyResults(ExchainError):
    """A statistics routine was handed an empty result list."""
