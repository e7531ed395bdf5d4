"""Exception hierarchy shared by every layer of the package."""


class NimsError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(NimsError, ValueError):
    """An argument violates a precondition (width, range, length)."""


class AuthenticationError(NimsError):
    """A ciphertext failed its integrity check (tampered or wrong key)."""


class CiphertextFormatError(NimsError):
    """A ciphertext is too short or otherwise unparsable."""


class IntegrityError(NimsError):
    """A recovered value is outside the range the scheme can produce."""


class BrokenChainError(NimsError):
    """A chain walk hit a nonzero key whose block is missing.

    ``partial`` holds the data fields collected before the break.
    """

    def __init__(self, message, partial=()):
        super().__init__(message)
        self.partial = list(partial)


class EpochExhaustedError(NimsError):
    """The timestamp no longer fits in ``kappa`` bits."""


class DuplicateAddressError(NimsError):
    """An add batch tried to overwrite an existing server address."""


class ResultIntegrityError(NimsError):
    """A search result failed to decrypt.

    ``index`` is the position of the failing ciphertext in the result list.
    """

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class FormatError(NimsError):
    """A serialized blob (state file, snapshot, frame body) is malformed."""


class ProtocolError(NimsError):
    """The peer sent something outside the wire protocol."""


class FrameTooLargeError(ProtocolError):
    """A frame exceeds the 256 MiB cap."""


class RemoteError(NimsError):
    """The server answered with an ERROR frame."""

    def __init__(self, code, message):
        super().__init__(f"server error {code}: {message}")
        self.code = code
        self.remote_message = message


class TransportTimeout(NimsError, TimeoutError):
    """The server did not answer within the configured timeout."""


class TransportConnectionError(NimsError, ConnectionError):
    """The server could not be reached or dropped the connection."""
