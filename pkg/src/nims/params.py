"""Scheme parameters."""

from dataclasses import dataclass

from .errors import ParameterError

DEFAULT_LAMBDA = 256
DEFAULT_IOTA = 64
DEFAULT_KAPPA = 32


@dataclass(frozen=True)
class SchemeParams:
    """Sizes shared by the owner, users and (partly) the server.

    ``lambda_bits`` is the security parameter, ``iota`` the keyword-hash
    width, ``kappa`` the timestamp width and ``genesis`` the epoch-seconds
    origin that maps wall-clock time onto ``[0, 2**kappa)``.
    """

    lambda_bits: int = DEFAULT_LAMBDA
    iota: int = DEFAULT_IOTA
    kappa: int = DEFAULT_KAPPA
    genesis: int = 0

    def __post_init__(self):
        if self.lambda_bits <= 0 or self.lambda_bits % 8:
            raise ParameterError("lambda_bits must be a positive multiple of 8")
        if self.lambda_bits > 256:
            # H1 is SHA-512: 2*lambda bits must fit in one digest
            raise ParameterError("lambda_bits must be at most 256")
        if self.iota < 8 or self.iota > 256:
            raise ParameterError("iota must be in [8, 256]")
        if self.kappa < 1 or self.kappa > 63:
            raise ParameterError("kappa must be in [1, 63]")
        if self.genesis < 0:
            raise ParameterError("genesis must be non-negative")

    @property
    def n(self) -> int:
        """Matrix dimension: keyword bits + time bits + trailing entry + key slot."""
        return self.iota + self.kappa + 2

    @property
    def key_bytes(self) -> int:
        return self.lambda_bits // 8

    @property
    def block_bytes(self) -> int:
        return 2 * self.lambda_bits // 8

    @property
    def max_ts(self) -> int:
        return (1 << self.kappa) - 1
