"""Simulator and exposed-key cryptanalysis toolkit for the alpha-eta (Y-00) cipher."""

__version__ = "0.1.0"

from .channel import ChannelParams, compose_eta, sigma, transmit  # noqa: E402
from .errors import (  # noqa: E402
    AlphaEtaError,
    ConfigError,
    DegenerateSeedError,
    InfeasibleSizeError,
    InvalidParameterError,
    InvalidTapsError,
    NeedsMoreDataError,
)
from .keystream import SecretKey, new_generator, next_basis, next_bits  # noqa: E402
from .protocol import (  # noqa: E402
    additive_decrypt,
    additive_encrypt,
    bob_decode,
    encode_message,
    encode_symbol,
    eve_naive_decode,
)

__all__ = [
    "AlphaEtaError", "ChannelParams", "ConfigError", "DegenerateSeedError",
    "InfeasibleSizeError", "InvalidParameterError", "InvalidTapsError",
    "NeedsMoreDataError", "SecretKey", "additive_decrypt", "additive_encrypt",
    "bob_decode", "compose_eta", "encode_message", "encode_symbol", "eve_naive_decode",
    "new_generator", "next_basis", "next_bits", "sigma", "transmit",
]
