"""Executable models of two smart-card remote user authentication schemes
(timestamp-based and nonce-based) and the attacks that break them once a
card's stored values are extracted."""

from .crypto import Digest, HashDomain, encode_fields, hash, xor
from .enrollment import (Reason, Rejected, ServerState, SmartCard, card_local_check,
                         change_password, register_user)
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "Digest", "HashDomain", "encode_fields", "hash", "xor",
    "Reason", "Rejected", "ServerState", "SmartCard", "card_local_check",
    "change_password", "register_user", "KERNEL_BACKEND",
]
