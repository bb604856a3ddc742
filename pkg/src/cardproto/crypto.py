"""Hash family, XOR and field encoding shared by every protocol computation.

All four one-way functions are SHA-256 over a one-octet domain prefix followed
by the length-prefixed encoding of the argument list::

    prefix || len32be(item_0) || item_0 || len32be(item_1) || item_1 ...

Items may be ``bytes``, ``str`` (rendered as UTF-8) or ``int`` (a 64-bit
timestamp, rendered as 8 big-endian octets).
"""

from __future__ import annotations

import hashlib
import struct
from enum import IntEnum
from typing import Iterable, Union

DIGEST_SIZE = 32
MAX_ITEM_LEN = 2**32 - 1

Field = Union[bytes, str, int]


class EncodingError(ValueError):
    pass


class Digest(bytes):
    """A 32-octet hash output. Compares and hashes like plain ``bytes``."""

    def __new__(cls, value: bytes = bytes(DIGEST_SIZE)) -> "Digest":
        if len(value) != DIGEST_SIZE:
            raise ValueError(f"digest must be {DIGEST_SIZE} octets, got {len(value)}")
        return super().__new__(cls, value)

    @classmethod
    def fromhex(cls, text: str) -> "Digest":  # type: ignore[override]
        return cls(bytes.fromhex(text))

    def __repr__(self) -> str:
        return f"Digest({self.hex()[:16]}...)"


ZERO = Digest()


class HashDomain(IntEnum):
    H = 0x01
    H1 = 0x02
    H2 = 0x03
    H3 = 0x04

    @property
    def prefix(self) -> bytes:
        return bytes([self.value])


def render(item: Field) -> bytes:
    if isinstance(item, (bytes, bytearray)):
        return bytes(item)
    if isinstance(item, str):
        return item.encode("utf-8")
    if isinstance(item, int) and not isinstance(item, bool):
        if not 0 <= item < 2**64:
            raise EncodingError(f"timestamp out of u64 range: {item}")
        return struct.pack(">Q", item)
    raise TypeError(f"cannot encode field of type {type(item).__name__}")


def encode_item(item: Field) -> bytes:
    raw = render(item)
    if len(raw) > MAX_ITEM_LEN:
        raise EncodingError("field longer than 2**32 - 1 octets")
    return struct.pack(">I", len(raw)) + raw


def encode_fields(fields: Iterable[Field]) -> bytes:
    """Length-prefixed concatenation; injective over field lists."""
    return b"".join(encode_item(f) for f in fields)


def hash(domain: HashDomain, fields: Iterable[Field] = ()) -> Digest:  # noqa: A001
    return Digest(hashlib.sha256(domain.prefix + encode_fields(fields)).digest())


def xor(a: bytes, b: bytes) -> Digest:
    if len(a) != DIGEST_SIZE or len(b) != DIGEST_SIZE:
        raise ValueError("xor operands must both be 32 octets")
    n = int.from_bytes(a, "big") ^ int.from_bytes(b, "big")
    return Digest(n.to_bytes(DIGEST_SIZE, "big"))
