"""Tagged-record wire form for protocol messages: digests and nonces as hex,
timestamps as decimal integers."""

from __future__ import annotations

import dataclasses
from typing import Any, Dict, Type

from .crypto import Digest

_REGISTRY: Dict[str, Type] = {}


def message(tag: str):
    """Class decorator registering a frozen dataclass as a wire message."""

    def wrap(cls):
        cls.WIRE_TAG = tag
        _REGISTRY[tag] = cls
        return cls

    return wrap


def to_wire(msg: Any) -> Dict[str, Any]:
    out: Dict[str, Any] = {"type": msg.WIRE_TAG}
    for f in dataclasses.fields(msg):
        v = getattr(msg, f.name)
        out[f.name] = v.hex() if isinstance(v, bytes) else v
    return out


def from_wire(data: Dict[str, Any]) -> Any:
    try:
        cls = _REGISTRY[data["type"]]
    except KeyError:
        raise ValueError(f"unknown message type {data.get('type')!r}") from None
    kwargs = {}
    for f in dataclasses.fields(cls):
        v = data[f.name]
        if f.type in ("Digest", Digest):
            v = Digest.fromhex(v)
        elif f.type in ("bytes", bytes):
            v = bytes.fromhex(v)
        kwargs[f.name] = v
    return cls(**kwargs)
