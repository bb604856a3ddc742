"""Pure-Python password-guess scan; reference for the compiled kernel."""

import hashlib
import struct

BACKEND = "python"


def scan_guesses(words, x_i, mask_prefix, check_prefix, check_suffix, target):
    """Return the index of the first word that reproduces ``target``, else -1.

    For each word ``w``::

        r = x_i xor SHA256(mask_prefix || len32be(w) || w)
        hit iff SHA256(check_prefix || r || check_suffix) == target
    """
    if len(x_i) != 32 or len(target) != 32:
        raise ValueError("x_i and target must be 32 octets")
    x = int.from_bytes(x_i, "big")
    mask_base = hashlib.sha256(mask_prefix)
    check_base = hashlib.sha256(check_prefix)
    for i, w in enumerate(words):
        h = mask_base.copy()
        h.update(struct.pack(">I", len(w)))
        h.update(w)
        r = (int.from_bytes(h.digest(), "big") ^ x).to_bytes(32, "big")
        c = check_base.copy()
        c.update(r)
        c.update(check_suffix)
        if c.digest() == target:
            return i
    return -1
