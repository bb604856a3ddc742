# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled password-guess scan over OpenSSL's SHA-256.

Same contract as ``cardproto._kernels_py.scan_guesses``.
"""

from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memcmp
from libc.stdint cimport uint8_t, uint32_t
from cpython.bytes cimport PyBytes_AS_STRING, PyBytes_GET_SIZE


cdef extern from "openssl/sha.h" nogil:
    ctypedef struct SHA256_CTX:
        pass
    int SHA256_Init(SHA256_CTX *c)
    int SHA256_Update(SHA256_CTX *c, const void *data, size_t len)
    int SHA256_Final(unsigned char *md, SHA256_CTX *c)


BACKEND = "cython"


cdef inline void _be32(uint8_t *out, uint32_t n) nogil:
    out[0] = (n >> 24) & 0xff
    out[1] = (n >> 16) & 0xff
    out[2] = (n >> 8) & 0xff
    out[3] = n & 0xff


def scan_guesses(list words, bytes x_i, bytes mask_prefix, bytes check_prefix,
                 bytes check_suffix, bytes target):
    if PyBytes_GET_SIZE(x_i) != 32 or PyBytes_GET_SIZE(target) != 32:
        raise ValueError("x_i and target must be 32 octets")
    cdef Py_ssize_t n = len(words)
    if n == 0:
        return -1
    cdef const char **ptrs = <const char **>malloc(n * sizeof(char *))
    cdef Py_ssize_t *lens = <Py_ssize_t *>malloc(n * sizeof(Py_ssize_t))
    if ptrs == NULL or lens == NULL:
        free(ptrs)
        free(lens)
        raise MemoryError()

    cdef Py_ssize_t i
    cdef object w
    try:
        for i in range(n):
            w = words[i]
            if not isinstance(w, bytes):
                raise TypeError("words must be bytes")
            ptrs[i] = PyBytes_AS_STRING(w)
            lens[i] = PyBytes_GET_SIZE(w)
            if lens[i] > 0xFFFFFFFF:
                raise ValueError("word too long")

        return _scan(ptrs, lens, n, x_i, mask_prefix, check_prefix, check_suffix, target)
    finally:
        free(ptrs)
        free(lens)


cdef Py_ssize_t _scan(const char **ptrs, Py_ssize_t *lens, Py_ssize_t n, bytes x_i,
                      bytes mask_prefix, bytes check_prefix, bytes check_suffix,
                      bytes target):
    cdef SHA256_CTX mask_base, check_base, ctx
    cdef uint8_t lenbuf[4]
    cdef uint8_t md[32]
    cdef uint8_t x[32]
    cdef uint8_t tgt[32]
    cdef const char *suffix = PyBytes_AS_STRING(check_suffix)
    cdef Py_ssize_t suffix_len = PyBytes_GET_SIZE(check_suffix)
    cdef Py_ssize_t i, found = -1
    cdef int k

    memcpy(x, PyBytes_AS_STRING(x_i), 32)
    memcpy(tgt, PyBytes_AS_STRING(target), 32)
    SHA256_Init(&mask_base)
    SHA256_Update(&mask_base, PyBytes_AS_STRING(mask_prefix), PyBytes_GET_SIZE(mask_prefix))
    SHA256_Init(&check_base)
    SHA256_Update(&check_base, PyBytes_AS_STRING(check_prefix), PyBytes_GET_SIZE(check_prefix))

    with nogil:
        for i in range(n):
            memcpy(&ctx, &mask_base, sizeof(SHA256_CTX))
            _be32(lenbuf, <uint32_t>lens[i])
            SHA256_Update(&ctx, lenbuf, 4)
            SHA256_Update(&ctx, ptrs[i], lens[i])
            SHA256_Final(md, &ctx)
            for k in range(32):
                md[k] ^= x[k]
            memcpy(&ctx, &check_base, sizeof(SHA256_CTX))
            SHA256_Update(&ctx, md, 32)
            SHA256_Update(&ctx, suffix, suffix_len)
            SHA256_Final(md, &ctx)
            if memcmp(md, tgt, 32) == 0:
                found = i
                break
    return found
