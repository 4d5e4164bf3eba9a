"""MD4 message digest (RFC 1320).

hashlib only exposes MD4 when the OpenSSL build ships the legacy provider,
so the digest is implemented here directly. It is used to shorten over-long
math tokens before indexing, not for anything security sensitive.
"""

import struct

_MASK = 0xFFFFFFFF

# (message word index, left-rotate amount) schedules for the three rounds
_ROUND1 = (
    (0, 3), (1, 7), (2, 11), (3, 19), (4, 3), (5, 7), (6, 11), (7, 19),
    (8, 3), (9, 7), (10, 11), (11, 19), (12, 3), (13, 7), (14, 11), (15, 19),
)
_ROUND2 = (
    (0, 3), (4, 5), (8, 9), (12, 13), (1, 3), (5, 5), (9, 9), (13, 13),
    (2, 3), (6, 5), (10, 9), (14, 13), (3, 3), (7, 5), (11, 9), (15, 13),
)
_ROUND3 = (
    (0, 3), (8, 9), (4, 11), (12, 15), (2, 3), (10, 9), (6, 11), (14, 15),
    (1, 3), (9, 9), (5, 11), (13, 15), (3, 3), (11, 9), (7, 11), (15, 15),
)


def _rotl(value: int, amount: int) -> int:
    return ((value << amount) | (value >> (32 - amount))) & _MASK


def _f(x: int, y: int, z: int) -> int:
    return (x & y) | (~x & z)


def _g(x: int, y: int, z: int) -> int:
    return (x & y) | (x & z) | (y & z)


def _h(x: int, y: int, z: int) -> int:
    return x ^ y ^ z


def _apply_round(regs: list[int], words, schedule, func, constant: int) -> None:
    # Register update order within every group of four steps is a, d, c, b.
    for step, (k, s) in enumerate(schedule):
        t = (0, 3, 2, 1)[step % 4]
        x, y, z = regs[(t + 1) % 4], regs[(t + 2) % 4], regs[(t + 3) % 4]
        regs[t] = _rotl((regs[t] + func(x, y, z) + words[k] + constant) & _MASK, s)


def _compress(state: tuple[int, int, int, int], block: bytes) -> tuple[int, int, int, int]:
    words = struct.unpack("<16I", block)
    regs = list(state)
    _apply_round(regs, words, _ROUND1, _f, 0x00000000)
    _apply_round(regs, words, _ROUND2, _g, 0x5A827999)
    _apply_round(regs, words, _ROUND3, _h, 0x6ED9EBA1)
    return tuple((s + r) & _MASK for s, r in zip(state, regs))


def md4_digest(data: bytes) -> bytes:
    """Return the 16-byte MD4 digest of ``data``."""
    state = (0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476)
    length = len(data)
    padded = data + b"\x80" + b"\x00" * ((55 - length) % 64)
    padded += struct.pack("<Q", (length * 8) & 0xFFFFFFFFFFFFFFFF)
    for offset in range(0, len(padded), 64):
        state = _compress(state, padded[offset:offset + 64])
    return struct.pack("<4I", *state)


def md4_hex(data: bytes) -> str:
    """Return the MD4 digest of ``data`` as 32 lowercase hex characters."""
    return md4_digest(data).hex()
