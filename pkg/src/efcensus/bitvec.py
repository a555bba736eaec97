"""Huge fixed-length bit vectors with in-place shift-OR and exact popcount.

A SumsBitmap is the indicator of a set of integers in [0, length): bit i is
set when i belongs to the set.  The census engine uses it to hold numerators
of distinct subset sums over a common denominator, where inserting a new
denominator n is exactly ``b |= b << (lcm/n)``.

The shift-OR runs in place, processing destination words from the highest
block downward so every source word is consumed before it can be overwritten;
this halves peak memory against double-buffering, which is the binding
constraint for large runs.  Block temporaries keep the working set small and
the result is bit-identical to the one-word-at-a-time definition.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import CapacityError, format_bytes

_WORD = 64
_BLOCK_WORDS = 1 << 20  # 8 MB per block temporary
_MAGIC = b"EFBM"
_VERSION = 1
_HEADER = struct.Struct("<4sIQ")  # magic, version, bit length


class SumsBitmap:
    """Fixed-length bitmap over numpy uint64 words.

    `unit` is optional metadata recording the common denominator the bit
    indices are scaled by; it does not affect any operation here.
    """

    __slots__ = ("length", "words", "unit", "_max_bit")

    def __init__(self, length: int, unit: int | None = None,
                 budget: int | None = None):
        if length < 1:
            raise ValueError(f"length must be >= 1, got {length}")
        nwords = (length + _WORD - 1) // _WORD
        required = nwords * 8
        if budget is not None and required > budget:
            raise CapacityError(
                f"bitmap of {length} bits needs {format_bytes(required)}, "
                f"over the {format_bytes(budget)} budget",
                required_bytes=required,
            )
        self.length = int(length)
        self.words = np.zeros(nwords, dtype=np.uint64)
        self.unit = unit
        self._max_bit = -1  # exact when only untruncated ops ran, else an upper bound

    # -- single-bit access ------------------------------------------------

    def set_bit(self, i: int) -> None:
        if not 0 <= i < self.length:
            raise ValueError(f"bit {i} out of range [0, {self.length})")
        self.words[i >> 6] |= np.uint64(1) << np.uint64(i & 63)
        if i > self._max_bit:
            self._max_bit = i

    def get_bit(self, i: int) -> bool:
        if not 0 <= i < self.length:
            raise ValueError(f"bit {i} out of range [0, {self.length})")
        return bool((int(self.words[i >> 6]) >> (i & 63)) & 1)

    # -- bulk operations ---------------------------------------------------

    def shift_or_inplace(self, shift: int, truncate: bool = False) -> "SumsBitmap":
        """b <- b OR (b << shift); bits pushed past length error, or are
        dropped when truncate is on."""
        if shift < 1:
            raise ValueError(f"shift must be >= 1, got {shift}")
        if self._max_bit < 0:
            return self
        new_max = self._max_bit + shift
        if new_max >= self.length:
            if not truncate:
                raise OverflowError(
                    f"shift {shift} pushes bit {self._max_bit} to {new_max}, "
                    f"past length {self.length}"
                )
            new_max = self.length - 1
        w, r = divmod(shift, _WORD)
        words = self.words
        a0 = shift >> 6
        a1 = new_max >> 6
        end = a1 + 1
        while end > a0:
            start = max(a0, end - _BLOCK_WORDS)
            if r == 0:
                src = self._read_words(start - w, end - w)
                words[start:end] |= src
            else:
                src = self._read_words(start - w - 1, end - w)
                rs = np.uint64(r)
                ls = np.uint64(_WORD - r)
                words[start:end] |= (src[1:] << rs) | (src[:-1] >> ls)
            end = start
        if truncate:
            tail = self.length & 63
            if tail:
                self.words[-1] &= (np.uint64(1) << np.uint64(tail)) - np.uint64(1)
        self._max_bit = new_max
        return self

    def _read_words(self, lo: int, hi: int) -> np.ndarray:
        """Copy of words[lo:hi] with zero padding for lo < 0."""
        if lo >= 0:
            return self.words[lo:hi].copy()
        out = np.zeros(hi - lo, dtype=np.uint64)
        out[-lo:] = self.words[0:hi]
        return out

    def popcount(self) -> int:
        if self._max_bit < 0:
            return 0
        top = (self._max_bit >> 6) + 1
        return int(np.bitwise_count(self.words[:top]).sum(dtype=np.int64))

    def popcount_below(self, stop: int) -> int:
        """Number of set bits at indices < stop."""
        if not 0 <= stop <= self.length:
            raise ValueError(f"stop {stop} out of range [0, {self.length}]")
        if stop == 0 or self._max_bit < 0:
            return 0
        stop = min(stop, self._max_bit + 1)
        full, tail = divmod(stop, _WORD)
        total = int(np.bitwise_count(self.words[:full]).sum(dtype=np.int64))
        if tail:
            mask = (np.uint64(1) << np.uint64(tail)) - np.uint64(1)
            total += int(np.bitwise_count(self.words[full] & mask))
        return total

    def and_inplace(self, other: "SumsBitmap") -> "SumsBitmap":
        if other.length != self.length:
            raise ValueError("length mismatch in AND")
        self.words &= other.words
        self._max_bit = min(self._max_bit, other._max_bit)  # upper bound
        return self

    def set_bits(self) -> list[int]:
        """Sorted indices of all set bits (intended for small bitmaps)."""
        out: list[int] = []
        for wi in np.nonzero(self.words)[0].tolist():
            word = int(self.words[wi])
            base = wi << 6
            while word:
                low = word & -word
                out.append(base + low.bit_length() - 1)
                word ^= low
        return out

    @property
    def nbytes(self) -> int:
        return self.words.nbytes

    def __repr__(self) -> str:
        return (f"SumsBitmap(length={self.length}, popcount={self.popcount()}, "
                f"unit={self.unit})")

    # -- checkpoint format --------------------------------------------------

    def dump(self, path: str | Path) -> None:
        """Write header (magic, version, bit length) plus little-endian words."""
        with open(path, "wb") as f:
            f.write(_HEADER.pack(_MAGIC, _VERSION, self.length))
            f.write(self.words.astype("<u8", copy=False).tobytes())

    @classmethod
    def load(cls, path: str | Path, budget: int | None = None) -> "SumsBitmap":
        with open(path, "rb") as f:
            header = f.read(_HEADER.size)
            if len(header) != _HEADER.size:
                raise ValueError("truncated bitmap file: short header")
            magic, version, length = _HEADER.unpack(header)
            if magic != _MAGIC:
                raise ValueError(f"bad magic {magic!r}")
            if version != _VERSION:
                raise ValueError(f"unsupported version {version}")
            b = cls(length, budget=budget)
            raw = f.read(b.words.nbytes + 1)
        if len(raw) != b.words.nbytes:
            raise ValueError("bitmap file length does not match header")
        b.words[:] = np.frombuffer(raw, dtype="<u8")
        nz = np.nonzero(b.words)[0]
        if nz.size:
            top = int(nz[-1])
            b._max_bit = (top << 6) + int(b.words[top]).bit_length() - 1
            if b._max_bit >= length:
                raise ValueError("file sets bits beyond declared length")
        return b
