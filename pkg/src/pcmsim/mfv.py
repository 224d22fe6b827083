"""Frequent-value detection and codeword assignment.

A small FIFO filter screens transient granule values; values whose saturation
counter fills up are promoted into the frequent-value (FV) table. Ranked
frequent values are mapped onto a reflected-Gray codeword chain so that
consecutively ranked values differ in exactly one bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError

FV_COUNTER_MAX = 2**31 - 1


@dataclass
class FifoEntry:
    value: int
    sat_counter: int = 1


@dataclass
class FvEntry:
    value: int = 0
    counter: int = 0
    pointer: int = 0
    used: bool = False


class MfvFinder:
    """FIFO filter plus frequent-value table.

    `generation` increments whenever the set of used FV values changes, which
    is the signal for consumers to rebuild their codebook.
    """

    def __init__(self, fifo_entries: int = 16, sat_max: int = 7,
                 replace_threshold: int = 1, fv_entries: int = 16):
        if fifo_entries <= 0 or fv_entries <= 0:
            raise ConfigError("finder tables need at least one entry")
        if sat_max <= 0 or replace_threshold < 0:
            raise ConfigError("bad finder thresholds")
        self.fifo_entries = fifo_entries
        self.sat_max = sat_max
        self.replace_threshold = replace_threshold
        self.fifo: list[FifoEntry] = []
        self.fv: list[FvEntry] = [FvEntry() for _ in range(fv_entries)]
        self._fv_index: dict[int, FvEntry] = {}
        self.generation = 0
        self.retire_misses = 0  # diagnostics: retire of an untracked value

    # -- observation ---------------------------------------------------------

    def observe(self, value: int) -> int | None:
        """Feed one granule value; returns the value if promoted into the FV table.

        FV-resident values just bump their access counter. A FIFO hit bumps
        the saturation counter and promotes at saturation if a Gap line is
        free; a miss decrements every counter and replaces the first entry
        below the threshold (or drops the value if none qualifies).
        """
        entry = self._fv_index.get(value)
        if entry is not None:
            if entry.counter < FV_COUNTER_MAX:
                entry.counter += 1
            return None

        for i, f in enumerate(self.fifo):
            if f.value == value:
                if f.sat_counter < self.sat_max:
                    f.sat_counter += 1
                if f.sat_counter >= self.sat_max and self._install(value):
                    del self.fifo[i]
                    return value
                return None

        # miss: decay every candidate, then try to place the newcomer
        for f in self.fifo:
            if f.sat_counter > 0:
                f.sat_counter -= 1
        if len(self.fifo) < self.fifo_entries:
            self.fifo.append(FifoEntry(value))
        else:
            for f in self.fifo:
                if f.sat_counter < self.replace_threshold:
                    f.value = value
                    f.sat_counter = 1
                    break
        return None

    def _install(self, value: int) -> bool:
        for e in self.fv:
            if not e.used:
                e.value = value
                e.counter = 0
                e.pointer = 0
                e.used = True
                self._fv_index[value] = e
                self.generation += 1
                return True
        return False

    # -- reference counting --------------------------------------------------

    def add_reference(self, value: int) -> bool:
        """Record one more stored block relying on `value`; False if untracked."""
        entry = self._fv_index.get(value)
        if entry is None:
            return False
        entry.pointer += 1
        return True

    def retire_reference(self, value: int) -> None:
        """Drop one block reference; the entry becomes a Gap at pointer zero."""
        entry = self._fv_index.get(value)
        if entry is None or entry.pointer <= 0:
            self.retire_misses += 1
            return
        entry.pointer -= 1
        if entry.pointer == 0:
            entry.used = False
            del self._fv_index[value]
            self.generation += 1

    # -- queries ---------------------------------------------------------------

    def is_frequent(self, value: int) -> bool:
        return value in self._fv_index

    def ranked_values(self) -> list[int]:
        """Used FV values ordered by access counter (descending, value tiebreak)."""
        used = [e for e in self.fv if e.used]
        used.sort(key=lambda e: (-e.counter, e.value))
        return [e.value for e in used]


# ---------------------------------------------------------------------------
# codebook

def gray_sequence(n: int) -> list[int]:
    """First n terms of the reflected Gray sequence 0, 1, 3, 2, 6, ..."""
    return [i ^ (i >> 1) for i in range(n)]


@dataclass(frozen=True)
class Codebook:
    """Bijective granule-value permutation with a distance-1 ranked chain."""

    granule_bits: int
    perm: tuple[int, ...]
    inv_perm: tuple[int, ...]
    ranked_mfvs: tuple[int, ...]
    version: int = 0

    def encode_granule(self, value: int) -> int:
        return self.perm[value]

    def decode_granule(self, codeword: int) -> int:
        return self.inv_perm[codeword]

    def enc_table(self) -> np.ndarray:
        return np.array(self.perm, dtype=np.uint8)

    def dec_table(self) -> np.ndarray:
        return np.array(self.inv_perm, dtype=np.uint8)

    def dump(self) -> str:
        """Versioned text table: one `rank value-hex codeword-hex` row per value."""
        lines = [f"codebook g={self.granule_bits} version={self.version}"]
        ranked = set(self.ranked_mfvs)
        for rank, v in enumerate(self.ranked_mfvs, 1):
            lines.append(f"{rank} {v:x} {self.perm[v]:x}")
        for v in range(1 << self.granule_bits):
            if v not in ranked:
                lines.append(f"- {v:x} {self.perm[v]:x}")
        return "\n".join(lines) + "\n"


def load_codebook(text: str) -> Codebook:
    """Inverse of Codebook.dump; validates the bijection."""
    lines = [ln for ln in (l.strip() for l in text.splitlines()) if ln]
    head = lines[0].split()
    if len(head) != 3 or head[0] != "codebook":
        raise ConfigError("bad codebook header")
    g = int(head[1].split("=", 1)[1])
    version = int(head[2].split("=", 1)[1])
    n = 1 << g
    perm = [-1] * n
    ranked: list[tuple[int, int]] = []
    for ln in lines[1:]:
        rank_s, val_s, cw_s = ln.split()
        v, cw = int(val_s, 16), int(cw_s, 16)
        perm[v] = cw
        if rank_s != "-":
            ranked.append((int(rank_s), v))
    if sorted(perm) != list(range(n)):
        raise ConfigError("codebook table is not a bijection")
    ranked.sort()
    inv = [0] * n
    for v, cw in enumerate(perm):
        inv[cw] = v
    return Codebook(g, tuple(perm), tuple(inv),
                    tuple(v for _, v in ranked), version)


def build_codebook(ranked_mfvs, granule_bits: int, version: int = 0) -> Codebook:
    """Assign codewords so consecutively ranked values differ in one bit.

    Rank k (1-based) maps to the k-th reflected-Gray code starting at zero;
    all remaining values take the remaining codewords in ascending order,
    keeping the mapping a bijection so decode needs no flag bits.
    """
    n = 1 << granule_bits
    ranked = list(ranked_mfvs)
    if len(set(ranked)) != len(ranked):
        raise ConfigError("ranked values must be distinct")
    if any(not 0 <= v < n for v in ranked):
        raise ConfigError(f"ranked values must fit in {granule_bits} bits")
    if len(ranked) > n:
        raise ConfigError("more ranked values than codewords")

    gray = gray_sequence(len(ranked))
    perm = [-1] * n
    for v, cw in zip(ranked, gray):
        perm[v] = cw
    taken = set(gray)
    free_codewords = sorted(set(range(n)) - taken)
    free_values = [v for v in range(n) if perm[v] < 0]
    for v, cw in zip(free_values, free_codewords):
        perm[v] = cw
    inv = [0] * n
    for v, cw in enumerate(perm):
        inv[cw] = v
    return Codebook(granule_bits, tuple(perm), tuple(inv), tuple(ranked), version)


# ---------------------------------------------------------------------------
# granule packing (LSB-first: granule k occupies bits [k*g, (k+1)*g))

def unpack_granules(data: bytes, granule_bits: int) -> np.ndarray:
    """Split payload bytes into granule values, low-order granules first."""
    b = np.frombuffer(data, dtype=np.uint8)
    g = granule_bits
    if g == 8:
        return b.copy()
    if g == 4:
        out = np.empty(2 * len(b), dtype=np.uint8)
        out[0::2] = b & 0xF
        out[1::2] = b >> 4
        return out
    if g == 2:
        out = np.empty(4 * len(b), dtype=np.uint8)
        for i in range(4):
            out[i::4] = (b >> (2 * i)) & 0x3
        return out
    if g == 1:
        return np.unpackbits(b, bitorder="little")
    raise ConfigError(f"unsupported granule width {g}")


def pack_granules(values: np.ndarray, granule_bits: int) -> bytes:
    """Inverse of unpack_granules."""
    v = np.asarray(values, dtype=np.uint8)
    g = granule_bits
    if g == 8:
        return v.tobytes()
    if g == 4:
        return (v[0::2] | (v[1::2] << 4)).astype(np.uint8).tobytes()
    if g == 2:
        b = v[0::4] | (v[1::4] << 2) | (v[2::4] << 4) | (v[3::4] << 6)
        return b.astype(np.uint8).tobytes()
    if g == 1:
        return np.packbits(v, bitorder="little").tobytes()
    raise ConfigError(f"unsupported granule width {g}")
