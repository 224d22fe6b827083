"""PCM array model: block state, cell endurance, energy accounting, metadata cache.

Block contents are kept as Python integers (bit 0 = cell 0) so that XOR,
rotation and popcount stay cheap; per-cell wear counters are numpy arrays so
that wear updates stay vectorized.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np


class SimulationError(Exception):
    """Base class for simulation-level failures."""


class DeadBlockError(SimulationError):
    """Raised when a write targets a block that has already worn out."""


class ConfigError(ValueError):
    """Invalid configuration value or combination."""


# ---------------------------------------------------------------------------
# bit helpers

def popcount(x: int) -> int:
    return x.bit_count()


def rotate_right(x: int, r: int, width: int) -> int:
    """Rotate the low `width` bits of x right by r (bit j moves to j-r mod width)."""
    r %= width
    if r == 0:
        return x
    mask = (1 << width) - 1
    return ((x >> r) | (x << (width - r))) & mask


def rotate_left(x: int, r: int, width: int) -> int:
    """Rotate the low `width` bits of x left by r; inverse of rotate_right."""
    r %= width
    if r == 0:
        return x
    mask = (1 << width) - 1
    return ((x << r) | (x >> (width - r))) & mask


def bits_to_bytes(bits: int, nbytes: int) -> bytes:
    return bits.to_bytes(nbytes, "little")


def bytes_to_bits(data: bytes) -> int:
    return int.from_bytes(data, "little")


def bit_positions(x: int, nbits: int) -> np.ndarray:
    """Boolean array of length nbits with True at every set bit of x."""
    raw = x.to_bytes((nbits + 7) // 8, "little")
    arr = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return arr[:nbits].view(bool)


# ---------------------------------------------------------------------------
# configuration

@dataclass
class PcmConfig:
    """Geometry, endurance and energy parameters of the simulated array.

    `cell_endurance` defaults to a desk-scale 10**3 so lifetime experiments
    finish quickly; real parts tolerate on the order of 10**7 - 10**9 writes.
    """

    block_bytes: int = 64
    partitions_per_block: int = 8
    rotation_max: int = 8
    counter_bits: int = 6
    granule_bits: int = 4
    cell_endurance: int = 1000
    e_set: float = 13.5    # pJ per 0->1 program
    e_reset: float = 19.2  # pJ per 1->0 program
    write_latency_ns: float = 250.0
    page_bytes: int = 4096
    metadata_cache_bytes: int = 2048
    count_metadata_flips: bool = True

    def __post_init__(self):
        if self.block_bytes <= 0 or self.partitions_per_block <= 0:
            raise ConfigError("block_bytes and partitions_per_block must be positive")
        if self.block_bits % self.partitions_per_block != 0:
            raise ConfigError(
                f"block of {self.block_bits} bits not divisible into "
                f"{self.partitions_per_block} partitions")
        if self.granule_bits not in (1, 2, 4, 8):
            raise ConfigError("granule_bits must be one of 1, 2, 4, 8")
        if self.partition_bits % self.granule_bits != 0:
            raise ConfigError(
                f"partition width {self.partition_bits} not divisible by "
                f"granule width {self.granule_bits}")
        if not 0 <= self.rotation_max < self.partition_bits:
            raise ConfigError("rotation_max must lie in [0, partition width)")
        if self.counter_bits <= 0 or self.rotation_max >= (1 << self.counter_bits):
            raise ConfigError("rotation_max must be representable in counter_bits")
        if self.cell_endurance <= 0:
            raise ConfigError("cell_endurance must be positive")
        if self.e_set <= 0 or self.e_reset <= 0:
            raise ConfigError("per-flip energies must be positive")
        if self.write_latency_ns < 0:
            raise ConfigError("write_latency_ns must be non-negative")
        if self.page_bytes <= 0 or self.page_bytes % self.block_bytes != 0:
            raise ConfigError("page_bytes must be a positive multiple of block_bytes")
        if self.metadata_cache_bytes < 0:
            raise ConfigError("metadata_cache_bytes must be non-negative")

    @property
    def block_bits(self) -> int:
        return self.block_bytes * 8

    @property
    def partition_bits(self) -> int:
        return self.block_bits // self.partitions_per_block

    @property
    def granules_per_block(self) -> int:
        return self.block_bits // self.granule_bits

    @property
    def blocks_per_page(self) -> int:
        return self.page_bytes // self.block_bytes

    @property
    def epoch_tag_bits(self) -> int:
        return max(1, (self.granule_bits - 1).bit_length())

    @property
    def metadata_line_bytes(self) -> int:
        return math.ceil(self.counter_bits * self.partitions_per_block / 8)


# ---------------------------------------------------------------------------
# write outcome accounting

@dataclass
class WriteOutcome:
    """Per-operation tally of cell programs and metadata effects.

    Metadata flips (rotation counters, flip bits, epoch tags) are kept
    separate from data-cell flips so wear statistics stay clean; their energy
    is charged at the same per-bit SET/RESET costs when enabled.
    """

    flips_set: int = 0
    flips_reset: int = 0
    meta_flips_set: int = 0
    meta_flips_reset: int = 0
    meta_extra_reads: int = 0

    @property
    def flips(self) -> int:
        return self.flips_set + self.flips_reset

    @property
    def meta_flips(self) -> int:
        return self.meta_flips_set + self.meta_flips_reset

    def energy_pj(self, cfg: PcmConfig) -> float:
        e = self.flips_set * cfg.e_set + self.flips_reset * cfg.e_reset
        if cfg.count_metadata_flips:
            e += self.meta_flips_set * cfg.e_set + self.meta_flips_reset * cfg.e_reset
        return e

    def add(self, other: "WriteOutcome") -> "WriteOutcome":
        self.flips_set += other.flips_set
        self.flips_reset += other.flips_reset
        self.meta_flips_set += other.meta_flips_set
        self.meta_flips_reset += other.meta_flips_reset
        self.meta_extra_reads += other.meta_extra_reads
        return self

    def count_meta_change(self, old: int, new: int, width: int) -> None:
        """Charge the bit flips of a metadata field changing from old to new."""
        diff = (old ^ new) & ((1 << width) - 1)
        if diff:
            ones = popcount(diff & new)
            self.meta_flips_set += ones
            self.meta_flips_reset += popcount(diff) - ones


# ---------------------------------------------------------------------------
# blocks and memory

class PcmBlock:
    """One data block: physical cell states plus encoding metadata.

    `cell_writes` counts programming operations per cell; `rot_counters`,
    `epoch` and `codebook_version` describe how the stored image was encoded
    and travel with the content when wear leveling relocates it.
    """

    __slots__ = ("bits", "cell_writes", "rot_counters", "epoch",
                 "codebook_version", "failed", "write_count", "writes_since_bump")

    def __init__(self, cfg: PcmConfig):
        self.bits = 0
        self.cell_writes = np.zeros(cfg.block_bits, dtype=np.int64)
        self.rot_counters = [0] * cfg.partitions_per_block
        self.epoch = 0
        self.codebook_version = 0
        self.failed = False
        self.write_count = 0
        self.writes_since_bump = 0

    def max_wear(self) -> int:
        return int(self.cell_writes.max())


def program_cells(block: PcmBlock, new_bits: int, mask: int, cfg: PcmConfig) -> WriteOutcome:
    """Differential program: update masked cells whose stored bit differs.

    Only differing cells are touched; each one wears by 1 and is counted as a
    SET (0->1) or RESET (1->0) flip. Marks the block failed once any cell
    exceeds its endurance (a cell survives exactly `cell_endurance` programs).
    """
    if block.failed:
        raise DeadBlockError("write to dead block")
    out = WriteOutcome()
    diff = (block.bits ^ new_bits) & mask
    if diff == 0:
        return out
    ones = popcount(diff & new_bits)
    out.flips_set = ones
    out.flips_reset = popcount(diff) - ones
    touched = bit_positions(diff, cfg.block_bits)
    block.cell_writes[touched] += 1
    if int(block.cell_writes[touched].max()) > cfg.cell_endurance:
        block.failed = True
    block.bits ^= diff
    return out


def program_all_cells(block: PcmBlock, new_bits: int, cfg: PcmConfig) -> WriteOutcome:
    """Unconditional program of every cell, as a conventional PCM write does.

    Every cell wears by 1 regardless of the stored value; flips are counted
    by target state (SET for 1s, RESET for 0s).
    """
    if block.failed:
        raise DeadBlockError("write to dead block")
    out = WriteOutcome()
    out.flips_set = popcount(new_bits)
    out.flips_reset = cfg.block_bits - out.flips_set
    block.cell_writes += 1
    if block.max_wear() > cfg.cell_endurance:
        block.failed = True
    block.bits = new_bits
    return out


class PcmMemory:
    """Array of blocks with page-level capacity tracking.

    Pages group logical block addresses. A page dies permanently when a write
    routed to one of its blocks hits (or produces) a failed block; there is no
    remap salvage. `capacity_ratio` additionally scans the current mapping so
    hand-built states report correctly.
    """

    def __init__(self, num_blocks: int, cfg: PcmConfig, extra_blocks: int = 0):
        if num_blocks <= 0:
            raise ConfigError("memory needs at least one block")
        self.cfg = cfg
        self.num_blocks = num_blocks
        self.blocks = [PcmBlock(cfg) for _ in range(num_blocks + extra_blocks)]
        self.total_pages = math.ceil(num_blocks / cfg.blocks_per_page)
        self.dead_pages: set[int] = set()

    def page_of(self, logical_addr: int) -> int:
        return logical_addr // self.cfg.blocks_per_page

    def kill_page(self, logical_addr: int) -> None:
        self.dead_pages.add(self.page_of(logical_addr))

    def live_capacity(self) -> float:
        """Fast capacity from the permanent dead-page bookkeeping."""
        return (self.total_pages - len(self.dead_pages)) / self.total_pages

    def capacity_ratio(self, mapping=None) -> float:
        """Fraction of live pages; a page is dead iff any of its blocks failed."""
        dead = set(self.dead_pages)
        for la in range(self.num_blocks):
            pa = mapping(la) if mapping is not None else la
            if self.blocks[pa].failed:
                dead.add(self.page_of(la))
        return (self.total_pages - len(dead)) / self.total_pages

    def wear_matrix(self) -> np.ndarray:
        """Per-cell write counts, one row per physical block."""
        return np.stack([b.cell_writes for b in self.blocks])


# ---------------------------------------------------------------------------
# metadata cache

class MetadataCache:
    """LRU cache over per-block metadata lines held in the memory controller.

    Capacity is derived from the cache byte budget and the per-block metadata
    line size (rotation counters packed into whole bytes). A zero-byte budget
    degenerates to an always-miss cache.
    """

    def __init__(self, cfg: PcmConfig):
        self.capacity_blocks = cfg.metadata_cache_bytes // cfg.metadata_line_bytes
        self._lines: OrderedDict[int, None] = OrderedDict()
        self.hits = 0
        self.misses = 0

    def touch(self, block_addr: int) -> bool:
        """Access a block's metadata line; returns True on hit."""
        if block_addr in self._lines:
            self._lines.move_to_end(block_addr)
            self.hits += 1
            return True
        self.misses += 1
        if self.capacity_blocks > 0:
            self._lines[block_addr] = None
            if len(self._lines) > self.capacity_blocks:
                self._lines.popitem(last=False)
        return False
