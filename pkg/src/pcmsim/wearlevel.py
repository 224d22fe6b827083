"""Wear leveling: codeword-bit epoch rotation plus start-gap block remapping.

Epoch rotation shifts every codeword's bit positions by the block's epoch tag
so the single difference bit between consecutively ranked codewords migrates
across cell positions over time. Start-gap remapping slides block contents
through one spare block so logical addresses periodically change physical
homes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (ConfigError, PcmBlock, PcmMemory, WriteOutcome,
                   program_all_cells, rotate_left, rotate_right)


@dataclass
class WearConfig:
    enabled: bool = False
    epoch_writes: int = 256      # writes absorbed by a block between epoch bumps
    remap_period: int = 10_000   # global writes between start-gap steps

    def __post_init__(self):
        if self.epoch_writes <= 0 or self.remap_period <= 0:
            raise ConfigError("wear-leveling periods must be positive")


def epoch_transform(codeword: int, epoch: int, granule_bits: int) -> int:
    """Rotate a codeword's bit positions left by the epoch; epoch 0 is identity."""
    return rotate_left(codeword, epoch, granule_bits)


def epoch_untransform(codeword: int, epoch: int, granule_bits: int) -> int:
    return rotate_right(codeword, epoch, granule_bits)


def next_epoch(block: PcmBlock, wear: WearConfig | None, granule_bits: int) -> tuple[int, bool]:
    """Epoch to encode the next write with; bumps once enough writes accrued.

    The bump is deferred: nothing is rewritten eagerly, the new epoch simply
    applies to the next freshly encoded image.
    """
    if wear is None or not wear.enabled:
        return block.epoch, False
    if block.writes_since_bump >= wear.epoch_writes:
        return (block.epoch + 1) % granule_bits, True
    return block.epoch, False


class StartGapLeveler:
    """Start-gap address remapping over num_blocks logical + 1 spare block.

    Every `remap_period` external writes the block next to the gap is copied
    into the gap (a full unconditional program, wear included) and the gap
    advances; after num_blocks+1 steps every block has shifted one slot.
    """

    def __init__(self, num_blocks: int, wear: WearConfig):
        self.n = num_blocks
        self.wear = wear
        self.start = 0
        self.gap = num_blocks  # physical index of the spare block
        self.writes = 0
        self.remap_moves = 0

    def map(self, logical: int) -> int:
        x = (logical + self.start) % self.n
        return x + 1 if x >= self.gap else x

    def inverse(self, physical: int) -> int:
        """Logical address currently mapped to a physical block (not the gap)."""
        if physical == self.gap:
            raise ValueError("gap block backs no logical address")
        x = physical - 1 if physical > self.gap else physical
        return (x - self.start) % self.n

    def note_write(self, memory: PcmMemory) -> WriteOutcome | None:
        """Count one serviced write; performs a gap step when the period elapses."""
        self.writes += 1
        if self.writes % self.wear.remap_period == 0:
            return self.step(memory)
        return None

    def step(self, memory: PcmMemory) -> WriteOutcome:
        """Copy the neighbor into the gap and advance; mapping stays bijective."""
        dest_i = self.gap
        src_i = (self.gap - 1) % (self.n + 1)
        wrapped = self.gap == 0
        src = memory.blocks[src_i]
        dest = memory.blocks[dest_i]

        out = WriteOutcome()
        if not dest.failed:
            out = program_all_cells(dest, src.bits, memory.cfg)
        # metadata moves with the content
        cfg = memory.cfg
        for old, new in zip(dest.rot_counters, src.rot_counters):
            out.count_meta_change(old, new, cfg.counter_bits)
        out.count_meta_change(dest.epoch, src.epoch, cfg.epoch_tag_bits)
        dest.rot_counters = list(src.rot_counters)
        dest.epoch = src.epoch
        dest.codebook_version = src.codebook_version
        dest.write_count = src.write_count
        dest.writes_since_bump = src.writes_since_bump

        self.gap = src_i
        if wrapped:
            self.start = (self.start + 1) % self.n
        self.remap_moves += 1
        if dest.failed:
            memory.kill_page(self.inverse(dest_i))
        return out
