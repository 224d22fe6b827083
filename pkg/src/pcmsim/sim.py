"""Single-scheme simulation instance: memory, scheme, wear leveling, stats.

One Simulation owns one memory image and services one event stream; scheme
comparisons run independent instances over the same trace. Strictly
sequential and deterministic.
"""

from __future__ import annotations

from .core import (DeadBlockError, MetadataCache, PcmConfig, PcmMemory,
                   SimulationError, WriteOutcome)
from .mfv import MfvFinder
from .schemes import WriteScheme, make_scheme
from .trace import TraceEvent
from .wearlevel import StartGapLeveler, WearConfig


class Simulation:
    """Replays trace events against one memory image under one scheme.

    In lifetime mode, writes aimed at blocks that already failed are dropped
    (the page is dead and stays dead) instead of raising, so replay can
    continue until capacity crosses the failure threshold.
    """

    def __init__(self, scheme_id: str, num_blocks: int, cfg: PcmConfig | None = None,
                 wear: WearConfig | None = None, *, fnw_word_bits: int = 16,
                 finder: MfvFinder | None = None, freeze_codebook: bool = False,
                 lifetime_mode: bool = False):
        self.cfg = cfg if cfg is not None else PcmConfig()
        self.num_blocks = num_blocks
        self.wear = wear if wear is not None else WearConfig()
        self.lifetime_mode = lifetime_mode

        extra = 1 if self.wear.enabled else 0
        self.memory = PcmMemory(num_blocks, self.cfg, extra_blocks=extra)
        self.leveler = StartGapLeveler(num_blocks, self.wear) if self.wear.enabled else None
        self.metadata_cache = MetadataCache(self.cfg) if scheme_id == "wire" else None
        self.scheme: WriteScheme = make_scheme(
            scheme_id, self.cfg, fnw_word_bits=fnw_word_bits, finder=finder,
            metadata_cache=self.metadata_cache, wear=self.wear,
            freeze_codebook=freeze_codebook)

        self.totals = WriteOutcome()
        self.writes = 0
        self.reads = 0
        self.dropped_writes = 0
        self.truncated = False

    def _physical(self, logical: int) -> int:
        if logical < 0 or logical >= self.num_blocks:
            raise SimulationError(f"block address {logical} outside memory")
        return self.leveler.map(logical) if self.leveler else logical

    def write(self, addr: int, payload: bytes) -> WriteOutcome | None:
        block = self.memory.blocks[self._physical(addr)]
        if block.failed:
            self.memory.kill_page(addr)
            if self.lifetime_mode:
                self.dropped_writes += 1
                return None
            raise DeadBlockError("write to dead block")
        out = self.scheme.write(addr, block, payload)
        if block.failed:
            self.memory.kill_page(addr)
        self.writes += 1
        self.totals.add(out)
        if self.leveler:
            move = self.leveler.note_write(self.memory)
            if move is not None:
                self.totals.add(move)
        return out

    def read(self, addr: int) -> bytes:
        self.reads += 1
        return self.scheme.read(addr, self.memory.blocks[self._physical(addr)])

    def apply(self, event: TraceEvent):
        if event.op == "W":
            return self.write(event.addr, event.payload)
        return self.read(event.addr)

    def replay(self, events) -> None:
        """Run a whole trace; a dead-block write truncates a non-lifetime run."""
        try:
            for ev in events:
                self.apply(ev)
        except DeadBlockError:
            self.truncated = True

    def capacity_ratio(self) -> float:
        return self.memory.capacity_ratio(self.leveler.map if self.leveler else None)

    def energy_pj(self) -> float:
        return self.totals.energy_pj(self.cfg)

    def meta_extra_reads(self) -> int:
        return self.totals.meta_extra_reads + self.scheme.read_extra_reads
