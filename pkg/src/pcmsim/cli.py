"""Experiment runner: config loading, trace replay, scheme comparison, reports.

Subcommands:

    run      replay or generate a trace under one or more schemes
    gen      write a synthetic trace file
    analyze  print the granule-value frequency table of a trace

Config files are JSON with the section/key names used throughout the library
(`pcm.*`, `wear.*`, `fnw.word_bits`, `wire.rotation_max`, `gen.*`). Flags
override config values. Identical config and seed reproduce identical output
bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .core import ConfigError, PcmConfig, SimulationError
from .metrics import (build_report, mfv_coverage, reports_to_csv,
                      reports_to_text, run_lifetime)
from .schemes import SCHEME_IDS
from .sim import Simulation
from .trace import (GenSpec, PRESETS, TraceFormatError, emit_trace, generate,
                    parse_trace_file, preset_spec)
from .wearlevel import WearConfig

DEFAULT_MEMORY_BLOCKS = 256


@dataclass
class ExperimentConfig:
    """Full description of one experiment; round-trips losslessly via JSON."""

    memory_blocks: int = DEFAULT_MEMORY_BLOCKS
    pcm: PcmConfig = field(default_factory=PcmConfig)
    wear: WearConfig = field(default_factory=WearConfig)
    schemes: list[str] = field(default_factory=lambda: ["diffwrite", "wire"])
    fnw_word_bits: int = 16
    wire_freeze_codebook: bool = False
    trace_path: str | None = None
    gen: GenSpec | None = None
    seed: int | None = None
    out_dir: str = "."
    lifetime: bool = False
    max_writes: int = 100_000_000

    def validate(self) -> None:
        if self.memory_blocks <= 0:
            raise ConfigError("memory_blocks must be positive")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        for s in self.schemes:
            if s not in SCHEME_IDS:
                raise ConfigError(f"unknown scheme '{s}'")
        if self.trace_path is None and self.gen is None:
            raise ConfigError("either a trace path or a generator spec is required")
        if self.max_writes <= 0:
            raise ConfigError("max_writes must be positive")

    def to_dict(self) -> dict:
        d = {
            "memory_blocks": self.memory_blocks,
            "pcm": dataclasses.asdict(self.pcm),
            "wear": dataclasses.asdict(self.wear),
            "schemes": list(self.schemes),
            "fnw": {"word_bits": self.fnw_word_bits},
            "wire": {"rotation_max": self.pcm.rotation_max,
                     "freeze_codebook": self.wire_freeze_codebook},
            "out": self.out_dir,
            "lifetime": self.lifetime,
            "max_writes": self.max_writes,
        }
        if self.seed is not None:
            d["seed"] = self.seed
        if self.trace_path is not None:
            d["trace"] = self.trace_path
        if self.gen is not None:
            g = dataclasses.asdict(self.gen)
            g["values"] = {format(k, "x"): v for k, v in self.gen.values.items()}
            d["gen"] = g
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        cfg = cls()
        pcm_kw = dict(d.get("pcm", {}))
        wire_kw = dict(d.get("wire", {}))
        if "rotation_max" in wire_kw:
            pcm_kw["rotation_max"] = wire_kw["rotation_max"]
        cfg.pcm = PcmConfig(**pcm_kw)
        cfg.wear = WearConfig(**d.get("wear", {}))
        cfg.memory_blocks = d.get("memory_blocks", DEFAULT_MEMORY_BLOCKS)
        cfg.schemes = list(d.get("schemes", cfg.schemes))
        cfg.fnw_word_bits = d.get("fnw", {}).get("word_bits", 16)
        cfg.wire_freeze_codebook = wire_kw.get("freeze_codebook", False)
        cfg.trace_path = d.get("trace")
        cfg.seed = d.get("seed")
        cfg.out_dir = d.get("out", ".")
        cfg.lifetime = bool(d.get("lifetime", False))
        cfg.max_writes = d.get("max_writes", cfg.max_writes)
        if "gen" in d:
            g = dict(d["gen"])
            g["values"] = {int(k, 16): v for k, v in g.get("values", {}).items()}
            cfg.gen = GenSpec(**g)
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def dump(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def build_simulation(cfg: ExperimentConfig, scheme_id: str, *,
                     lifetime_mode: bool = False) -> Simulation:
    return Simulation(
        scheme_id, cfg.memory_blocks, cfg.pcm, cfg.wear,
        fnw_word_bits=cfg.fnw_word_bits,
        freeze_codebook=cfg.wire_freeze_codebook,
        lifetime_mode=lifetime_mode)


def load_events(cfg: ExperimentConfig):
    if cfg.trace_path is not None:
        return parse_trace_file(cfg.trace_path, cfg.pcm.block_bytes)
    gen = dataclasses.replace(cfg.gen)
    if cfg.seed is not None:
        gen.seed = cfg.seed
    return generate(gen, num_blocks=cfg.memory_blocks,
                    block_bytes=cfg.pcm.block_bytes,
                    granule_bits=cfg.pcm.granule_bits)


def trace_digest(events) -> str:
    h = hashlib.sha256()
    for ev in events:
        h.update(ev.op.encode())
        h.update(ev.addr.to_bytes(8, "little"))
        if ev.payload is not None:
            h.update(ev.payload)
    return h.hexdigest()


def cmd_run(cfg: ExperimentConfig) -> int:
    """Replay one trace under every configured scheme and write the reports."""
    cfg.validate()
    events = load_events(cfg)
    digest = trace_digest(events)
    coverage = mfv_coverage((ev.payload for ev in events if ev.op == "W"),
                            cfg.pcm.granule_bits)

    reports = []
    for scheme_id in cfg.schemes:
        sim = build_simulation(cfg, scheme_id, lifetime_mode=cfg.lifetime)
        # fairness: every scheme must see the identical stream
        assert trace_digest(events) == digest, "trace mutated between schemes"
        if cfg.lifetime:
            lifetime = run_lifetime(sim, events, cfg.max_writes)
            reports.append(build_report(sim, coverage, lifetime))
        else:
            sim.replay(events)
            reports.append(build_report(sim, coverage))

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(reports_to_csv(reports), encoding="ascii")
    header = [
        "pcm write simulation report",
        f"trace_sha256: {digest}",
        f"events: {len(events)}",
        f"memory_blocks: {cfg.memory_blocks}",
        f"lifetime_mode: {str(cfg.lifetime).lower()}",
        "",
    ]
    (out / "report.txt").write_text(reports_to_text(reports, header), encoding="ascii")
    for rep in reports:
        flag = " [truncated]" if rep.truncated else ""
        print(f"{rep.scheme}: writes={rep.writes} flips={rep.flips_set + rep.flips_reset} "
              f"energy_pj={rep.energy_pj:.1f} intrav={rep.intrav:.6g}{flag}")
    return 0


def cmd_gen(cfg: ExperimentConfig, path: str) -> int:
    """Generate a synthetic trace file."""
    if cfg.gen is None:
        raise ConfigError("gen subcommand needs a generator spec (config or --preset)")
    events = load_events(cfg)
    with open(path, "w", encoding="ascii") as fh:
        emit_trace(events, fh)
    writes = sum(1 for ev in events if ev.op == "W")
    print(f"wrote {len(events)} events ({writes} writes) to {path}")
    return 0


def cmd_analyze(trace_path: str, granule_bits: int, block_bytes: int,
                out_dir: str | None = None) -> int:
    """Print (and optionally emit as CSV) a trace's value frequency table."""
    events = parse_trace_file(trace_path, block_bytes)
    rows = mfv_coverage((ev.payload for ev in events if ev.op == "W"), granule_bits)
    print(f"{'value':>6} {'count':>10} {'fraction':>9} {'cumulative':>10}")
    for v, count, frac, cum in rows:
        print(f"{v:>#6x} {count:>10} {frac:>9.4f} {cum:>10.4f}")
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = ["value,count,fraction,cumulative"]
        lines += [f"{v:#x},{c},{f:.6f},{cm:.6f}" for v, c, f, cm in rows]
        (out / "coverage.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    return 0


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.trace is not None:
        cfg.trace_path = args.trace
        cfg.gen = None
    if getattr(args, "preset", None) is not None:
        cfg.gen = preset_spec(args.preset, events=args.events,
                              seed=args.seed if args.seed is not None else 0)
        cfg.trace_path = None
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "schemes", None):
        cfg.schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if getattr(args, "out", None) is not None:
        cfg.out_dir = args.out
    if getattr(args, "lifetime", False):
        cfg.lifetime = True
    return cfg


def _base_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.load(args.config)
    else:
        cfg = ExperimentConfig()
        cfg.gen = preset_spec("balanced", events=args.events)
    return _apply_overrides(cfg, args)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pcmsim",
        description="Trace-driven PCM write simulator with pluggable encodings.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_preset=True):
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--trace", type=str, default=None, help="input trace file")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="generator seed")
        p.add_argument("--events", type=int, default=10_000,
                       help="event count for generated traces")
        if with_preset:
            p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                           help="built-in read/write mix")

    p_run = sub.add_parser("run", help="replay a trace under the configured schemes")
    common(p_run)
    p_run.add_argument("--schemes", type=str, default=None,
                       help="comma-separated scheme list "
                            f"({', '.join(SCHEME_IDS)})")
    p_run.add_argument("--lifetime", action="store_true",
                       help="replay cyclically until half the pages are worn out")

    p_gen = sub.add_parser("gen", help="generate a synthetic trace file")
    common(p_gen)
    p_gen.add_argument("path", type=str, help="output trace path")

    p_an = sub.add_parser("analyze", help="value frequency table of a trace")
    p_an.add_argument("trace", type=str, help="trace file to analyze")
    p_an.add_argument("--granule-bits", type=int, default=4)
    p_an.add_argument("--block-bytes", type=int, default=64)
    p_an.add_argument("--out", type=str, default=None,
                      help="also write coverage.csv to this directory")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_base_config(args))
        if args.command == "gen":
            return cmd_gen(_base_config(args), args.path)
        if args.command == "analyze":
            return cmd_analyze(args.trace, args.granule_bits, args.block_bytes,
                               args.out)
    except (ConfigError, TraceFormatError, SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
