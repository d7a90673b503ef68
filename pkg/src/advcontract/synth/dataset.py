"""Labeled feature datasets drawn from a synthetic world.

Records are produced by the regular dataset builder talking HTTP to the
world, so the synthetic path exercises the same code as a real run.
"""

from __future__ import annotations

from advcontract.chain.monitor import StreamError, watch_blocks
from advcontract.features.model import FeatureRecord
from advcontract.pipeline.config import PipelineConfig, build_context
from advcontract.pipeline.dataset import BuildResult, build_dataset
from advcontract.synth.world import SyntheticWorld, generate_world, world_config_values, world_http


def world_context(world: SyntheticWorld, system=None, **cfg):
    return build_context(PipelineConfig(**world_config_values(), **cfg), system=system, http=world_http(world))


def world_events(world: SyntheticWorld, ctx) -> list:
    out = []
    for ev in watch_blocks(ctx.rpc, world.first_block, world.last_block):
        if isinstance(ev, StreamError):
            raise RuntimeError(f"synthetic block {ev.block_number} unavailable: {ev.message}")
        out.append(ev)
    return out


def build_world_dataset(world: SyntheticWorld, min_unique_callers: int = 10) -> BuildResult:
    ctx = world_context(world)
    adversarial = {c.address for c in world.contracts if c.label == 1}
    return build_dataset(world_events(world, ctx), ctx, adversarial, min_unique_callers)


def synthetic_dataset(n: int = 2000, seed: int = 0, adversarial_fraction: float = 0.15) -> list[FeatureRecord]:
    """`n` labeled records; every benign contract clears the caller threshold."""
    world = generate_world(n, adversarial_fraction, seed)
    res = build_world_dataset(world)
    if res.failed or res.dropped:
        raise RuntimeError(f"synthetic dataset lost contracts: {len(res.dropped)} dropped, {len(res.failed)} failed")
    return res.records
