# Copyright 2026 The EMF Authors
# SPDX-License-Identifier: Apache-2.0
"""Mixture-of-experts video generation: gate, codecs, merger, metrics, experiments."""

from ._core import (
    EmfError,
    cache_key,
    canonicalize,
    classify,
    clip_frames,
    decode_clip,
    decode_message,
    encode_clip,
    encode_message,
    evaluate,
    merge,
    mock_generate,
    plan_prompt,
    run_experiment,
    simulate_transfers,
    transfer_time_ms,
)

__all__ = [
    "EmfError",
    "cache_key",
    "canonicalize",
    "classify",
    "clip_frames",
    "decode_clip",
    "decode_message",
    "encode_clip",
    "encode_message",
    "evaluate",
    "merge",
    "mock_generate",
    "plan_prompt",
    "run_experiment",
    "simulate_transfers",
    "transfer_time_ms",
]
