"""Paired appearance/event data: encoding, event binning, file format, batching."""
from .batching import PairBatch, PairingError, make_pair_batches
from .encoding import encode_appearance, tile_static_over_time
from .events import DEFAULT_CAP, event_counts, integrate_events
from .sample_io import (
    BadMagic,
    DimensionOverflow,
    SampleFormatError,
    TrailingData,
    Truncated,
    VersionMismatch,
    decode_sample,
    encode_sample,
    load_sample,
    save_sample,
)
from .sequence import FrameSequence
from .synthetic import PairedDataset, PairSet, gen_synthetic_paired, load_dataset, load_split, write_dataset

__all__ = [
    "BadMagic",
    "DEFAULT_CAP",
    "DimensionOverflow",
    "FrameSequence",
    "PairBatch",
    "PairSet",
    "PairedDataset",
    "PairingError",
    "SampleFormatError",
    "TrailingData",
    "Truncated",
    "VersionMismatch",
    "decode_sample",
    "encode_appearance",
    "encode_sample",
    "event_counts",
    "gen_synthetic_paired",
    "integrate_events",
    "load_dataset",
    "load_sample",
    "load_split",
    "make_pair_batches",
    "save_sample",
    "tile_static_over_time",
    "write_dataset",
]
