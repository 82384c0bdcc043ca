"""Binary sample files.

Little-endian header followed by a float32 payload::

    magic  b"TMS1"   4 bytes
    version          u16
    modality         u8    0 = event, 1 = appearance
    class            u32
    T, C, H, W       u16 each (C is always 2)
    payload          T*C*H*W float32
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .sequence import MODALITIES, FrameSequence

MAGIC = b"TMS1"
VERSION = 1
HEADER = struct.Struct("<4sHBIHHHH")
U16_MAX = 0xFFFF
U32_MAX = 0xFFFFFFFF


class SampleFormatError(ValueError):
    pass


class BadMagic(SampleFormatError):
    pass


class VersionMismatch(SampleFormatError):
    pass


class Truncated(SampleFormatError):
    pass


class DimensionOverflow(SampleFormatError):
    pass


class TrailingData(SampleFormatError):
    pass


def encode_sample(seq: FrameSequence) -> bytes:
    frames = np.asarray(seq.frames)
    T, C, H, W = frames.shape
    if C != 2:
        raise SampleFormatError(f"sample files hold 2 channels, got {C}")
    if max(T, H, W) > U16_MAX:
        raise DimensionOverflow(f"dimensions {frames.shape} exceed the u16 header fields")
    if not 0 <= seq.class_label <= U32_MAX:
        raise DimensionOverflow(f"class label {seq.class_label} does not fit in u32")
    header = HEADER.pack(MAGIC, VERSION, MODALITIES.index(seq.modality), seq.class_label, T, C, H, W)
    return header + np.ascontiguousarray(frames, dtype="<f4").tobytes()


def decode_sample(buf: bytes) -> FrameSequence:
    if len(buf) >= 4 and buf[:4] != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {bytes(buf[:4])!r}")
    if len(buf) < HEADER.size:
        raise Truncated(f"header needs {HEADER.size} bytes, file has {len(buf)}")
    _, version, modality, label, T, C, H, W = HEADER.unpack_from(buf)
    if version != VERSION:
        raise VersionMismatch(f"file version {version}, reader supports {VERSION}")
    if modality >= len(MODALITIES):
        raise SampleFormatError(f"unknown modality code {modality}")
    if C != 2:
        raise SampleFormatError(f"sample files hold 2 channels, header says {C}")
    expected = T * C * H * W * 4
    payload = len(buf) - HEADER.size
    if payload < expected:
        raise Truncated(f"payload has {payload} bytes, header declares {expected}")
    if payload > expected:
        raise TrailingData(f"payload has {payload} bytes, header declares {expected}")
    frames = np.frombuffer(buf, dtype="<f4", count=T * C * H * W, offset=HEADER.size)
    return FrameSequence(frames.reshape(T, C, H, W).astype(np.float32), MODALITIES[modality], label)


def save_sample(seq: FrameSequence, path) -> None:
    Path(path).write_bytes(encode_sample(seq))


def load_sample(path) -> FrameSequence:
    return decode_sample(Path(path).read_bytes())
