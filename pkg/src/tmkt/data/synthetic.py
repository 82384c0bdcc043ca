"""Synthetic paired appearance/event data.

Each class is a parametric polygon (vertex count and star-ness depend on the
class id). A sample draws a random scale, rotation and position; the
appearance stream is the filled shape rendered as a gray RGB image and
encoded like any static image, while the event stream comes from an
event-sensor simulation of the same shape sliding by a few pixels, so only
edges produce events.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List

import numpy as np

from .encoding import encode_appearance, tile_static_over_time
from .events import integrate_events
from .sample_io import load_sample, save_sample
from .sequence import FrameSequence

SUPERSAMPLE = 4
SUBSTEPS = 4  # simulated sensor frames per time bin
CONTRAST_THRESHOLD = 0.1


@dataclass
class PairSet:
    """Appearance and event sequences of one split.

    When both lists have equal length and matching labels position by
    position (as generated data does), row i of each forms a pair. Otherwise
    pairs are formed per class at batching time.
    """

    appearance: List[FrameSequence]
    event: List[FrameSequence]

    def __len__(self):
        return len(self.event)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.class_label for s in self.event], dtype=np.int64)

    @property
    def appearance_labels(self) -> np.ndarray:
        return np.array([s.class_label for s in self.appearance], dtype=np.int64)

    @property
    def index_paired(self) -> bool:
        return len(self.appearance) == len(self.event) and np.array_equal(self.appearance_labels, self.labels)

    def arrays(self):
        """(appearance (Na,T,2,H,W), event (N,T,2,H,W), event labels (N,))."""
        app = np.stack([s.frames for s in self.appearance]) if self.appearance else None
        evt = np.stack([s.frames for s in self.event]) if self.event else None
        return app, evt, self.labels


@dataclass
class PairedDataset:
    train: PairSet
    test: PairSet
    n_classes: int


def class_polygon(label: int):
    """Unit-radius vertex list (angles, radii) for a class."""
    n_vertices = 3 + (label // 2) % 5
    star = label % 2 == 1
    offset = 0.37 * (label // 10)
    if star:
        angles = offset + np.pi * np.arange(2 * n_vertices) / n_vertices
        radii = np.where(np.arange(2 * n_vertices) % 2 == 0, 1.0, 0.5)
    else:
        angles = offset + 2 * np.pi * np.arange(n_vertices) / n_vertices
        radii = np.ones(n_vertices)
    return angles, radii


def _inside(px, py, vx, vy):
    """Even-odd point-in-polygon test, vectorised over the query points."""
    inside = np.zeros(px.shape, dtype=bool)
    n = len(vx)
    for i in range(n):
        x0, y0, x1, y1 = vx[i], vy[i], vx[(i + 1) % n], vy[(i + 1) % n]
        crosses = (y0 > py) != (y1 > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (px < x_at)
    return inside


def render_shape(label: int, H: int, W: int, cx: float, cy: float, scale: float, rotation: float) -> np.ndarray:
    """Area coverage in [0, 1] of the class polygon on an (H, W) grid."""
    angles, radii = class_polygon(label)
    vx = cx + scale * radii * np.cos(angles + rotation)
    vy = cy + scale * radii * np.sin(angles + rotation)
    s = SUPERSAMPLE
    sub = (np.arange(s) + 0.5) / s
    ys = (np.arange(H)[:, None] + sub[None, :]).reshape(-1)
    xs = (np.arange(W)[:, None] + sub[None, :]).reshape(-1)
    px, py = np.meshgrid(xs, ys)
    hit = _inside(px, py, vx, vy).astype(np.float64)
    return hit.reshape(H, s, W, s).mean(axis=(1, 3))


def simulate_events(label, H, W, T, cx, cy, scale, rotation, shift, rng, drop=0.3):
    """Contrast-threshold events from the shape translating by ``shift`` pixels over [0, 1]."""
    n_frames = T * SUBSTEPS + 1
    frames = [render_shape(label, H, W, cx + shift[0] * k / (n_frames - 1), cy + shift[1] * k / (n_frames - 1),
                           scale, rotation) for k in range(n_frames)]
    # each pixel fires whenever its intensity moves a full threshold away from
    # the level at its last event
    reference = frames[0].copy()
    events = []
    for k in range(1, n_frames):
        diff = frames[k] - reference
        n_ev = np.floor(np.abs(diff) / CONTRAST_THRESHOLD).astype(np.int64)
        reference += np.sign(diff) * n_ev * CONTRAST_THRESHOLD
        yy, xx = np.nonzero(n_ev)
        t_k = k / (n_frames - 1)
        for y, x in zip(yy, xx):
            for _ in range(n_ev[y, x]):
                events.append((t_k, x, y, 1 if diff[y, x] > 0 else 0))
    if not events:
        return np.zeros((0, 4))
    events = np.array(events, dtype=np.float64)
    keep = rng.random(len(events)) >= drop
    return events[keep]


def gen_sample_pair(label: int, H: int, W: int, T: int, rng: np.random.Generator):
    half = min(H, W) / 2
    scale = half * rng.uniform(0.45, 0.75)
    rotation = rng.uniform(-0.3, 0.3)
    cx = W / 2 + rng.uniform(-0.1, 0.1) * W
    cy = H / 2 + rng.uniform(-0.1, 0.1) * H
    intensity = rng.uniform(0.6, 1.0)
    angle = rng.uniform(0, 2 * np.pi)
    dist = rng.uniform(2.5, 4.0)
    shift = (dist * np.cos(angle), dist * np.sin(angle))

    gray = np.round(render_shape(label, H, W, cx, cy, scale, rotation) * intensity * 255).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    appearance = tile_static_over_time(encode_appearance(rgb), T, class_label=label)
    events = simulate_events(label, H, W, T, cx, cy, scale, rotation, shift, rng)
    event = integrate_events(events, T, H, W, class_label=label, t_start=0.0, t_end=1.0)
    return appearance, event


def gen_synthetic_paired(n_classes: int = 5, n_per_class: int = 40, H: int = 20, W: int = 20, T: int = 6,
                         seed: int = 0, train_fraction: float = 0.8) -> PairedDataset:
    """Deterministic paired dataset with a per-class 80/20 train/test split."""
    if n_classes < 2:
        raise ValueError("need at least two classes")
    if H < 8 or W < 8 or T < 1 or n_per_class < 1:
        raise ValueError(f"degenerate dimensions H={H}, W={W}, T={T}, n_per_class={n_per_class}")
    rng = np.random.default_rng(seed)
    train_a, train_e, test_a, test_e = [], [], [], []
    for label in range(n_classes):
        pairs = [gen_sample_pair(label, H, W, T, rng) for _ in range(n_per_class)]
        order = rng.permutation(n_per_class)
        n_train = int(round(train_fraction * n_per_class))
        for rank, idx in enumerate(order):
            a, e = pairs[idx]
            if rank < n_train:
                train_a.append(a)
                train_e.append(e)
            else:
                test_a.append(a)
                test_e.append(e)
    return PairedDataset(PairSet(train_a, train_e), PairSet(test_a, test_e), n_classes)


# -- directory layout ------------------------------------------------------
#   <root>/<split>/<modality>/<class>_<index>.tms


def write_dataset(ds: PairedDataset, root) -> None:
    root = Path(root)
    for split, pairs in (("train", ds.train), ("test", ds.test)):
        counters = {}
        for a, e in zip(pairs.appearance, pairs.event):
            idx = counters.get(a.class_label, 0)
            counters[a.class_label] = idx + 1
            name = f"{a.class_label}_{idx:05d}.tms"
            for seq in (a, e):
                d = root / split / seq.modality
                d.mkdir(parents=True, exist_ok=True)
                save_sample(seq, d / name)


def load_split(root, split: str) -> PairSet:
    """Load one split; pairs share a filename across the two modality folders."""
    base = Path(root) / split
    app_dir, evt_dir = base / "appearance", base / "event"
    if not evt_dir.is_dir():
        raise FileNotFoundError(f"no event samples under {evt_dir}")
    evt_files = sorted(evt_dir.glob("*.tms"))
    app_files = sorted(app_dir.glob("*.tms")) if app_dir.is_dir() else []
    events = [load_sample(p) for p in evt_files]
    app_by_name = {p.name: p for p in app_files}
    if app_files and set(app_by_name) == {p.name for p in evt_files}:
        appearance = [load_sample(app_by_name[p.name]) for p in evt_files]
    else:
        appearance = [load_sample(p) for p in app_files]
    return PairSet(appearance, events)


def load_dataset(root) -> PairedDataset:
    train, test = load_split(root, "train"), load_split(root, "test")
    n_classes = int(max(train.labels.max(initial=-1), test.labels.max(initial=-1))) + 1
    return PairedDataset(train, test, n_classes)
