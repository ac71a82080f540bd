"""Dataset ingestion: manifest CSV, image loading, synthetic corpora.

A dataset is described by a manifest CSV with header ``path,label,split``
whose rows point at 8-bit RGB images (any raster format the imaging
library reads).  Paths are resolved relative to the manifest file.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .recognition import ColorSample

MANIFEST_FIELDS = ("path", "label", "split")
SPLITS = ("train", "test")


@dataclass
class ManifestEntry:
    path: str
    label: str
    split: str


def read_manifest(path) -> list[ManifestEntry]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty manifest") from None
        if tuple(h.strip() for h in header) != MANIFEST_FIELDS:
            raise ValueError(
                f"{path}: manifest header must be {','.join(MANIFEST_FIELDS)}")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns")
            entry = ManifestEntry(*(c.strip() for c in row))
            if entry.split not in SPLITS:
                raise ValueError(
                    f"{path}:{lineno}: split must be one of {SPLITS}, "
                    f"got {entry.split!r}")
            entries.append(entry)
    return entries


def load_sample(entry: ManifestEntry, base_dir,
                size: Optional[tuple[int, int]] = None) -> ColorSample:
    """Load one manifest entry as a ColorSample.

    ``size`` is (width, height); when given, images are resized
    bilinearly.  Channel intensities are scaled from 8-bit to [0, 1].
    """
    img_path = Path(entry.path)
    if not img_path.is_absolute():
        img_path = Path(base_dir) / img_path
    with Image.open(img_path) as img:
        img = img.convert("RGB")
        if size is not None:
            img = img.resize(size, Image.BILINEAR)
        arr = np.asarray(img, dtype=np.float64) / 255.0
    return ColorSample(label=entry.label, red=arr[..., 0], green=arr[..., 1],
                       blue=arr[..., 2], split=entry.split, path=entry.path)


def load_split(manifest_path, split: str,
               size: Optional[tuple[int, int]] = None) -> list[ColorSample]:
    manifest_path = Path(manifest_path)
    entries = [e for e in read_manifest(manifest_path) if e.split == split]
    base = manifest_path.parent
    return [load_sample(e, base, size) for e in entries]


# -- synthetic corpora -----------------------------------------------------------

def make_two_cluster_samples(train_per_subject: int = 5,
                             test_per_subject: int = 20,
                             image_shape: tuple[int, int] = (8, 8),
                             noise: float = 0.02,
                             seed: int = 0
                             ) -> tuple[list[ColorSample], list[ColorSample]]:
    """Two well-separated synthetic subjects.

    Each subject is an independent random RGB pattern in [0.2, 0.8];
    samples add Gaussian noise and clip to [0, 1].  With the default
    noise level the cluster separation exceeds five times the
    within-cluster spread by a wide margin.
    """
    rng = np.random.default_rng(seed)
    rows, cols = image_shape
    means = {f"s{i}": 0.2 + 0.6 * rng.random((rows, cols, 3)) for i in range(2)}

    def draw(label: str, split: str, count: int) -> list[ColorSample]:
        out = []
        for i in range(count):
            arr = np.clip(means[label] + rng.normal(0.0, noise, (rows, cols, 3)),
                          0.0, 1.0)
            out.append(ColorSample(label=label, red=arr[..., 0],
                                   green=arr[..., 1], blue=arr[..., 2],
                                   split=split,
                                   path=f"{label}_{split}_{i:03d}.png"))
        return out

    train = draw("s0", "train", train_per_subject) + \
        draw("s1", "train", train_per_subject)
    test = draw("s0", "test", test_per_subject) + \
        draw("s1", "test", test_per_subject)
    return train, test


def write_two_cluster_corpus(root, **kwargs) -> Path:
    """Write the synthetic two-subject corpus to disk; returns the manifest path."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    train, test = make_two_cluster_samples(**kwargs)
    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_FIELDS)
        for sample in train + test:
            rgb = np.stack([sample.red, sample.green, sample.blue], axis=-1)
            img = Image.fromarray(np.round(rgb * 255.0).astype(np.uint8))
            img.save(root / sample.path)
            writer.writerow([sample.path, sample.label, sample.split])
    return manifest
