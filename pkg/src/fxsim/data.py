"""MNIST ingestion: IDX parsing, digit-pair filtering, normalization.

IDX files are big-endian: a 4-byte magic (0x0000080x, last byte = number of
dimensions), one 4-byte size per dimension, then the unsigned-byte payload.
Plain and gzip-compressed files are both accepted.

Binary datasets map the larger digit of the pair to class 1, flatten each
28 x 28 image to a 784-entry column and scale pixels to [0, 1]. Column order
is the original file order: no shuffling, full-batch descent does not care.
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["load_idx", "make_pair_dataset", "load_pair_dataset", "Dataset",
           "IMAGE_MAGIC", "LABEL_MAGIC", "STANDARD_NAMES"]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

STANDARD_NAMES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


@dataclass(frozen=True)
class Dataset:
    """A binary digit-pair problem: 784 x m pixel columns, 1 x m labels."""

    X_train: np.ndarray
    Y_train: np.ndarray
    X_test: np.ndarray
    Y_test: np.ndarray
    pair: tuple[int, int]

    @property
    def train_count(self) -> int:
        return self.X_train.shape[1]

    @property
    def test_count(self) -> int:
        return self.X_test.shape[1]

    @property
    def train_class_counts(self) -> tuple[int, int]:
        ones = int(self.Y_train.sum())
        return (self.Y_train.size - ones, ones)

    @property
    def test_class_counts(self) -> tuple[int, int]:
        ones = int(self.Y_test.sum())
        return (self.Y_test.size - ones, ones)


def _open_maybe_gzip(path: Path):
    with open(path, "rb") as f:
        head = f.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def load_idx(path) -> np.ndarray:
    """Read one IDX file into a uint8 array of its declared shape."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"IDX file not found: {path}")
    with _open_maybe_gzip(path) as f:
        header = f.read(4)
        if len(header) != 4:
            raise ValueError(f"{path}: truncated IDX header")
        magic, = struct.unpack(">i", header)
        if magic not in (IMAGE_MAGIC, LABEL_MAGIC):
            raise ValueError(
                f"{path}: bad IDX magic 0x{magic:08x} "
                f"(expected 0x{IMAGE_MAGIC:08x} images or 0x{LABEL_MAGIC:08x} labels)"
            )
        ndim = magic & 0xFF
        dims = []
        for _ in range(ndim):
            raw = f.read(4)
            if len(raw) != 4:
                raise ValueError(f"{path}: truncated IDX dimension header")
            dims.append(struct.unpack(">i", raw)[0])
        payload = f.read()
    expected = int(np.prod(dims))
    if len(payload) != expected:
        raise ValueError(
            f"{path}: payload holds {len(payload)} bytes, header promises {expected}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def _filter_split(images: np.ndarray, labels: np.ndarray,
                  pair: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = sorted(pair)
    keep = (labels == lo) | (labels == hi)
    if not np.any(keep):
        raise ValueError(f"no samples found for digit pair {pair}")
    imgs = images[keep]
    X = imgs.reshape(imgs.shape[0], -1).T.astype(np.float64) / 255.0
    Y = (labels[keep] == hi).astype(np.float64).reshape(1, -1)
    return X, Y


def make_pair_dataset(train_images, train_labels, test_images, test_labels,
                      pair: tuple[int, int]) -> Dataset:
    """Filter both splits to two digits; the larger digit becomes class 1."""
    d1, d2 = pair
    if d1 == d2:
        raise ValueError(f"digit pair must be distinct, got {pair}")
    for d in pair:
        if not 0 <= d <= 9:
            raise ValueError(f"digits must be in 0..9, got {pair}")
    if train_images.shape[0] != train_labels.shape[0]:
        raise ValueError("train image/label counts disagree")
    if test_images.shape[0] != test_labels.shape[0]:
        raise ValueError("test image/label counts disagree")
    Xtr, Ytr = _filter_split(train_images, train_labels, pair)
    Xte, Yte = _filter_split(test_images, test_labels, pair)
    return Dataset(Xtr, Ytr, Xte, Yte, tuple(sorted(pair)))


def _find_file(data_dir: Path, stem: str) -> Path:
    for candidate in (data_dir / stem, data_dir / (stem + ".gz")):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(
        f"missing {stem}[.gz] in {data_dir} "
        "(download the four MNIST IDX files into that directory)"
    )


def load_pair_dataset(data_dir, pair: tuple[int, int]) -> Dataset:
    """Load the standard four MNIST files from data_dir and build a pair dataset."""
    data_dir = Path(data_dir)
    return make_pair_dataset(
        load_idx(_find_file(data_dir, STANDARD_NAMES["train_images"])),
        load_idx(_find_file(data_dir, STANDARD_NAMES["train_labels"])),
        load_idx(_find_file(data_dir, STANDARD_NAMES["test_images"])),
        load_idx(_find_file(data_dir, STANDARD_NAMES["test_labels"])),
        pair,
    )
