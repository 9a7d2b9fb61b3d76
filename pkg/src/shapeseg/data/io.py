"""Self-describing binary container for volumes and masks.

Layout of a ``.vol`` file (all integers little-endian):

====================  ========================================
magic                 4 bytes, ``b"SVOL"``
version               uint32
dtype tag             uint8 (1 = float32 intensities, 2 = uint8 labels)
subject id length     uint16
subject id            UTF-8 bytes
dims                  3 x uint32 (depth, height, width)
spacing               3 x float64 (mm per voxel along each axis)
payload               raw C-order voxel bytes
====================  ========================================

Round-trips are bit-exact. PNG export of individual slices is provided for
visual inspection only and is not part of the round-trip contract.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from shapeseg.data.volumes import MaskVolume, Volume
from shapeseg.exceptions import DataFormatError

MAGIC = b"SVOL"
VERSION = 1
_DTYPE_FLOAT32 = 1
_DTYPE_UINT8 = 2
_DTYPES = {_DTYPE_FLOAT32: np.dtype("<f4"), _DTYPE_UINT8: np.dtype("u1")}


def _pack_header(dtype_tag: int, subject_id: str, dims: tuple[int, int, int], spacing) -> bytes:
    sid = subject_id.encode("utf-8")
    if len(sid) > 0xFFFF:
        raise DataFormatError("subject_id too long to serialize")
    return (
        MAGIC
        + struct.pack("<I", VERSION)
        + struct.pack("<B", dtype_tag)
        + struct.pack("<H", len(sid))
        + sid
        + struct.pack("<3I", *dims)
        + struct.pack("<3d", *spacing)
    )


def _read_exact(raw: bytes, offset: int, count: int, what: str) -> tuple[bytes, int]:
    end = offset + count
    if end > len(raw):
        raise DataFormatError(
            f"truncated file: needed {count} bytes for {what} at offset {offset}, file has {len(raw)} bytes"
        )
    return raw[offset:end], end


def _read_container(path: Path) -> tuple[int, str, tuple[int, int, int], tuple[float, ...], np.ndarray]:
    raw = Path(path).read_bytes()
    magic, off = _read_exact(raw, 0, 4, "magic")
    if magic != MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r} at offset 0, expected {MAGIC!r}")
    ver_bytes, off = _read_exact(raw, off, 4, "version")
    version = struct.unpack("<I", ver_bytes)[0]
    if version != VERSION:
        raise DataFormatError(f"{path}: unsupported container version {version}")
    tag_bytes, off = _read_exact(raw, off, 1, "dtype tag")
    dtype_tag = tag_bytes[0]
    if dtype_tag not in _DTYPES:
        raise DataFormatError(f"{path}: unknown dtype tag {dtype_tag}")
    len_bytes, off = _read_exact(raw, off, 2, "subject id length")
    sid_len = struct.unpack("<H", len_bytes)[0]
    sid_bytes, off = _read_exact(raw, off, sid_len, "subject id")
    dims_bytes, off = _read_exact(raw, off, 12, "dims")
    dims = struct.unpack("<3I", dims_bytes)
    spacing_bytes, off = _read_exact(raw, off, 24, "spacing")
    spacing = struct.unpack("<3d", spacing_bytes)
    dtype = _DTYPES[dtype_tag]
    n = int(np.prod(dims))
    payload, off = _read_exact(raw, off, n * dtype.itemsize, "voxel payload")
    if off != len(raw):
        raise DataFormatError(f"{path}: {len(raw) - off} trailing bytes after payload ending at offset {off}")
    voxels = np.frombuffer(payload, dtype=dtype).reshape(dims).copy()
    return dtype_tag, sid_bytes.decode("utf-8"), dims, spacing, voxels


def save_volume(volume: Volume, path: Path | str) -> None:
    path = Path(path)
    header = _pack_header(_DTYPE_FLOAT32, volume.subject_id, volume.shape, volume.spacing)
    payload = np.ascontiguousarray(volume.voxels, dtype="<f4").tobytes()
    path.write_bytes(header + payload)


def load_volume(path: Path | str) -> Volume:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such volume file: {path}")
    tag, subject_id, _, spacing, voxels = _read_container(path)
    if tag != _DTYPE_FLOAT32:
        raise DataFormatError(f"{path}: expected an intensity volume (dtype tag {_DTYPE_FLOAT32}), got tag {tag}")
    return Volume(voxels=voxels, spacing=spacing, subject_id=subject_id)


def save_mask(mask: MaskVolume, path: Path | str) -> None:
    path = Path(path)
    header = _pack_header(_DTYPE_UINT8, mask.subject_id, mask.shape, mask.spacing)
    path.write_bytes(header + np.ascontiguousarray(mask.voxels, dtype="u1").tobytes())


def load_mask(path: Path | str) -> MaskVolume:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such mask file: {path}")
    tag, subject_id, _, spacing, voxels = _read_container(path)
    if tag != _DTYPE_UINT8:
        raise DataFormatError(f"{path}: expected a label mask (dtype tag {_DTYPE_UINT8}), got tag {tag}")
    bad = np.setdiff1d(np.unique(voxels), [0, 1])
    if bad.size:
        raise DataFormatError(f"{path}: mask contains non-binary values {bad[:8].tolist()}")
    return MaskVolume(voxels=voxels, spacing=spacing, subject_id=subject_id)


def export_slice_png(volume: Volume | MaskVolume, slice_index: int, path: Path | str) -> None:
    """Write one axial slice as an 8-bit grayscale PNG (inspection helper)."""
    if not 0 <= slice_index < volume.shape[0]:
        raise ValueError(f"slice_index {slice_index} out of range for depth {volume.shape[0]}")
    plane = volume.voxels[slice_index]
    if plane.dtype == np.uint8 and plane.max(initial=0) <= 1:
        data = (plane * 255).astype(np.uint8)
    else:
        data = np.clip(plane * 255.0, 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(Path(path))


def import_slice_png(path: Path | str) -> np.ndarray:
    """Read a grayscale PNG back as float32 intensities in [0, 1]."""
    with Image.open(Path(path)) as img:
        arr = np.asarray(img.convert("L"), dtype=np.float32)
    return arr / 255.0
