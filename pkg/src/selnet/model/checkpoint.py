"""Binary checkpoint format; bit-exact by construction.

Layout: magic ``SELNET1``, one version byte, a length-prefixed JSON config
block, then named records of (u16 name length, name, u8 ndim, u32 dims,
little-endian float64 data) covering parameters and batch-norm running
statistics.  A trailing u32 record count sits before the records.
"""

import json
import struct

import numpy as np

from ..errors import (
    CheckpointMagicError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    ShapeError,
)
from .network import SelectorNet, SelectorNetConfig

MAGIC = b"SELNET1"
VERSION = 1


def save_checkpoint(model: SelectorNet, path) -> None:
    items = model.state_arrays()
    config_blob = json.dumps(model.config.to_dict(), sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", VERSION))
        fh.write(struct.pack("<I", len(config_blob)))
        fh.write(config_blob)
        fh.write(struct.pack("<I", len(items)))
        for name, arr in items:
            name_bytes = name.encode("utf-8")
            arr = np.ascontiguousarray(arr, dtype=np.float64)
            fh.write(struct.pack("<H", len(name_bytes)))
            fh.write(name_bytes)
            fh.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(arr.astype("<f8", copy=False).tobytes())


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointTruncatedError(
            f"checkpoint ended while reading {what} ({len(data)}/{n} bytes)"
        )
    return data


def load_checkpoint(path) -> SelectorNet:
    """Rebuild the model; round-trips are bitwise identical."""
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointMagicError(f"bad checkpoint magic {magic!r}")
        (version,) = struct.unpack("<B", _read_exact(fh, 1, "version"))
        if version != VERSION:
            raise CheckpointVersionError(
                f"unsupported checkpoint version {version} (expected {VERSION})"
            )
        (config_len,) = struct.unpack("<I", _read_exact(fh, 4, "config length"))
        try:
            config = SelectorNetConfig.from_dict(
                json.loads(_read_exact(fh, config_len, "config block"))
            )
        except (ValueError, TypeError) as exc:
            raise CheckpointTruncatedError(f"unreadable config block: {exc}") from exc
        (count,) = struct.unpack("<I", _read_exact(fh, 4, "record count"))
        state: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<H", _read_exact(fh, 2, "record name length"))
            name = _read_exact(fh, name_len, "record name").decode("utf-8")
            (ndim,) = struct.unpack("<B", _read_exact(fh, 1, f"{name} ndim"))
            shape = tuple(
                struct.unpack("<I", _read_exact(fh, 4, f"{name} dims"))[0]
                for _ in range(ndim)
            )
            n_items = int(np.prod(shape)) if shape else 1
            raw = _read_exact(fh, 8 * n_items, f"{name} data")
            state[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        trailing = fh.read(1)
        if trailing:
            raise CheckpointTruncatedError("trailing bytes after final record")

    model = SelectorNet(config)
    try:
        model.set_state(state)
    except ShapeError as exc:
        raise CheckpointTruncatedError(f"inconsistent record set: {exc}") from exc
    return model
