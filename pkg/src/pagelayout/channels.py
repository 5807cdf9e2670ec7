"""Typed containers for dense prediction channels and their on-disk format.

The PNCM container is intentionally trivial to parse from any language:

    magic   4 bytes  "PNCM"
    version u8       1
    H, W, C u32 x 3  little endian
    C channel records, each:
        name_len u8
        name     ASCII bytes
        values   H*W float32, little endian, row major

Detection stacks carry channels ``base, end, asc, des, block``; orientation
stacks carry ``ox, oy``.  Heights (asc/des) are stored in pixels at the map
resolution.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, fields

import numpy as np

MAGIC = b"PNCM"
VERSION = 1
DETECTION_CHANNELS = ("base", "end", "asc", "des", "block")
ORIENTATION_CHANNELS = ("ox", "oy")
_MAX_DIM = 1 << 16
_MAX_CHANNELS = 16


class MapFormatError(ValueError):
    pass


def _prepare(name: str, arr, lo: float | None, hi: float | None) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(arr), dtype=np.float32)
    if a.ndim != 2:
        raise MapFormatError(f"channel {name!r} must be 2-D, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise MapFormatError(f"channel {name!r} contains non-finite values")
    if lo is not None and float(a.min()) < lo - 1e-6:
        raise MapFormatError(f"channel {name!r} below {lo}")
    if hi is not None and float(a.max()) > hi + 1e-6:
        raise MapFormatError(f"channel {name!r} above {hi}")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ChannelMaps:
    """The five detection channels; base/end/block in [0,1], asc/des >= 0."""

    base: np.ndarray
    end: np.ndarray
    asc: np.ndarray
    des: np.ndarray
    block: np.ndarray

    def __post_init__(self):
        for name in ("base", "end", "block"):
            object.__setattr__(self, name, _prepare(name, getattr(self, name), 0.0, 1.0))
        for name in ("asc", "des"):
            object.__setattr__(self, name, _prepare(name, getattr(self, name), 0.0, None))
        shape = self.base.shape
        for f in fields(self):
            if getattr(self, f.name).shape != shape:
                raise MapFormatError("all channels must share one shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.base.shape

    @property
    def height(self) -> int:
        return self.base.shape[0]

    @property
    def width(self) -> int:
        return self.base.shape[1]

    def channels(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in DETECTION_CHANNELS}

    @classmethod
    def zeros(cls, height: int, width: int) -> "ChannelMaps":
        z = lambda: np.zeros((height, width), dtype=np.float32)
        return cls(z(), z(), z(), z(), z())


@dataclass(frozen=True)
class OrientationMaps:
    """Unit-circle orientation field; both planes in [-1, 1]."""

    ox: np.ndarray
    oy: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ox", _prepare("ox", self.ox, -1.0, 1.0))
        object.__setattr__(self, "oy", _prepare("oy", self.oy, -1.0, 1.0))
        if self.ox.shape != self.oy.shape:
            raise MapFormatError("ox and oy must share one shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.ox.shape

    @property
    def height(self) -> int:
        return self.ox.shape[0]

    @property
    def width(self) -> int:
        return self.ox.shape[1]

    def channels(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in ORIENTATION_CHANNELS}

    @classmethod
    def zeros(cls, height: int, width: int) -> "OrientationMaps":
        z = np.zeros((height, width), dtype=np.float32)
        return cls(z.copy(), z.copy())


def write_maps(maps: ChannelMaps | OrientationMaps) -> bytes:
    channels = maps.channels()
    h, w = maps.shape
    out = [MAGIC, struct.pack("<BIII", VERSION, h, w, len(channels))]
    for name, arr in channels.items():
        encoded = name.encode("ascii")
        out.append(struct.pack("<B", len(encoded)))
        out.append(encoded)
        out.append(arr.astype("<f4").tobytes(order="C"))
    return b"".join(out)


def read_maps(data: bytes) -> ChannelMaps | OrientationMaps:
    if len(data) < 17 or data[:4] != MAGIC:
        raise MapFormatError("unsupported container: bad magic")
    version, h, w, c = struct.unpack_from("<BIII", data, 4)
    if version != VERSION:
        raise MapFormatError(f"unsupported container: version {version}")
    if not (1 <= h <= _MAX_DIM and 1 <= w <= _MAX_DIM and 1 <= c <= _MAX_CHANNELS):
        raise MapFormatError("size overflow in header")
    offset = 17
    plane_bytes = h * w * 4
    channels: dict[str, np.ndarray] = {}
    for _ in range(c):
        if offset + 1 > len(data):
            raise MapFormatError("container truncated")
        (name_len,) = struct.unpack_from("<B", data, offset)
        offset += 1
        if offset + name_len + plane_bytes > len(data):
            raise MapFormatError("container truncated")
        try:
            name = data[offset : offset + name_len].decode("ascii")
        except UnicodeDecodeError as exc:
            raise MapFormatError("channel name is not ASCII") from exc
        offset += name_len
        arr = np.frombuffer(data[offset : offset + plane_bytes], dtype="<f4").reshape(h, w)
        offset += plane_bytes
        if np.isnan(arr).any():
            raise MapFormatError(f"NaN payload in channel {name!r}")
        channels[name] = arr
    if offset != len(data):
        raise MapFormatError("trailing bytes after channel records")
    names = tuple(channels)
    if set(names) == set(DETECTION_CHANNELS):
        return ChannelMaps(**{k: channels[k] for k in DETECTION_CHANNELS})
    if set(names) == set(ORIENTATION_CHANNELS):
        return OrientationMaps(**{k: channels[k] for k in ORIENTATION_CHANNELS})
    raise MapFormatError(f"unexpected channel set {sorted(names)}")


def rotate_maps(maps: ChannelMaps | OrientationMaps, turns: int):
    """Rotate all planes by 90-degree counterclockwise ``turns``.

    Height channels are rotation-invariant scalars and are only permuted;
    orientation vectors are additionally rotated by the same angle.
    """
    t = turns % 4
    if t == 0:
        return maps
    if isinstance(maps, ChannelMaps):
        return ChannelMaps(**{name: np.rot90(arr, t).copy() for name, arr in maps.channels().items()})
    ox = np.rot90(maps.ox, t).copy()
    oy = np.rot90(maps.oy, t).copy()
    if t == 1:
        return OrientationMaps(oy, -ox)
    if t == 2:
        return OrientationMaps(-ox, -oy)
    return OrientationMaps(-oy, ox)
