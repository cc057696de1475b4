"""Image and map file I/O.

Grayscale PNG and PGM inputs (8 or 16 bit) are converted to linear
luminance in [0, 1]; stored values are assumed sRGB-encoded unless
linearization is disabled.  Visual maps serialize to a little-endian
binary format: 16-byte header (magic "VMAP", u32 width, u32 height,
f32 neural spread) followed by row-major interleaved (re, im) float32.
"""

from __future__ import annotations

import struct

import numpy as np
from PIL import Image

from .errors import DomainError, ShapeError
from .geometry import RetinalGeometry
from .vrf import LuminanceImage, VisualMap

_VMAP_MAGIC = b"VMAP"
_VMAP_HEADER = struct.Struct("<4sIIf")


def srgb_to_linear(v):
    """sRGB electro-optical transfer function, inputs in [0, 1]."""
    v = np.asarray(v, dtype=float)
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(v):
    v = np.asarray(v, dtype=float)
    return np.where(v <= 0.0031308, 12.92 * v, 1.055 * v ** (1.0 / 2.4) - 0.055)


def read_luminance(path, receptors_per_degree=60.0, linearize=True) -> LuminanceImage:
    """Load a grayscale PNG/PGM as linear luminance in [0, 1].

    Color inputs are reduced to luma first.  16-bit samples are divided by
    65535, 8-bit by 255.
    """
    with Image.open(path) as im:
        mode = im.mode
        if mode in ("I;16", "I;16B", "I;16L", "I"):
            arr = np.asarray(im, dtype=np.float64)
            scale = 65535.0
        elif mode == "L":
            arr = np.asarray(im, dtype=np.float64)
            scale = 255.0
        else:
            arr = np.asarray(im.convert("L"), dtype=np.float64)
            scale = 255.0
    arr = arr / scale
    if linearize:
        arr = srgb_to_linear(arr)
    return LuminanceImage(arr, RetinalGeometry.for_shape(arr.shape, receptors_per_degree))


def write_png_gray(path, values, bits=16):
    """Write a float array as grayscale PNG, rescaled to the full range."""
    arr = np.asarray(values, dtype=float)
    lo, hi = float(arr.min()), float(arr.max())
    span = hi - lo if hi > lo else 1.0
    norm = (arr - lo) / span
    if bits == 16:
        Image.fromarray((norm * 65535.0 + 0.5).astype(np.uint16)).save(path)
    elif bits == 8:
        Image.fromarray((norm * 255.0 + 0.5).astype(np.uint8)).save(path)
    else:
        raise DomainError("bits must be 8 or 16")


def write_png_rgb(path, rgb_uint8):
    arr = np.asarray(rgb_uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeError("expected an (H, W, 3) array")
    Image.fromarray(arr.astype(np.uint8), mode="RGB").save(path)


def pad_to_pow2_square(image: LuminanceImage) -> LuminanceImage:
    """Zero-pad a mean-removed copy up to the next power-of-two square."""
    arr = image.samples - image.samples.mean()
    side = 1 << max(int(np.ceil(np.log2(s))) for s in arr.shape)
    if arr.shape == (side, side):
        return LuminanceImage(arr, image.geometry)
    out = np.zeros((side, side))
    out[: arr.shape[0], : arr.shape[1]] = arr
    return LuminanceImage(
        out, RetinalGeometry.for_shape(out.shape, image.geometry.receptors_per_degree))


def write_visual_map(path, vmap: VisualMap):
    h, w = vmap.values.shape
    interleaved = np.empty((h, w, 2), dtype="<f4")
    interleaved[..., 0] = vmap.values.real
    interleaved[..., 1] = vmap.values.imag
    with open(path, "wb") as fh:
        fh.write(_VMAP_HEADER.pack(_VMAP_MAGIC, w, h, float(vmap.source_neural_spread)))
        fh.write(interleaved.tobytes())


def read_visual_map(path, receptors_per_degree=60.0) -> VisualMap:
    with open(path, "rb") as fh:
        header = fh.read(_VMAP_HEADER.size)
        if len(header) != _VMAP_HEADER.size:
            raise DomainError(f"{path}: truncated header")
        magic, w, h, spread = _VMAP_HEADER.unpack(header)
        if magic != _VMAP_MAGIC:
            raise DomainError(f"{path}: not a visual map file")
        data = np.frombuffer(fh.read(), dtype="<f4")
    if data.size != h * w * 2:
        raise DomainError(f"{path}: expected {h * w * 2} floats, got {data.size}")
    pairs = data.reshape(h, w, 2)
    values = pairs[..., 0].astype(np.float64) + 1j * pairs[..., 1].astype(np.float64)
    return VisualMap(values=values,
                     geometry=RetinalGeometry.for_shape((h, w), receptors_per_degree),
                     source_neural_spread=float(spread))
