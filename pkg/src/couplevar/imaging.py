"""Image I/O, synthetic test data, seeded noise, and quality metrics.

Two file formats are supported bit-exactly:

* binary netpbm (``P5`` grayscale, ``P6`` color), maxval 255.  Floats
  are clamped to [0, 255] and rounded half-up on write; header comments
  are tolerated on read.
* ``FGRID``, a plain-text float format for unclamped solver outputs:
  a header line ``FGRID M N C`` followed by whitespace-separated
  decimals (channel by channel, each row-major) printed with 17
  significant digits so doubles round-trip exactly.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

__all__ = [
    "FormatError",
    "read_image",
    "write_image",
    "read_fgrid",
    "write_fgrid",
    "add_gaussian_noise",
    "mse",
    "psnr",
    "synth_affine",
    "parse_region_spec",
]


class FormatError(ValueError):
    """Raised for malformed or unsupported image files."""


def _read_header_tokens(data: bytes, count: int):
    """Read `count` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset of the first payload byte (one
    whitespace character after the last token, per netpbm).
    """
    tokens = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise FormatError("truncated header")
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            end = data.find(b"\n", pos)
            if end == -1:
                raise FormatError("unterminated header comment")
            pos = end + 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    return tokens, pos + 1


def read_image(path) -> np.ndarray:
    """Read a binary PGM/PPM file into a float array.

    Grayscale files come back as (N, M); color files as (3, N, M).
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] not in (b"P5", b"P6"):
        raise FormatError(
            f"{path}: unsupported magic {data[:2]!r}, expected binary P5/P6"
        )
    color = data[:2] == b"P6"
    tokens, payload_at = _read_header_tokens(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric header field") from exc
    if maxval != 255:
        raise FormatError(f"{path}: maxval must be 255, got {maxval}")
    if width < 1 or height < 1:
        raise FormatError(f"{path}: bad dimensions {width}x{height}")
    nbytes = width * height * (3 if color else 1)
    payload = data[2 + payload_at : 2 + payload_at + nbytes]
    if len(payload) < nbytes:
        raise FormatError(
            f"{path}: truncated payload ({len(payload)} of {nbytes} bytes)"
        )
    flat = np.frombuffer(payload, dtype=np.uint8).astype(float)
    if color:
        return flat.reshape(height, width, 3).transpose(2, 0, 1).copy()
    return flat.reshape(height, width)


def _quantize(img: np.ndarray) -> np.ndarray:
    if img.dtype == bool:
        return np.where(img, np.uint8(255), np.uint8(0))
    clipped = np.clip(img, 0.0, 255.0)
    return np.floor(clipped + 0.5).astype(np.uint8)  # round half-up


def write_image(img, path) -> None:
    """Write a grayscale (N, M) or color (3, N, M) array as PGM/PPM.

    Boolean maps are written as {0, 255}.
    """
    img = np.asarray(img)
    if img.ndim == 3 and img.shape[0] == 1:
        img = img[0]
    if img.ndim == 2:
        raster = _quantize(img)
        header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n"
    elif img.ndim == 3 and img.shape[0] == 3:
        raster = _quantize(img).transpose(1, 2, 0)
        header = f"P6\n{img.shape[2]} {img.shape[1]}\n255\n"
    else:
        raise ValueError(f"cannot write image of shape {img.shape}")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(raster.tobytes())


def write_fgrid(img, path) -> None:
    """Write a float grid (N, M) or (C, N, M) losslessly as text."""
    img = np.asarray(img, dtype=float)
    if img.ndim == 2:
        img = img[None]
    if img.ndim != 3:
        raise ValueError(f"cannot write fgrid of shape {img.shape}")
    c, n, m = img.shape
    with open(path, "w") as fh:
        fh.write(f"FGRID {m} {n} {c}\n")
        for ch in range(c):
            for row in img[ch]:
                fh.write(" ".join(f"{x:.17g}" for x in row))
                fh.write("\n")


def read_fgrid(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "FGRID":
            raise FormatError(f"{path}: bad FGRID header")
        try:
            m, n, c = int(header[1]), int(header[2]), int(header[3])
        except ValueError as exc:
            raise FormatError(f"{path}: bad FGRID header") from exc
        values = np.array(fh.read().split(), dtype=float)
    if values.size != c * n * m:
        raise FormatError(
            f"{path}: expected {c * n * m} values, found {values.size}"
        )
    img = values.reshape(c, n, m)
    return img[0] if c == 1 else img


def add_gaussian_noise(img, sigma: float, seed: int) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise on the [0, 255] scale.

    The generator is numpy's PCG64 with the given seed, sampled with the
    standard_normal ziggurat transform, so identical seeds give bitwise
    identical noise.  Values are deliberately not clamped; solvers work
    on unclamped doubles.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    img = np.asarray(img, dtype=float)
    if sigma == 0.0:
        return img.copy()
    rng = np.random.default_rng(seed)
    return img + sigma * rng.standard_normal(img.shape)


def mse(a, b) -> float:
    """Mean squared difference over all cells and channels."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB for a 255 peak."""
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / err)


# ---------------------------------------------------------------------------
# Synthetic piecewise-affine images.
#
# A region spec is a list of (kind, geometry, intensity) entries painted in
# order; each region overwrites the cells its mask covers.  Intensities are
# affine in the cell-center coordinates x = i + 1/2, y = j + 1/2:
# value = a + b*x + c*y.  The string syntax uses ';' between regions and
# ':' between fields, e.g. "plane:20,0.5,0;disk:16,16,8:200".

_PRESETS = ("twostep", "affine")


def _preset_regions(name: str, width: int, height: int):
    if name == "twostep":
        return [
            ("plane", (), (64.0, 0.0, 0.0)),
            ("half", (1.0, 0.0, width / 2.0), (192.0, 0.0, 0.0)),
        ]
    if name == "affine":
        # Ramped regions with pairwise disjoint intensity ranges so the
        # jump never vanishes along a region boundary.
        s = 256.0 / width
        return [
            ("plane", (), (15.0, 0.42 * s, 0.0)),
            ("half", (0.0, 1.0, 0.62 * height), (150.0, 0.39 * s, 0.0)),
            (
                "disk",
                (0.30 * width, 0.35 * height, 0.18 * width),
                (250.0, 0.0, -0.55 * s),
            ),
            (
                "disk",
                (0.72 * width, 0.28 * height, 0.11 * width),
                (175.0, 0.0, 0.5 * s),
            ),
        ]
    raise ValueError(f"unknown preset {name!r}")


def parse_region_spec(text: str, width: int, height: int):
    """Parse a region spec string (or preset name) into region tuples."""
    text = text.strip()
    if text in _PRESETS:
        return _preset_regions(text, width, height)
    regions = []
    for part in text.split(";"):
        fields = [s.strip() for s in part.strip().split(":")]
        kind = fields[0]
        try:
            if kind == "plane":
                if len(fields) != 2:
                    raise ValueError
                geom = ()
                intensity = tuple(float(x) for x in fields[1].split(","))
            elif kind in ("half", "disk"):
                if len(fields) != 3:
                    raise ValueError
                geom = tuple(float(x) for x in fields[1].split(","))
                if len(geom) != 3:
                    raise ValueError
                intensity = tuple(float(x) for x in fields[2].split(","))
            else:
                raise ValueError
            if len(intensity) == 1:
                intensity = (intensity[0], 0.0, 0.0)
            if len(intensity) != 3:
                raise ValueError
        except ValueError:
            raise ValueError(
                f"bad region {part!r}: expected plane:a[,b,c], "
                "half:nx,ny,off:a[,b,c], or disk:cx,cy,r:a[,b,c]"
            ) from None
        regions.append((kind, geom, intensity))
    return regions


def synth_affine(width: int, height: int, spec) -> np.ndarray:
    """Render a piecewise-affine image with sharp region boundaries.

    ``spec`` is a preset name, a region spec string, or a list of region
    tuples from :func:`parse_region_spec`.  Out-of-range intensities are
    clamped with a warning.
    """
    regions = (
        parse_region_spec(spec, width, height) if isinstance(spec, str) else spec
    )
    x = np.arange(width) + 0.5
    y = np.arange(height) + 0.5
    xx, yy = np.meshgrid(x, y)
    img = np.zeros((height, width))
    for kind, geom, (a, b, c) in regions:
        if kind == "plane":
            mask = np.ones_like(img, dtype=bool)
        elif kind == "half":
            nx, ny, off = geom
            mask = nx * xx + ny * yy >= off
        elif kind == "disk":
            cx, cy, r = geom
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r**2
        else:
            raise ValueError(f"unknown region kind {kind!r}")
        img[mask] = (a + b * xx + c * yy)[mask]
    if img.min() < 0.0 or img.max() > 255.0:
        warnings.warn("synthetic image clamped to [0, 255]")
        img = np.clip(img, 0.0, 255.0)
    return img
