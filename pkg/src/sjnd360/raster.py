"""Image loading, block tiling, and map serialization.

Everything downstream works on 8-bit luma planes. Color inputs are reduced to
luma on load (BT.601 weights for PNG); chroma planes of YUV/Y4M input are
skipped entirely.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InputError, ValidationError

FLOAT_MAP_MAGIC = b"SJNDMAP1"
DEFAULT_BLOCK_SIZE = 8


@dataclass(frozen=True)
class LumaPlane:
    """Single-channel 8-bit raster, the unit of all analysis."""

    samples: np.ndarray  # (H, W) uint8, row-major

    def __post_init__(self):
        s = self.samples
        if not isinstance(s, np.ndarray) or s.ndim != 2 or s.size == 0:
            raise ValidationError("luma plane must be a non-empty 2-D array")
        if s.dtype != np.uint8:
            raise ValidationError(f"luma plane must be 8-bit, got dtype {s.dtype}")

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    def is_erp(self) -> bool:
        """True when the plane has the full-equirectangular 2:1 aspect."""
        return self.width == 2 * self.height

    def as_float(self) -> np.ndarray:
        return self.samples.astype(np.float64)

    @classmethod
    def from_array(cls, arr) -> "LumaPlane":
        a = np.asarray(arr)
        if a.dtype != np.uint8:
            if not np.issubdtype(a.dtype, np.integer):
                raise ValidationError("luma samples must be integers")
            if a.size and (a.min() < 0 or a.max() > 255):
                raise ValidationError("luma samples out of 8-bit range")
            a = a.astype(np.uint8)
        a = np.ascontiguousarray(a)
        a.setflags(write=False)
        return cls(a)


@dataclass(frozen=True)
class YuvSpec:
    """Geometry a caller must supply to read raw planar 4:2:0 YUV."""

    width: int
    height: int
    frame: int = 0


@dataclass
class BlockGrid:
    """N x N tiling of a plane with per-block annotations.

    ``coefficients`` starts zeroed; the transform stage fills it in. Entropy
    and class stay None until the classifier runs.
    """

    block_size: int
    blocks_x: int
    blocks_y: int
    mean_luma: np.ndarray                    # (by, bx) float64
    coefficients: np.ndarray                 # (by, bx, N, N) float64
    entropy: np.ndarray | None = None        # (by, bx) float64, bits
    block_class: np.ndarray | None = None    # (by, bx) int8


@dataclass(frozen=True)
class ThresholdMap:
    """Per-coefficient threshold field, shaped like the coefficient grid."""

    values: np.ndarray  # (by, bx, N, N) float64
    block_size: int

    def __post_init__(self):
        v = self.values
        if v.ndim != 4 or v.shape[2] != self.block_size or v.shape[3] != self.block_size:
            raise ValidationError("threshold map must be (by, bx, N, N)")

    @property
    def blocks_y(self) -> int:
        return self.values.shape[0]

    @property
    def blocks_x(self) -> int:
        return self.values.shape[1]

    def to_plane_layout(self) -> np.ndarray:
        """Flatten to 2-D with coefficient (i, j) at pixel (by*N+i, bx*N+j)."""
        by, bx, n, _ = self.values.shape
        return self.values.transpose(0, 2, 1, 3).reshape(by * n, bx * n)

    @classmethod
    def from_plane_layout(cls, arr: np.ndarray, block_size: int) -> "ThresholdMap":
        h, w = arr.shape
        n = block_size
        if h % n or w % n:
            raise ValidationError("plane-layout dimensions must be multiples of the block size")
        vals = arr.reshape(h // n, n, w // n, n).transpose(0, 2, 1, 3)
        return cls(np.ascontiguousarray(vals, dtype=np.float64), n)


def blocks_of(plane: LumaPlane, block_size: int) -> np.ndarray:
    """View the covered region of a plane as (by, bx, N, N) float64 blocks.

    Right/bottom remainders narrower than one block are excluded.
    """
    n = block_size
    by, bx = plane.height // n, plane.width // n
    cropped = plane.samples[: by * n, : bx * n]
    return (
        cropped.reshape(by, n, bx, n).transpose(0, 2, 1, 3).astype(np.float64)
    )


def tile(plane: LumaPlane, block_size: int = DEFAULT_BLOCK_SIZE) -> BlockGrid:
    """Tile a plane into N x N blocks with per-block mean luma.

    Coefficient slots are allocated but zeroed; run the transform to fill
    them. Remainder rows/columns not covering a full block are excluded.
    """
    n = block_size
    if n < 2:
        raise ValidationError("block size must be at least 2")
    if n > plane.width or n > plane.height:
        raise ValidationError(
            f"block size {n} exceeds plane dimensions {plane.width}x{plane.height}"
        )
    by, bx = plane.height // n, plane.width // n
    cropped = plane.samples[: by * n, : bx * n].astype(np.int64)
    sums = cropped.reshape(by, n, bx, n).sum(axis=(1, 3))
    mean = sums / float(n * n)
    return BlockGrid(
        block_size=n,
        blocks_x=bx,
        blocks_y=by,
        mean_luma=mean,
        coefficients=np.zeros((by, bx, n, n), dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# image input

def load_image(path, *, yuv_spec: YuvSpec | None = None, frame: int = 0) -> LumaPlane:
    """Load the luma plane of an image or one frame of a raw/Y4M video.

    Format is chosen by file suffix: .pgm, .png, .y4m, or .yuv/.raw (which
    require ``yuv_spec``). Only 8-bit input is accepted.
    """
    p = Path(path)
    suffix = p.suffix.lower()
    if not p.is_file():
        raise InputError(f"cannot read {p}: no such file")
    if suffix == ".pgm":
        return LumaPlane.from_array(_read_pgm(p.read_bytes()))
    if suffix == ".png":
        return LumaPlane.from_array(_read_png(p))
    if suffix == ".y4m":
        return LumaPlane.from_array(_read_y4m(p.read_bytes(), frame))
    if suffix in (".yuv", ".raw"):
        if yuv_spec is None:
            raise ValidationError("raw YUV input needs width/height/frame (yuv_spec)")
        return LumaPlane.from_array(_read_yuv(p.read_bytes(), yuv_spec))
    raise InputError(f"unsupported image format: {suffix or path}")


def _read_pgm(data: bytes) -> np.ndarray:
    if not data.startswith(b"P5"):
        raise InputError("not a binary PGM (P5) file")
    pos = 2
    vals: list[int] = []
    while len(vals) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tok = data[start:pos]
        if not tok.isdigit():
            raise InputError("malformed PGM header")
        vals.append(int(tok))
    pos += 1  # single whitespace terminating the maxval token
    width, height, maxval = vals
    if maxval > 255:
        raise InputError(f"unsupported PGM bit depth (maxval {maxval}); only 8-bit accepted")
    if width <= 0 or height <= 0:
        raise InputError("PGM header declares empty image")
    need = width * height
    raw = data[pos : pos + need]
    if len(raw) < need:
        raise InputError("PGM pixel data truncated")
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width)


def _read_png(path: Path) -> np.ndarray:
    try:
        im = Image.open(path)
        im.load()
    except Exception as exc:  # PIL raises a zoo of types here
        raise InputError(f"cannot decode PNG {path}: {exc}") from exc
    with im:
        if im.mode in ("I", "I;16", "I;16B", "I;16L", "F"):
            raise InputError("only 8-bit PNG input is supported")
        if im.mode == "L":
            return np.asarray(im, dtype=np.uint8)
        if im.mode == "LA":
            return np.asarray(im)[:, :, 0].astype(np.uint8)
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
        luma = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
        return np.clip(np.rint(luma), 0, 255).astype(np.uint8)


def _read_yuv(data: bytes, spec: YuvSpec) -> np.ndarray:
    w, h = spec.width, spec.height
    if w <= 0 or h <= 0 or spec.frame < 0:
        raise ValidationError("YUV spec needs positive dimensions and frame >= 0")
    frame_size = w * h * 3 // 2  # planar 4:2:0, 8-bit
    offset = spec.frame * frame_size
    raw = data[offset : offset + w * h]
    if len(raw) < w * h:
        raise InputError(
            f"YUV file too short for {w}x{h} frame {spec.frame} (dimension mismatch?)"
        )
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w)


def _read_y4m(data: bytes, frame: int) -> np.ndarray:
    nl = data.find(b"\n")
    if nl < 0 or not data.startswith(b"YUV4MPEG2"):
        raise InputError("not a Y4M stream")
    width = height = None
    chroma = "420"
    for tok in data[:nl].decode("ascii", "replace").split()[1:]:
        if tok.startswith("W"):
            width = int(tok[1:])
        elif tok.startswith("H"):
            height = int(tok[1:])
        elif tok.startswith("C"):
            chroma = tok[1:]
    if not width or not height:
        raise InputError("Y4M header missing dimensions")
    if chroma.startswith("420"):
        frame_size = width * height * 3 // 2
    elif chroma == "mono":
        frame_size = width * height
    else:
        raise InputError(f"unsupported Y4M chroma mode C{chroma}; only 4:2:0 or mono")
    pos = nl + 1
    for k in range(frame + 1):
        if data[pos : pos + 5] != b"FRAME":
            raise InputError(f"Y4M frame {frame} not present")
        end = data.find(b"\n", pos)
        if end < 0:
            raise InputError("malformed Y4M FRAME header")
        pos = end + 1
        if k == frame:
            raw = data[pos : pos + width * height]
            if len(raw) < width * height:
                raise InputError("Y4M frame data truncated")
            return np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
        pos += frame_size
    raise InputError(f"Y4M frame {frame} not present")


# ---------------------------------------------------------------------------
# image / map output

def save_image(plane: LumaPlane, path) -> None:
    """Write a luma plane verbatim as PGM (P5) or 8-bit gray PNG."""
    p = Path(path)
    suffix = p.suffix.lower()
    try:
        if suffix == ".pgm":
            p.write_bytes(_pgm_bytes(plane.samples))
        elif suffix == ".png":
            Image.fromarray(plane.samples, mode="L").save(p)
        else:
            raise InputError(f"unsupported output image format: {suffix or path}")
    except OSError as exc:
        raise InputError(f"cannot write {p}: {exc}") from exc


def _pgm_bytes(samples: np.ndarray) -> bytes:
    h, w = samples.shape
    return b"P5\n%d %d\n255\n" % (w, h) + samples.tobytes()


def format_number(v) -> str:
    """Shortest lossless decimal form; integral values print without a dot."""
    f = float(v)
    if f.is_integer() and abs(f) < 1e16:
        return str(int(f))
    return repr(f)


def _map_array(data) -> np.ndarray:
    if isinstance(data, ThresholdMap):
        return data.to_plane_layout()
    if isinstance(data, LumaPlane):
        return data.as_float()
    if hasattr(data, "salience"):
        return np.asarray(data.salience, dtype=np.float64)
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError("map data must be 2-D")
    return arr


def save_map(data, path, encoding: str = "float-binary") -> None:
    """Serialize a 2-D map (or ThresholdMap/SaliencyField/LumaPlane).

    encodings:
      pgm-normalized  linear [min,max] -> [0,255]; a constant map writes 0
      float-binary    16-byte header (magic, W, H as little-endian uint32)
                      followed by row-major little-endian float32
      csv             one text row per grid row
    """
    arr = _map_array(data)
    if not np.isfinite(arr).all():
        raise ValidationError("map contains NaN or Inf; refusing to serialize")
    p = Path(path)
    try:
        if encoding == "pgm-normalized":
            lo, hi = float(arr.min()), float(arr.max())
            if hi > lo:
                scaled = np.rint((arr - lo) * (255.0 / (hi - lo)))
            else:
                scaled = np.zeros_like(arr)
            p.write_bytes(_pgm_bytes(np.clip(scaled, 0, 255).astype(np.uint8)))
        elif encoding == "float-binary":
            h, w = arr.shape
            header = FLOAT_MAP_MAGIC + struct.pack("<II", w, h)
            p.write_bytes(header + arr.astype("<f4").tobytes())
        elif encoding == "csv":
            lines = [",".join(format_number(v) for v in row) for row in arr]
            p.write_text("\n".join(lines) + "\n")
        else:
            raise ValidationError(f"unknown map encoding: {encoding}")
    except OSError as exc:
        raise InputError(f"cannot write {p}: {exc}") from exc


def load_float_map(path) -> np.ndarray:
    """Read a float-binary map back as (H, W) float32."""
    p = Path(path)
    if not p.is_file():
        raise InputError(f"cannot read {p}: no such file")
    data = p.read_bytes()
    if len(data) < 16 or data[:8] != FLOAT_MAP_MAGIC:
        raise InputError(f"{p} is not a float-binary map")
    w, h = struct.unpack("<II", data[8:16])
    need = 16 + 4 * w * h
    if len(data) < need:
        raise InputError(f"{p} truncated: expected {need} bytes for {w}x{h}")
    return np.frombuffer(data[16:need], dtype="<f4").reshape(h, w)
