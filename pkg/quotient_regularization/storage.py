import csv
import logging
import math
import os
from typing import Any

import numpy as np

from quotient_regularization.custom_types import OuterLoopRecord
from quotient_regularization.errors import DimensionError

logger = logging.getLogger(__name__)

PGM_MAXVAL = 65535


def _cell(value: Any) -> Any:
    """Floats are written with repr so they read back bit-identical."""
    if isinstance(value, float | np.floating):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def _read_header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First `count` whitespace-separated header tokens of a netpbm file (skipping # comments) and the offset after them."""
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < count:
        if pos >= len(data):
            raise DimensionError("truncated netpbm header")
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            tokens.append(data[start:pos])
    return tokens, pos


class Storage:
    """
    Writes experiment outputs under one directory: CSV tables, vectors and traces,
    16-bit PGM images and PBM masks. Every CSV starts with a metadata row carrying
    the config hash and the seed, then the header row.
    """

    def __init__(self, out_dir: str, config_hash: str = "unknown", seed: int = 0):
        self.out_dir = out_dir
        self.config_hash = config_hash
        self.seed = seed
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        full = os.path.join(self.out_dir, name)
        os.makedirs(os.path.dirname(full), exist_ok=True)
        return full

    def write_csv(self, name: str, header: list[str], rows: list[list[Any]]) -> str:
        path = self.path(name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow([f"# config_hash={self.config_hash} seed={self.seed}"])
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        logger.debug(f"[storage] wrote {len(rows)} rows to '{path}'")
        return path

    @staticmethod
    def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
        """Header and data rows of a CSV written by write_csv (the metadata row is skipped)."""
        with open(path, encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        if rows and rows[0] and rows[0][0].startswith("#"):
            rows = rows[1:]
        if not rows:
            return [], []
        return rows[0], rows[1:]

    def write_vector(self, name: str, u: np.ndarray) -> str:
        return self.write_csv(name, ["index", "value"], [[i, float(v)] for i, v in enumerate(np.ravel(u))])

    @staticmethod
    def read_vector(path: str) -> np.ndarray:
        _, rows = Storage.read_csv(path)
        return np.array([float(r[1]) for r in rows])

    def write_trace(self, name: str, trace: list[OuterLoopRecord]) -> str:
        return self.write_csv(name, OuterLoopRecord.CSV_HEADER, [r.as_row() for r in trace])

    def write_pgm(self, name: str, image: np.ndarray, lo: float | None = None, hi: float | None = None, binary: bool = True) -> str:
        """
        16-bit PGM (P5 big-endian when binary, P2 otherwise). Values are mapped
        linearly from [lo, hi] (default: the image range) to [0, 65535] and clipped.
        """
        image = np.asarray(image, dtype=np.float64)
        if image.ndim != 2:
            raise DimensionError(f"PGM needs a 2-D image, got shape {image.shape}")
        lo = float(image.min()) if lo is None else lo
        hi = float(image.max()) if hi is None else hi
        span = hi - lo
        scaled = np.zeros_like(image) if span <= 0 or not math.isfinite(span) else (image - lo) / span
        levels = np.rint(np.clip(scaled, 0.0, 1.0) * PGM_MAXVAL).astype(np.uint16)
        height, width = levels.shape

        path = self.path(name)
        magic = "P5" if binary else "P2"
        header = f"{magic}\n# range {lo!r} {hi!r}\n{width} {height}\n{PGM_MAXVAL}\n"
        with open(path, "wb") as f:
            f.write(header.encode("ascii"))
            if binary:
                f.write(levels.astype(">u2").tobytes())
            else:
                for row in levels:
                    f.write((" ".join(str(int(v)) for v in row) + "\n").encode("ascii"))
        logger.debug(f"[storage] wrote {width}x{height} PGM to '{path}'")
        return path

    @staticmethod
    def read_pgm(path: str) -> np.ndarray:
        """Reads a P2 or P5 PGM (8- or 16-bit) and returns values scaled to [0, 1]."""
        with open(path, "rb") as f:
            data = f.read()
        tokens, pos = _read_header_tokens(data, 4)
        magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
        if magic == b"P5":
            dtype = ">u2" if maxval > 255 else "u1"
            # exactly one whitespace byte separates the header from the raster
            raster = np.frombuffer(data[pos + 1 :], dtype=dtype, count=width * height)
        elif magic == b"P2":
            raster = np.array(data[pos:].split()[: width * height], dtype=np.int64)
        else:
            raise DimensionError(f"'{path}' is not a PGM file (magic {magic!r})")
        if raster.size != width * height:
            raise DimensionError(f"'{path}' holds {raster.size} pixels, header says {width}x{height}")
        return raster.reshape(height, width).astype(np.float64) / maxval

    def write_pbm(self, name: str, mask: np.ndarray) -> str:
        """Plain (P1) bitmap, 1 = sampled."""
        mask = np.asarray(mask, dtype=bool)
        height, width = mask.shape
        path = self.path(name)
        with open(path, "w", encoding="ascii") as f:
            f.write(f"P1\n{width} {height}\n")
            for row in mask:
                f.write(" ".join("1" if v else "0" for v in row) + "\n")
        return path

    @staticmethod
    def read_pbm(path: str) -> np.ndarray:
        with open(path, "rb") as f:
            data = f.read()
        tokens, pos = _read_header_tokens(data, 3)
        if tokens[0] != b"P1":
            raise DimensionError(f"'{path}' is not a plain PBM file (magic {tokens[0]!r})")
        width, height = int(tokens[1]), int(tokens[2])
        bits = [c for c in data[pos:].decode("ascii") if c in "01"]
        if len(bits) != width * height:
            raise DimensionError(f"'{path}' holds {len(bits)} bits, header says {width}x{height}")
        return np.array([c == "1" for c in bits]).reshape(height, width)
