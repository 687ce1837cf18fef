#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import io
import logging
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
from PIL import Image

from ..models import CellState, MapFormatError, MapStructureError, OccupancyGrid

logger = logging.getLogger(__name__)

SIDECAR_SUFFIX = ".meta"

DEFAULT_METADATA = {
    "origin_x": 0.0,
    "origin_y": 0.0,
    "negate": 0,
    "occupied_thresh": 0.5,
    "free_thresh": 0.05,
}

# gray levels written by save_map
OCCUPIED_GRAY = 0
FREE_GRAY = 255
UNKNOWN_GRAY = 205


class MapLoader:
    """占有格子地図（P5 グレーマップ + メタデータ）を読み書きするクラス"""

    @staticmethod
    def load_map(file_path: Union[str, Path]) -> OccupancyGrid:
        """
        地図ファイルを読み込む

        file_path は画像（.pgm）とサイドカー（.meta）のどちらでもよい。
        画像の先頭行が地図の上端になるため、行を反転して iy=0 を下端にそろえる。
        """
        image_path, sidecar_path = MapLoader._resolve_paths(Path(file_path))
        if not image_path.exists():
            raise FileNotFoundError(f"File not found: {image_path}")
        if not sidecar_path.exists():
            raise FileNotFoundError(f"Map metadata not found: {sidecar_path}")

        with open(sidecar_path, "r", encoding="utf-8") as f:
            meta = MapLoader.parse_metadata(f.read())
        pixels, max_value = MapLoader.parse_pgm(image_path.read_bytes())

        grid = MapLoader._pixels_to_grid(pixels, max_value, meta)
        logger.info(f"Loaded map {image_path.name}: {grid!r}")
        return grid

    @staticmethod
    def load_from_uploaded_file(image_file, sidecar_file) -> OccupancyGrid:
        """Streamlitでアップロードされた画像とメタデータから読み込み"""
        if image_file is None or sidecar_file is None:
            raise ValueError("Both the map image and its metadata must be uploaded")

        image_file.seek(0)
        sidecar_file.seek(0)
        text = sidecar_file.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

        meta = MapLoader.parse_metadata(text)
        pixels, max_value = MapLoader.parse_pgm(image_file.read())
        return MapLoader._pixels_to_grid(pixels, max_value, meta)

    @staticmethod
    def save_map(grid: OccupancyGrid, file_path: Union[str, Path]) -> Path:
        """
        地図を P5 画像とサイドカーに保存（load_map の逆変換）

        Returns: 画像ファイルのパス
        """
        image_path, sidecar_path = MapLoader._resolve_paths(Path(file_path))
        image_path.parent.mkdir(parents=True, exist_ok=True)

        gray = np.full(grid.cells.shape, FREE_GRAY, dtype=np.uint8)
        gray[grid.cells == CellState.OCCUPIED.value] = OCCUPIED_GRAY
        gray[grid.cells == CellState.UNKNOWN.value] = UNKNOWN_GRAY
        Image.fromarray(np.ascontiguousarray(np.flipud(gray))).save(image_path, format="PPM")

        lines = [
            f"image: {image_path.name}",
            f"resolution: {grid.resolution!r}",
            f"origin_x: {grid.origin[0]!r}",
            f"origin_y: {grid.origin[1]!r}",
            "negate: 0",
            f"occupied_thresh: {DEFAULT_METADATA['occupied_thresh']}",
            f"free_thresh: {DEFAULT_METADATA['free_thresh']}",
        ]
        with open(sidecar_path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
        return image_path

    @staticmethod
    def parse_metadata(text: str) -> Dict[str, float]:
        """`key: value` 形式のサイドカーを解析"""
        meta: Dict[str, float] = dict(DEFAULT_METADATA)
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                raise MapFormatError(f"expected 'key: value', got {raw.strip()!r}", line_no)
            key, value = (part.strip() for part in line.split(":", 1))
            if key == "image":
                meta["image"] = value
                continue
            if key not in DEFAULT_METADATA and key != "resolution":
                logger.warning(f"Ignoring unknown map metadata key '{key}' (line {line_no})")
                continue
            try:
                meta[key] = float(value)
            except ValueError:
                raise MapFormatError(f"value of '{key}' is not a number: {value!r}", line_no)

        if "resolution" not in meta:
            raise MapFormatError("missing required key 'resolution'")
        if meta["resolution"] <= 0:
            raise MapFormatError("resolution must be positive")
        if meta["negate"] not in (0.0, 1.0):
            raise MapFormatError("negate must be 0 or 1")
        if not 0.0 <= meta["free_thresh"] < meta["occupied_thresh"] <= 1.0:
            raise MapFormatError("thresholds must satisfy 0 <= free_thresh < occupied_thresh <= 1")
        return meta

    @staticmethod
    def parse_pgm(data: bytes) -> Tuple[np.ndarray, int]:
        """
        P5 ヘッダーを検査し、画素配列（上端の行が先頭）と最大値を返す

        ヘッダーの誤りは行番号付きの MapFormatError、
        画素数の不一致は MapStructureError。
        """
        tokens, payload_start = MapLoader._header_tokens(data)
        magic, width, height, max_value = tokens

        if magic[0] != "P5":
            raise MapFormatError(f"unsupported magic number {magic[0]!r}, expected 'P5'", magic[1])
        values = []
        for name, (text, line_no) in (("width", width), ("height", height), ("maxval", max_value)):
            if not text.isdigit() or int(text) < 1:
                raise MapFormatError(f"{name} must be a positive integer, got {text!r}", line_no)
            values.append(int(text))
        w, h, max_val = values
        if max_val > 65535:
            raise MapFormatError(f"maxval {max_val} exceeds 65535", max_value[1])

        bytes_per_pixel = 1 if max_val < 256 else 2
        expected = w * h * bytes_per_pixel
        available = len(data) - payload_start
        if available != expected:
            raise MapStructureError(
                f"Header declares {w}x{h} pixels ({expected} bytes) but the payload has {available} bytes"
            )

        try:
            with Image.open(io.BytesIO(data)) as img:
                pixels = np.asarray(img, dtype=np.int64)
        except OSError as e:
            raise MapStructureError(f"Cannot decode pixel payload: {e}")
        if pixels.shape != (h, w):
            raise MapStructureError(f"Decoded image is {pixels.shape}, expected {(h, w)}")
        return pixels, max_val

    @staticmethod
    def _header_tokens(data: bytes) -> Tuple[list, int]:
        if not data:
            raise MapFormatError("empty file", 1)

        tokens = []
        pos, line_no = 0, 1
        while len(tokens) < 4:
            if pos >= len(data):
                raise MapFormatError("truncated header", line_no)
            ch = data[pos:pos + 1]
            if ch == b"#":
                while pos < len(data) and data[pos:pos + 1] != b"\n":
                    pos += 1
                continue
            if ch.isspace():
                if ch == b"\n":
                    line_no += 1
                pos += 1
                continue
            start = pos
            while pos < len(data) and not data[pos:pos + 1].isspace():
                pos += 1
            try:
                text = data[start:pos].decode("ascii")
            except UnicodeDecodeError:
                raise MapFormatError("non-ASCII bytes in header", line_no)
            tokens.append((text, line_no))

        # a single whitespace byte separates maxval from the raster
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise MapFormatError("missing separator after maxval", line_no)
        return tokens, pos + 1

    @staticmethod
    def _pixels_to_grid(pixels: np.ndarray, max_value: int, meta: Dict[str, float]) -> OccupancyGrid:
        p = pixels.astype(float) / float(max_value)
        occupancy = p if meta["negate"] == 1.0 else 1.0 - p

        cells = np.full(pixels.shape, CellState.UNKNOWN.value, dtype=np.uint8)
        cells[occupancy >= meta["occupied_thresh"]] = CellState.OCCUPIED.value
        cells[occupancy <= meta["free_thresh"]] = CellState.FREE.value

        height, width = pixels.shape
        return OccupancyGrid(
            width=width,
            height=height,
            resolution=meta["resolution"],
            origin=(meta["origin_x"], meta["origin_y"]),
            cells=np.flipud(cells),
        )

    @staticmethod
    def _resolve_paths(file_path: Path) -> Tuple[Path, Path]:
        if file_path.suffix.lower() == SIDECAR_SUFFIX:
            image_path = file_path.with_suffix(".pgm")
            if file_path.exists():
                with open(file_path, "r", encoding="utf-8") as f:
                    image_name = MapLoader._image_key(f.read())
                if image_name:
                    image_path = file_path.parent / image_name
            return image_path, file_path
        return file_path, file_path.with_suffix(SIDECAR_SUFFIX)

    @staticmethod
    def _image_key(text: str) -> str:
        for raw in text.splitlines():
            key, _, value = raw.partition(":")
            if key.strip() == "image":
                return value.strip()
        return ""


def load_map(file_path: Union[str, Path]) -> OccupancyGrid:
    return MapLoader.load_map(file_path)


def save_map(grid: OccupancyGrid, file_path: Union[str, Path]) -> Path:
    return MapLoader.save_map(grid, file_path)
