#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple, Union

from ..models import (
    MotionPrimitive,
    Pose,
    PrimitiveFileError,
    PrimitiveKind,
    PrimitiveSet,
    nearest_heading,
)

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class PrimitiveLoader:
    """
    モーションプリミティブ集合のテキスト形式での保存・読み込み

    ヘッダー（version, resolution, num_headings, footprint, primitives）の後に
    primitive ... end のブロックが続く。数値は repr で書き出すため往復で値が変わらない。
    """

    @staticmethod
    def save_primitives(prim_set: PrimitiveSet, file_path: Union[str, Path]) -> None:
        lines = [
            f"version: {FORMAT_VERSION}",
            f"resolution: {prim_set.resolution!r}",
            f"num_headings: {prim_set.headings}",
            f"footprint: {prim_set.footprint!r}",
            f"primitives: {len(prim_set)}",
        ]
        for prim in prim_set.primitives:
            lines.append("primitive")
            lines.append(f"start_heading: {prim.start_heading}")
            lines.append(f"end_heading: {prim.end_heading}")
            lines.append(f"kind: {prim.kind.value}")
            lines.append(f"end_cell: {prim.end_cell[0]} {prim.end_cell[1]}")
            lines.append(f"n: {prim.n}")
            lines.extend(f"{p.x!r} {p.y!r} {p.theta!r}" for p in prim.poses)
            lines.append(f"swath: {len(prim.swath)}")
            lines.extend(f"{dx} {dy}" for dx, dy in prim.swath)
            lines.append(f"center: {len(prim.center_cells)}")
            lines.extend(f"{dx} {dy}" for dx, dy in prim.center_cells)
            lines.append("end")

        file_path = Path(file_path)
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with open(file_path, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
        logger.info(f"Saved {len(prim_set)} primitives to {file_path}")

    @staticmethod
    def load_primitives(file_path: Union[str, Path]) -> PrimitiveSet:
        file_path = Path(file_path)
        if not file_path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")
        with open(file_path, "r", encoding="utf-8") as f:
            return PrimitiveLoader.parse(f.read())

    @staticmethod
    def parse(text: str) -> PrimitiveSet:
        reader = _LineReader(text)

        version = reader.int_field("version")
        if version != FORMAT_VERSION:
            raise PrimitiveFileError(f"Unsupported primitive file version {version} (expected {FORMAT_VERSION})")
        resolution = reader.float_field("resolution")
        headings = reader.int_field("num_headings")
        footprint = reader.float_field("footprint")
        count = reader.int_field("primitives")
        if resolution <= 0 or footprint <= 0 or headings < 1 or count < 0:
            raise PrimitiveFileError("Header values out of range")

        primitives = [PrimitiveLoader._parse_block(reader, headings, resolution) for _ in range(count)]
        if reader.remaining():
            raise PrimitiveFileError(f"line {reader.line_no + 1}: unexpected content after {count} primitives")

        return PrimitiveSet(resolution=resolution, footprint=footprint, primitives=primitives, headings=headings)

    @staticmethod
    def _parse_block(reader: "_LineReader", headings: int, resolution: float) -> MotionPrimitive:
        reader.expect("primitive")
        start = reader.int_field("start_heading")
        end = reader.int_field("end_heading")
        if not (0 <= start < headings and 0 <= end < headings):
            raise PrimitiveFileError(f"line {reader.line_no}: heading index out of range")

        kind = None
        kind_text = reader.optional_field("kind")
        if kind_text is not None:
            try:
                kind = PrimitiveKind(kind_text)
            except ValueError:
                raise PrimitiveFileError(f"line {reader.line_no}: unknown primitive kind {kind_text!r}")
        end_cell = None
        end_cell_text = reader.optional_field("end_cell")
        if end_cell_text is not None:
            end_cell = reader.int_pair(end_cell_text)

        n = reader.int_field("n")
        if n < 2:
            raise PrimitiveFileError(f"line {reader.line_no}: a primitive needs at least 2 poses")
        poses = []
        for _ in range(n):
            values = reader.numbers(3, float)
            poses.append(Pose(*values))

        swath = [reader.int_pair() for _ in range(reader.int_field("swath"))]
        center = None
        center_count = reader.optional_field("center")
        if center_count is not None:
            center = [reader.int_pair() for _ in range(reader.to_int(center_count))]
        reader.expect("end")

        displacement = math.hypot(poses[-1].x - poses[0].x, poses[-1].y - poses[0].y)
        if kind is None:
            kind = _infer_kind(start, end, poses, displacement)
        if end_cell is None:
            end_cell = (int(round(poses[-1].x / resolution)), int(round(poses[-1].y / resolution)))
        if center is None:
            center = [(0, 0)]

        return MotionPrimitive(
            start_heading=start,
            end_heading=end,
            poses=poses,
            swath=swath,
            kind=kind,
            end_cell=end_cell,
            center_cells=center,
        )


def _infer_kind(start: int, end: int, poses: List[Pose], displacement: float) -> PrimitiveKind:
    if displacement < 1e-12:
        return PrimitiveKind.ROTATE
    if start != end:
        return PrimitiveKind.CURVE
    travel = math.atan2(poses[-1].y - poses[0].y, poses[-1].x - poses[0].x)
    if nearest_heading(travel) != start:
        return PrimitiveKind.BACKWARD
    return PrimitiveKind.STRAIGHT


class _LineReader:
    def __init__(self, text: str):
        self.lines = [line.strip() for line in text.splitlines()]
        self.line_no = 0

    def remaining(self) -> bool:
        return any(line for line in self.lines[self.line_no:])

    def _peek(self) -> Optional[str]:
        while self.line_no < len(self.lines) and not self.lines[self.line_no]:
            self.line_no += 1
        if self.line_no >= len(self.lines):
            return None
        return self.lines[self.line_no]

    def next(self) -> str:
        line = self._peek()
        if line is None:
            raise PrimitiveFileError(f"line {self.line_no + 1}: unexpected end of file (truncated)")
        self.line_no += 1
        return line

    def expect(self, keyword: str) -> None:
        line = self.next()
        if line != keyword:
            raise PrimitiveFileError(f"line {self.line_no}: expected '{keyword}', got {line!r}")

    def field(self, key: str) -> str:
        line = self.next()
        name, sep, value = line.partition(":")
        if not sep or name.strip() != key:
            raise PrimitiveFileError(f"line {self.line_no}: expected '{key}: ...', got {line!r}")
        return value.strip()

    def optional_field(self, key: str) -> Optional[str]:
        line = self._peek()
        if line is None or line.partition(":")[0].strip() != key:
            return None
        return self.field(key)

    def int_field(self, key: str) -> int:
        return self.to_int(self.field(key))

    def float_field(self, key: str) -> float:
        value = self.field(key)
        try:
            return float(value)
        except ValueError:
            raise PrimitiveFileError(f"line {self.line_no}: '{key}' is not a number: {value!r}")

    def to_int(self, value: str) -> int:
        try:
            return int(value)
        except ValueError:
            raise PrimitiveFileError(f"line {self.line_no}: expected an integer, got {value!r}")

    def numbers(self, count: int, cast) -> list:
        line = self.next()
        parts = line.split()
        if len(parts) != count:
            raise PrimitiveFileError(f"line {self.line_no}: expected {count} values, got {line!r}")
        try:
            return [cast(p) for p in parts]
        except ValueError:
            raise PrimitiveFileError(f"line {self.line_no}: malformed values {line!r}")

    def int_pair(self, text: Optional[str] = None) -> Tuple[int, int]:
        if text is None:
            a, b = self.numbers(2, int)
            return (a, b)
        parts = text.split()
        if len(parts) != 2:
            raise PrimitiveFileError(f"line {self.line_no}: expected 2 integers, got {text!r}")
        return (self.to_int(parts[0]), self.to_int(parts[1]))


def save_primitives(prim_set: PrimitiveSet, file_path: Union[str, Path]) -> None:
    PrimitiveLoader.save_primitives(prim_set, file_path)


def load_primitives(file_path: Union[str, Path]) -> PrimitiveSet:
    return PrimitiveLoader.load_primitives(file_path)
