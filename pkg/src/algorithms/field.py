#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import logging

import numpy as np
import pandas as pd
from scipy import ndimage

from ..models import FieldDomainError, GvdMap, VoronoiCorridor, VoronoiField

logger = logging.getLogger(__name__)


def distance_to_voronoi(gvd: GvdMap, corridor: VoronoiCorridor) -> np.ndarray:
    """
    回廊内の各セルから最も近いボロノイセルまでの距離 [m]

    回廊外のセルは inf。ボロノイセルが無い場合は全て inf となり警告を出す。
    """
    d_v = np.full(gvd.sq_dist.shape, np.inf)
    if not gvd.is_voronoi.any():
        logger.warning("No Voronoi cell in scope; d_v is infinite everywhere")
        return d_v

    indices = ndimage.distance_transform_edt(
        ~gvd.is_voronoi, return_distances=False, return_indices=True
    )
    iy, ix = np.indices(gvd.sq_dist.shape, dtype=np.int64)
    sq = (ix - indices[1]) ** 2 + (iy - indices[0]) ** 2
    d_v[corridor.mask] = np.sqrt(sq[corridor.mask].astype(float)) * gvd.resolution
    return d_v


def rho_v(d_o: float, d_v: float, d_o_min: float) -> float:
    """ボロノイポテンシャル（0〜1）"""
    if d_o_min <= 0:
        raise FieldDomainError(f"d_o_min must be positive, got {d_o_min}")
    if d_o < 0 or d_v < 0:
        raise FieldDomainError(f"Distances must be non-negative (d_o={d_o}, d_v={d_v})")
    if d_o == 0 and d_v == 0:
        raise FieldDomainError("d_o and d_v cannot both be zero")
    if d_o > d_o_min:
        return 0.0
    ratio = 1.0 if np.isinf(d_v) else d_v / (d_o + d_v)
    return ratio * (d_o - d_o_min) ** 2 / d_o_min ** 2


def rho_v_array(d_o: np.ndarray, d_v: np.ndarray, d_o_min: float) -> np.ndarray:
    """Vectorised rho_v for cells where d_o and d_v are not both zero"""
    if d_o_min <= 0:
        raise FieldDomainError(f"d_o_min must be positive, got {d_o_min}")
    d_o = np.asarray(d_o, dtype=float)
    d_v = np.asarray(d_v, dtype=float)
    if np.any((d_o == 0) & (d_v == 0)):
        raise FieldDomainError("d_o and d_v cannot both be zero")

    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(np.isinf(d_v), 1.0, d_v / (d_o + d_v))
    shape = (d_o - d_o_min) ** 2 / d_o_min ** 2
    return np.where(d_o > d_o_min, 0.0, ratio * shape)


def build_field(gvd: GvdMap, corridor: VoronoiCorridor, d_o_min: float,
                enabled: bool = True) -> VoronoiField:
    """
    回廊内のボロノイポテンシャルを計算する

    enabled=False の場合は回廊内の rho を 0 とする（比較実験用）。
    """
    d_o = gvd.clearance_map()
    d_v = distance_to_voronoi(gvd, corridor)

    rho = np.ones(d_o.shape)
    mask = corridor.mask
    if enabled:
        rho[mask] = rho_v_array(d_o[mask], d_v[mask], d_o_min)
    else:
        rho[mask] = 0.0

    field = VoronoiField(d_o=d_o, d_v=d_v, rho=rho, mask=mask.copy(), d_o_min=d_o_min)
    logger.debug(f"{field} max rho={field.max_rho():.4f}")
    return field


def field_to_frame(field: VoronoiField) -> pd.DataFrame:
    """Corridor cells as rows ix, iy, d_o, d_v, rho"""
    iy, ix = np.nonzero(field.mask)
    return pd.DataFrame({
        "ix": ix,
        "iy": iy,
        "d_o": field.d_o[iy, ix],
        "d_v": field.d_v[iy, ix],
        "rho": field.rho[iy, ix],
    })
