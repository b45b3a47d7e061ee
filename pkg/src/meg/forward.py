"""Radial magnetic field of voxel currents at the sensors (Biot-Savart)."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np
from tqdm import tqdm

from src.errors import SparseRecoveryError
from src.linops import dense
from src.linops.operators import DenseMap
from src.meg.grid import CubedSphereGrid
from src.meg.sensors import SensorArray

logger = logging.getLogger(__name__)

# μ0 / 4π in SI units.
MU0_OVER_4PI = 1e-7
MIN_DISTANCE = 1e-9
DEFAULT_CHUNK = 64


def _fill_rows(
    matrix: np.ndarray,
    rows: slice,
    sensors: SensorArray,
    grid: CubedSphereGrid,
) -> int:
    """Write kernel rows for sensors[rows] into ``matrix``; returns the row count."""
    positions = sensors.positions[rows]
    normals = sensors.radial_units[rows]
    sources = grid.flat(grid.centers)
    volumes = grid.flat(grid.volumes)

    diff = positions[:, None, :] - sources[None, :, :]
    distance = np.linalg.norm(diff, axis=-1)
    if distance.min() < MIN_DISTANCE:
        raise SparseRecoveryError("a sensor coincides with a voxel center")

    # ((r - r') × e_r)·t = (r - r')·(e_r × t)
    weight = MU0_OVER_4PI * volumes[None, :] / distance**3
    voxels = grid.voxel_count
    for channel, tangent in enumerate((grid.flat(grid.t1), grid.flat(grid.t2))):
        lever = np.cross(normals[:, None, :], tangent[None, :, :])
        matrix[rows, channel * voxels:(channel + 1) * voxels] = weight * np.einsum(
            "snk,snk->sn", diff, lever
        )
    return positions.shape[0]


def biot_savart_operator(
    grid: CubedSphereGrid,
    sensors: SensorArray,
    workers: int = 4,
    chunk_size: int = DEFAULT_CHUNK,
    show_progress: bool = False,
) -> DenseMap:
    """Dense map from a channel-major tangent field to radial fields at the sensors.

    Rows are assembled in sensor chunks on a thread pool; each chunk owns a
    disjoint row block.
    """
    matrix = np.zeros((sensors.count, grid.field_size))
    chunks = [
        slice(start, min(start + chunk_size, sensors.count))
        for start in range(0, sensors.count, chunk_size)
    ]
    logger.info(
        "Assembling forward operator: %d sensors x %d unknowns in %d chunks",
        sensors.count, grid.field_size, len(chunks),
    )
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        future_map = {
            executor.submit(_fill_rows, matrix, rows, sensors, grid): rows for rows in chunks
        }
        for future in tqdm(
            as_completed(future_map), total=len(future_map),
            desc="Forward operator", disable=not show_progress,
        ):
            future.result()
    return dense(matrix)
