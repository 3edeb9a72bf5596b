"""Crossbar array state and the RC time-to-threshold recall engine.

Recall drives an enabled source-line column with a rising edge; each
bit line charges its line capacitor through the cross-point device and
fires a digital edge when the capacitor crosses the comparator
threshold.  A single RC stage crossing a fixed fraction theta of the
read voltage has the closed-form edge time

    t = R * C * ln(1 / (1 - theta)) + t_shifter

so recall is computed exactly, with no integration error.  The supply
energy per line is C * v_read^2 regardless of the device state, half
stored on the capacitor and half dissipated in the device.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .device import DeviceParams, DeviceState
from .wavefront import Wavefront

# A whole array either shares one DeviceParams or carries one per device
# (row-major grid), e.g. from variability sampling.
ParamsLike = Union[DeviceParams, Sequence[Sequence[DeviceParams]]]


@dataclass(frozen=True)
class ArrayConfig:
    """Crossbar geometry, line capacitance, rails and threshold."""

    rows: int                 # bit lines / channels
    cols: int                 # source lines / stored wavefronts
    c_line: float = 1e-12     # F per bit line
    v_read: float = 0.7746    # V
    v_dd: float = 1.8         # V, digital rail
    theta: float = 0.7364     # threshold fraction V_th / v_read
    t_shifter: float = 0.0    # ns, fixed level-shifter delay per edge

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array needs at least 1 row and 1 column")
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie strictly between 0 and 1")
        if self.c_line <= 0:
            raise ValueError("c_line must be positive")
        if not 0 < self.v_read < self.v_dd:
            raise ValueError("need 0 < v_read < v_dd")
        if self.t_shifter < 0:
            raise ValueError("t_shifter must be non-negative")


@dataclass(frozen=True)
class EnergyReport:
    """Supply energy bookkeeping for one recall."""

    per_line: float    # J drawn from the supply per bit line
    stored: float      # J left on the line capacitors, all lines
    dissipated: float  # J joule heating in the devices, all lines


@dataclass(frozen=True)
class ArrayState:
    """Grid of device states plus transient line voltages."""

    devices: tuple[tuple[DeviceState, ...], ...]  # rows x cols
    line_v: tuple[float, ...]                     # V per bit line
    enabled_col: int | None = None

    @property
    def rows(self) -> int:
        return len(self.devices)

    @property
    def cols(self) -> int:
        return len(self.devices[0])


def params_at(params: ParamsLike, row: int, col: int) -> DeviceParams:
    """Device params for one cross point, shared or per-device."""
    if isinstance(params, DeviceParams):
        return params
    return params[row][col]


def base_params(params: ParamsLike) -> DeviceParams:
    return params if isinstance(params, DeviceParams) else params[0][0]


def new_array(cfg: ArrayConfig, params: ParamsLike) -> ArrayState:
    """Fresh array: every device in its ON state, all lines discharged."""
    devices = tuple(
        tuple(DeviceState(stress=0.0, resistance=params_at(params, i, j).r_on)
              for j in range(cfg.cols))
        for i in range(cfg.rows)
    )
    return ArrayState(devices=devices, line_v=(0.0,) * cfg.rows)


def ln_factor(theta: float) -> float:
    """Threshold-crossing factor ln(1/(1-theta)) of a charging RC stage."""
    return math.log(1.0 / (1.0 - theta))


def _check_col(state: ArrayState, cfg: ArrayConfig, col: int) -> None:
    if state.rows != cfg.rows or state.cols != cfg.cols:
        raise ValueError("array state dimensions do not match config")
    if not 0 <= col < cfg.cols:
        raise ValueError(f"column {col} out of range 0..{cfg.cols - 1}")


def column_resistances(state: ArrayState, col: int) -> np.ndarray:
    return np.array([state.devices[i][col].resistance for i in range(state.rows)])


def recall(state: ArrayState, cfg: ArrayConfig, col: int) -> tuple[Wavefront, EnergyReport]:
    """Read one stored column back out as a wavefront of edge times.

    Edge times are absolute ns from the input trigger edge (not
    normalized).  Device states are untouched: the read voltage sits
    below the programming threshold.  Bit lines must be discharged
    first; reset_lines clears them after a capture.
    """
    _check_col(state, cfg, col)
    if any(v != 0.0 for v in state.line_v):
        raise ValueError("bit lines are charged; call reset_lines before recall")
    r = column_resistances(state, col)
    times = r * (cfg.c_line * ln_factor(cfg.theta) * 1e9) + cfg.t_shifter
    per_line = cfg.c_line * cfg.v_read ** 2
    half = cfg.rows * per_line / 2.0
    return Wavefront(tuple(times)), EnergyReport(per_line=per_line, stored=half,
                                                 dissipated=half)


def recall_scaled(state: ArrayState, cfg: ArrayConfig, col: int,
                  c_new: float) -> tuple[Wavefront, EnergyReport]:
    """Recall with the programmable line capacitance set to c_new (F),
    rescaling every edge time (minus the shifter delay) by c_new/c_line."""
    if c_new <= 0:
        raise ValueError("c_new must be positive")
    return recall(state, replace(cfg, c_line=c_new), col)


def reset_lines(state: ArrayState) -> ArrayState:
    """Discharge every bit line; device states are returned bit-identical."""
    return replace(state, line_v=(0.0,) * state.rows)


def dynamic_range(cfg: ArrayConfig, params: DeviceParams, r_max: float) -> float:
    """Recall time span (ns) covered by resistances in [r_on, r_max]."""
    if r_max < params.r_on:
        raise ValueError("r_max must be at least r_on")
    return (r_max - params.r_on) * cfg.c_line * ln_factor(cfg.theta) * 1e9


def write_grid_csv(path, state: ArrayState) -> None:
    """Export the resistance grid as `row,col,resistance_ohm`."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["row", "col", "resistance_ohm"])
        for i, row in enumerate(state.devices):
            for j, dev in enumerate(row):
                writer.writerow([i, j, repr(dev.resistance)])


def read_grid_csv(path, cfg: ArrayConfig, params: DeviceParams) -> ArrayState:
    """Load a `row,col,resistance_ohm` grid into a fresh array state.

    Stress is back-solved from each resistance so the grid is coherent
    with the device law; resistances outside [r_on, r_off_max] are
    rejected.
    """
    cells = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["row", "col", "resistance_ohm"]:
            raise ValueError(f"{path}: expected header 'row,col,resistance_ohm'")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 3 fields")
            try:
                i, j, r = int(rec[0]), int(rec[1]), float(rec[2])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
            if not 0 <= i < cfg.rows or not 0 <= j < cfg.cols:
                raise ValueError(f"{path}: line {lineno}: cell ({i},{j}) outside "
                                 f"{cfg.rows}x{cfg.cols} array")
            if (i, j) in cells:
                raise ValueError(f"{path}: line {lineno}: duplicate cell ({i},{j})")
            cells[(i, j)] = r
    missing = cfg.rows * cfg.cols - len(cells)
    if missing:
        raise ValueError(f"{path}: {missing} cells missing from the grid")
    devices = []
    for i in range(cfg.rows):
        row = []
        for j in range(cfg.cols):
            r = cells[(i, j)]
            if not params.r_on <= r <= params.r_off_max:
                raise ValueError(f"cell ({i},{j}): resistance {r} outside "
                                 f"[r_on, r_off_max]")
            stress = params.tau_w * math.expm1((r - params.r_on) / params.amp_a)
            row.append(DeviceState(stress=stress, resistance=r))
        devices.append(tuple(row))
    return ArrayState(devices=tuple(devices), line_v=(0.0,) * cfg.rows)
