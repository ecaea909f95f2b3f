"""Closed-form switching-loss model.

The handover between delay lines momentarily interrupts the signal: a
switch ramps its resistance linearly over t_s at each end of its
2*delta on-window, and during the ramps the instantaneous transmission
h = 2*Z0 / (R + 2*Z0) collapses.  The model evaluates the DC term of
the two-switch cascade as the square of the window-averaged h, so the
loss depends on the ratio t_s / delta and on the on/off resistances.

Note that this is deliberately the simple averaged model: an exact
time-varying simulation recollects part of the switching sidebands back
into the carrier (the receive-side ramp is synchronized with the
transmit-side ramp), so it reports less loss than this closed form for
t_s > 0.  See the cross-model tests for the quantified gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError


@dataclass(frozen=True)
class LossQuery:
    """Inputs of the analytic switching-loss evaluation."""

    t_s: float
    delta: float
    r_on: float
    r_off: float
    z0: float = 50.0

    def violations(self) -> list[str]:
        out = []
        if not 0.0 <= self.t_s:
            out.append(f"t_s: must be >= 0, got {self.t_s}")
        if not self.t_s < self.delta:
            out.append(f"t_s: must be smaller than delta, got t_s={self.t_s}, delta={self.delta}")
        if not 0.0 <= self.r_on < self.r_off:
            out.append(f"r_on/r_off: need 0 <= r_on < r_off, got {self.r_on}/{self.r_off}")
        if not self.z0 > 0:
            out.append(f"z0: must be > 0, got {self.z0}")
        return out


def h_transmission(resistance: float, z0: float) -> float:
    """Through-switch transmission coefficient 2*Z0 / (R + 2*Z0)."""
    if resistance < 0 or not z0 > 0:
        raise ConfigError(f"need R >= 0 and z0 > 0, got R={resistance}, z0={z0}")
    return 2.0 * z0 / (resistance + 2.0 * z0)


def mean_transmission(q: LossQuery) -> float:
    """Average of h over one 2*delta on-window (ramp, plateau, ramp).

    The ramp integral has the closed form
    t_s * (2*z0 / (r_off - r_on)) * ln((r_off + 2*z0) / (r_on + 2*z0)).
    """
    bad = q.violations()
    if bad:
        raise ConfigError("invalid loss query: " + "; ".join(bad))
    window = 2.0 * q.delta
    h_on = h_transmission(q.r_on, q.z0)
    if q.t_s == 0.0:
        return h_on
    ramp = q.t_s * (2.0 * q.z0 / (q.r_off - q.r_on)) * math.log(
        (q.r_off + 2.0 * q.z0) / (q.r_on + 2.0 * q.z0)
    )
    return ((window - 2.0 * q.t_s) * h_on + 2.0 * ramp) / window


def analytic_il(q: LossQuery) -> float:
    """Insertion loss in dB of the two-switch cascade at DC:
    -40 * log10(mean h)."""
    return -40.0 * math.log10(mean_transmission(q))


def loss_contour(t_s_values, delta_values, r_on: float, r_off: float, z0: float = 50.0) -> np.ndarray:
    """Insertion-loss grid in dB: rows follow t_s_values, columns delta_values.

    Every (t_s, delta) pair must satisfy t_s < delta; an invalid pair is
    reported with its indices.
    """
    ts = [float(x) for x in t_s_values]
    ds = [float(x) for x in delta_values]
    if not ts or not ds:
        raise ConfigError("contour needs at least one t_s and one delta value")
    out = np.empty((len(ts), len(ds)))
    for i, t_s in enumerate(ts):
        for j, delta in enumerate(ds):
            if not t_s < delta:
                raise ConfigError(
                    f"invalid pair at (t_s index {i}, delta index {j}): "
                    f"t_s={t_s} s must be smaller than delta={delta} s"
                )
            out[i, j] = analytic_il(LossQuery(t_s=t_s, delta=delta, r_on=r_on, r_off=r_off, z0=z0))
    return out


def write_contour_csv(t_s_values, delta_values, grid: np.ndarray, path) -> None:
    """CSV: header row of delta values (ns), first column of t_s values
    (ns), body of IL in dB with 4 decimal places."""
    grid = np.asarray(grid)
    if grid.shape != (len(t_s_values), len(delta_values)):
        raise ConfigError(
            f"grid shape {grid.shape} does not match {len(t_s_values)} t_s x "
            f"{len(delta_values)} delta values"
        )
    with open(path, "w", encoding="utf-8") as fh:
        header = ["t_s_ns\\delta_ns"] + [f"{d / 1e-9:.6g}" for d in delta_values]
        fh.write(",".join(header) + "\n")
        for i, t_s in enumerate(t_s_values):
            row = [f"{t_s / 1e-9:.6g}"] + [f"{grid[i, j]:.4f}" for j in range(len(delta_values))]
            fh.write(",".join(row) + "\n")
