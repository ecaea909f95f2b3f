"""Canonical switch clock generation and schedule validation.

The canonical clocks time-multiplex each port onto the N delay lines:
every switch clock has period 2*N*delta and duty cycle 1/N, and the
clocks of port m+1 are those of port m delayed by delta.  That timing
makes a signal entering port m leave at port m+1, i.e. the circulation
1 -> 2 -> ... -> 2N -> 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import NS, ConfigError, NetworkSpec, Schedule, seconds_to_ns

GRID_PER_DELAY = 64  # sampling resolution (fractions of delta) for validation


def slot_index(m: int, n: int, n_lines: int) -> int:
    """Time-slot index of switch (port m, line n) within the 2N-slot period."""
    if not 1 <= m <= 2 * n_lines:
        raise ConfigError(f"port index {m} out of range 1..{2 * n_lines}")
    if not 1 <= n <= n_lines:
        raise ConfigError(f"line index {n} out of range 1..{n_lines}")
    return (m + 2 * n - 2) % (2 * n_lines)


def _slot_windows_ns(j: int, n_lines: int, delta_ns: float) -> tuple[tuple[float, float], ...]:
    """On-windows (ns) of slot j within one period of 2*N*delta.

    Slot j != 0 is on during [(j-1)*delta, (j+1)*delta); slot 0 wraps
    around the period boundary and is stored as two half-open pieces.
    """
    if n_lines == 1:
        # degenerate two-port: the single window covers the whole period
        return ((0.0, 2.0 * delta_ns),)
    if j != 0:
        return (((j - 1) * delta_ns, (j + 1) * delta_ns),)
    return ((0.0, delta_ns), ((2 * n_lines - 1) * delta_ns, 2 * n_lines * delta_ns))


def clock_state(t: float, m: int, n: int, n_lines: int, delta: float) -> bool:
    """True if switch (m, n) is on at time t (seconds).

    Periodic with period 2*N*delta; the on-time per period is 2*delta.
    Window bounds are integer multiples of delta, evaluated directly so
    boundary membership is exact ([start, end) semantics).
    """
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    j = slot_index(m, n, n_lines)
    if n_lines == 1:
        return True
    tm = t % (2 * n_lines * delta)
    if j != 0:
        return (j - 1) * delta <= tm < (j + 1) * delta
    return tm < delta or tm >= (2 * n_lines - 1) * delta


def canonical_schedule(n_lines: int, delta: float) -> Schedule:
    """Schedule realizing the circulation 1 -> 2 -> ... -> 2N -> 1.

    Hyperperiod 2*N*delta; switch (m, n) is on exactly where clock_state
    says it is.
    """
    if n_lines < 1:
        raise ConfigError(f"n_lines must be >= 1, got {n_lines}")
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    delta_ns = seconds_to_ns(delta)
    switches = {}
    for m in range(1, 2 * n_lines + 1):
        for n in range(1, n_lines + 1):
            j = slot_index(m, n, n_lines)
            switches[(m, n)] = _slot_windows_ns(j, n_lines, delta_ns)
    return Schedule(hyperperiod_ns=2 * n_lines * delta_ns, switches=switches)


def default_schedule(spec: NetworkSpec) -> Schedule:
    """Canonical schedule restricted to the ports present in `spec`."""
    return canonical_schedule(spec.n_lines, spec.delay).restricted(spec.ports_present)


@dataclass
class ScheduleReport:
    """Result of sampling-based schedule validation."""

    ok: bool
    one_hot_per_port: dict[int, bool] = field(default_factory=dict)
    no_line_contention_per_side: dict[tuple[str, int], bool] = field(default_factory=dict)
    duty_cycles: dict[tuple[int, int], float] = field(default_factory=dict)
    receiver_offset_pairs: list[tuple[int, int, int]] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def offset_pair_set(self) -> set[tuple[int, int]]:
        return {(tx, rx) for tx, rx, _ in self.receiver_offset_pairs}


def _on_grid(schedule: Schedule, key, n_grid: int, cell_ns: float) -> np.ndarray:
    """Boolean on/off per grid cell for one switch; [start, end) semantics."""
    on = np.zeros(n_grid, dtype=bool)
    for s, e in schedule.switches.get(key, ()):
        i0 = int(round(s / cell_ns))
        i1 = int(round(e / cell_ns))
        on[i0:i1] = True
    return on


def validate_schedule(schedule: Schedule, spec: NetworkSpec) -> ScheduleReport:
    """Check one-hotness, line contention, duty, and delta-offset pairing.

    All checks run on an integer grid of delta/64 so that interval
    boundary comparisons are exact.
    """
    if not schedule.switches:
        raise ConfigError("schedule is empty")
    bad_keys = [k for k in schedule.switches if k[0] not in spec.ports_present]
    if bad_keys:
        raise ConfigError(f"schedule references absent ports: {sorted(set(k[0] for k in bad_keys))}")
    problems = schedule.violations()
    if problems:
        raise ConfigError("invalid schedule: " + "; ".join(problems))

    delta_ns = spec.delay / NS
    cell_ns = delta_ns / GRID_PER_DELAY
    n_grid = int(round(schedule.hyperperiod_ns / cell_ns))
    if abs(n_grid * cell_ns - schedule.hyperperiod_ns) > 1e-9 * schedule.hyperperiod_ns:
        raise ConfigError(
            f"hyperperiod {schedule.hyperperiod_ns} ns is not a multiple of delta/{GRID_PER_DELAY}"
        )

    report = ScheduleReport(ok=True)
    grids = {key: _on_grid(schedule, key, n_grid, cell_ns) for key in schedule.switches}

    ports = sorted({p for p, _ in schedule.switches})
    lines = range(1, spec.n_lines + 1)

    for p in ports:
        count = np.zeros(n_grid, dtype=int)
        for n in lines:
            g = grids.get((p, n))
            if g is not None:
                count += g
        good = bool(np.all(count == 1))
        report.one_hot_per_port[p] = good
        if not good:
            i = int(np.argmax(count != 1))
            report.failures.append(
                f"port {p}: {int(count[i])} switches on at t={i * cell_ns} ns (expected exactly 1)"
            )

    for side, parity in (("left", 1), ("right", 0)):
        for n in lines:
            count = np.zeros(n_grid, dtype=int)
            for p in ports:
                if p % 2 == parity % 2 and (p, n) in grids:
                    count += grids[(p, n)]
            good = bool(np.all(count <= 1))
            report.no_line_contention_per_side[(side, n)] = good
            if not good:
                i = int(np.argmax(count > 1))
                report.failures.append(
                    f"line {n} ({side} side): {int(count[i])} switches on at t={i * cell_ns} ns"
                )

    for key, g in grids.items():
        report.duty_cycles[key] = float(np.count_nonzero(g)) / n_grid

    # receivers: a port whose on-grid for line n equals a transmitter's
    # shifted by +delta (the wave's flight time across the line)
    shift = GRID_PER_DELAY
    for n in lines:
        for tx in ports:
            g_tx = grids.get((tx, n))
            if g_tx is None or not g_tx.any():
                continue
            shifted = np.roll(g_tx, shift)
            for rx in ports:
                if rx == tx or (rx % 2) == (tx % 2):
                    continue
                g_rx = grids.get((rx, n))
                if g_rx is not None and np.array_equal(g_rx, shifted):
                    report.receiver_offset_pairs.append((tx, rx, n))

    report.ok = not report.failures
    return report


def schedule_to_dict(schedule: Schedule) -> dict:
    """Serialize to the schedule JSON document (times in ns)."""
    return {
        "hyperperiod_ns": schedule.hyperperiod_ns,
        "switches": [
            {"port": p, "line": n, "intervals_ns": [[s, e] for s, e in ivs]}
            for (p, n), ivs in sorted(schedule.switches.items())
        ],
    }


def schedule_from_dict(doc: dict) -> Schedule:
    """Parse the schedule JSON document."""
    if not isinstance(doc, dict) or set(doc) != {"hyperperiod_ns", "switches"}:
        raise ConfigError("schedule document must have exactly the keys hyperperiod_ns, switches")
    try:
        switches = {}
        for entry in doc["switches"]:
            key = (int(entry["port"]), int(entry["line"]))
            if key in switches:
                raise ConfigError(f"duplicate switch entry for {key}")
            switches[key] = tuple(
                (float(s), float(e)) for s, e in entry["intervals_ns"]
            )
        sched = Schedule(hyperperiod_ns=float(doc["hyperperiod_ns"]), switches=switches)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed schedule document: {exc}") from exc
    problems = sched.violations()
    if problems:
        raise ConfigError("invalid schedule: " + "; ".join(problems))
    return sched
