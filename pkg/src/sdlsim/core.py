"""Core domain types for switched-delay-line networks.

A network is N identical delay lines with up to 2N ports: odd-numbered
ports attach to the left ends, even-numbered ports to the right ends.
Every (port, line) pair on the same side is joined by an SPST switch
that is open-reflective when off.  Switches are modeled as time-varying
resistances that ramp linearly between an off-state and an on-state
value over a finite switching time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

NS = 1e-9

_SPEC_KEYS = {
    "n_lines", "delta_ns", "z0_ohm", "r_on_ohm", "r_off_ohm",
    "t_s_ns", "line_loss_db", "ports_present",
}


def seconds_to_ns(x: float) -> float:
    """Seconds to nanoseconds, snapped to 12 significant digits.

    Division by 1e-9 leaves one-ulp dirt on decimally-clean values
    (10.5e-9 / 1e-9 != 10.5); snapping keeps schedule documents and
    interval bounds exactly as the user wrote them while preserving
    1e-12 relative precision for arbitrary values.
    """
    return float(f"{x / NS:.12g}")




class ConfigError(ValueError):
    """Invalid configuration, schedule, or input document."""


@dataclass(frozen=True)
class SwitchModel:
    """Resistive SPST switch: on/off resistances and a linear ramp time."""

    r_on: float
    r_off: float
    t_s: float

    def violations(self) -> list[str]:
        out = []
        if not (0.0 <= self.r_on < self.r_off):
            out.append(f"switch.r_on/r_off: need 0 <= r_on < r_off, got {self.r_on}/{self.r_off}")
        if self.t_s < 0.0:
            out.append(f"switch.t_s: must be >= 0, got {self.t_s}")
        return out


@dataclass(frozen=True)
class LineModel:
    """Delay line: one-way delay and a flat per-traversal attenuation."""

    delay: float
    loss_db: float = 0.0

    def violations(self) -> list[str]:
        out = []
        if not self.delay > 0.0:
            out.append(f"line.delay: must be > 0, got {self.delay}")
        if self.loss_db < 0.0:
            out.append(f"line.loss_db: must be >= 0, got {self.loss_db}")
        return out

    @property
    def amplitude_factor(self) -> float:
        return 10.0 ** (-self.loss_db / 20.0)


@dataclass(frozen=True)
class NetworkSpec:
    """Full description of one switched-delay-line network."""

    n_lines: int
    switch: SwitchModel
    line: LineModel
    z0: float = 50.0
    ports_present: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.ports_present and self.n_lines >= 1:
            object.__setattr__(self, "ports_present", tuple(range(1, 2 * self.n_lines + 1)))
        else:
            object.__setattr__(self, "ports_present", tuple(sorted(set(self.ports_present))))

    @property
    def n_ports_full(self) -> int:
        return 2 * self.n_lines

    @property
    def delay(self) -> float:
        return self.line.delay

    def left_ports(self) -> tuple[int, ...]:
        return tuple(p for p in self.ports_present if p % 2 == 1)

    def right_ports(self) -> tuple[int, ...]:
        return tuple(p for p in self.ports_present if p % 2 == 0)

    def violations(self) -> list[str]:
        out = []
        if self.n_lines < 1:
            out.append(f"n_lines: must be >= 1, got {self.n_lines}")
        if self.z0 <= 0.0:
            out.append(f"z0: must be > 0, got {self.z0}")
        out.extend(self.switch.violations())
        out.extend(self.line.violations())
        if self.line.delay > 0 and not self.switch.t_s < self.line.delay:
            out.append(
                f"switch.t_s: switching time ({self.switch.t_s}) must be smaller "
                f"than the line delay ({self.line.delay})"
            )
        if not self.ports_present:
            out.append("ports_present: must be nonempty")
        bad = [p for p in self.ports_present if not 1 <= p <= 2 * self.n_lines]
        if bad:
            out.append(f"ports_present: out of range 1..{2 * self.n_lines}: {bad}")
        absent = 2 * self.n_lines - len(self.ports_present)
        if absent not in (0, 1):
            out.append(
                f"ports_present: a network is either full or has exactly one "
                f"port absent; {absent} ports are missing"
            )
        return out


def validate_spec(spec: NetworkSpec) -> NetworkSpec:
    """Check every invariant; raise ConfigError naming each violated field."""
    problems = spec.violations()
    if problems:
        raise ConfigError("invalid network spec: " + "; ".join(problems))
    return spec


@dataclass(frozen=True)
class Schedule:
    """Periodic on-intervals, in nanoseconds, for each (port, line) switch.

    Time is kept in nanoseconds internally so that the JSON round trip
    (which uses *_ns keys) is bit-exact.  Intervals are half-open
    [start, end), disjoint, sorted, and contained in [0, hyperperiod).
    """

    hyperperiod_ns: float
    switches: dict[tuple[int, int], tuple[tuple[float, float], ...]] = field(default_factory=dict)

    @property
    def hyperperiod(self) -> float:
        """Hyperperiod in seconds."""
        return self.hyperperiod_ns * NS

    def intervals_seconds(self, port: int, line: int) -> list[tuple[float, float]]:
        return [(s * NS, e * NS) for s, e in self.switches.get((port, line), ())]

    def ports(self) -> tuple[int, ...]:
        return tuple(sorted({p for p, _ in self.switches}))

    def restricted(self, ports: tuple[int, ...]) -> "Schedule":
        """Drop switches whose port is not in `ports` (odd-port reduction)."""
        kept = {k: v for k, v in self.switches.items() if k[0] in ports}
        return Schedule(self.hyperperiod_ns, kept)

    def violations(self) -> list[str]:
        out = []
        if not self.hyperperiod_ns > 0:
            out.append(f"hyperperiod_ns: must be > 0, got {self.hyperperiod_ns}")
        for (p, n), ivs in sorted(self.switches.items()):
            prev_end = -1.0
            for s, e in ivs:
                if not (0.0 <= s < e <= self.hyperperiod_ns):
                    out.append(f"switch ({p},{n}): interval [{s},{e}) ns outside [0, {self.hyperperiod_ns}) ns")
                if s < prev_end:
                    out.append(f"switch ({p},{n}): intervals overlap or are unsorted near {s} ns")
                prev_end = e
        return out


def _circular_intervals(intervals, hyperperiod):
    """Normalize sorted [start, end) intervals into (start, length) pairs,
    merging a pair that abuts across the period boundary into one wrapped
    interval.  A switch held on for the whole period yields length == T."""
    ivs = [(float(s), float(e)) for s, e in intervals]
    if not ivs:
        return []
    T = float(hyperperiod)
    out = [(s, e - s) for s, e in ivs]
    if len(out) >= 2:
        first_s, first_len = out[0]
        last_s, last_len = out[-1]
        touches_zero = abs(first_s) <= 1e-9 * T
        touches_end = abs((last_s + last_len) - T) <= 1e-9 * T
        if touches_zero and touches_end:
            out = out[1:-1] + [(last_s, last_len + first_len)]
    elif abs(out[0][0]) <= 1e-9 * T and abs(out[0][1] - T) <= 1e-9 * T:
        out = [(0.0, T)]
    return out


def resistance_samples(times, intervals, hyperperiod: float, model: SwitchModel) -> np.ndarray:
    """Vectorized switch resistance over an array of times (seconds).

    Inside an on-interval the resistance ramps r_off -> r_on over the
    first t_s, holds r_on, then ramps r_on -> r_off over the last t_s.
    Outside every interval it is r_off.  Interval arithmetic wraps
    modulo the hyperperiod, so an interval pair that abuts across the
    period boundary behaves as one contiguous on-window.
    """
    t = np.asarray(times, dtype=float)
    T = float(hyperperiod)
    circ = _circular_intervals(intervals, T)
    r_on, r_off, t_s = model.r_on, model.r_off, model.t_s
    out = np.full(t.shape, r_off, dtype=float)
    for start, length in circ:
        if length >= T - 1e-9 * T:
            # switch never toggles: no ramps
            out[:] = r_on
            return out
        if t_s > 0 and not length > 2.0 * t_s:
            raise ConfigError(
                f"on-interval of length {length} s is too short for two "
                f"ramps of t_s={t_s} s (need length > 2*t_s)"
            )
        p = np.mod(t - start, T)
        inside = p < length
        if t_s == 0.0:
            out[inside] = r_on
            continue
        down = inside & (p < t_s)
        up = inside & (p >= length - t_s)
        out[inside] = r_on
        out[down] = r_off + (r_on - r_off) * (p[down] / t_s)
        out[up] = r_on + (r_off - r_on) * ((p[up] - (length - t_s)) / t_s)
    return out


def switch_resistance(t: float, intervals, hyperperiod: float, model: SwitchModel) -> float:
    """Switch resistance at time t (seconds), periodic with the hyperperiod."""
    return float(resistance_samples(np.array([t]), intervals, hyperperiod, model)[0])


def resistance_grid(
    intervals_ns, hyperperiod_ns: float, n_samples: int, dt: float, model: SwitchModel
) -> np.ndarray:
    """Switch resistance at each of n_samples uniform steps per hyperperiod.

    Window membership is decided on the integer sample grid (interval
    bounds are snapped to the nearest sample), so the on/off transitions
    of half-open intervals land on exact steps; only the continuous ramp
    interiors use float arithmetic.
    """
    cell_ns = hyperperiod_ns / n_samples
    bounds = []
    for s, e in intervals_ns:
        i0 = int(round(s / cell_ns))
        i1 = int(round(e / cell_ns))
        if not 0 <= i0 < i1 <= n_samples:
            raise ConfigError(f"interval [{s}, {e}) ns does not fit the sample grid")
        bounds.append((i0, i1 - i0))
    # wrap-merge a pair abutting across the period boundary
    if len(bounds) >= 2 and bounds[0][0] == 0 and bounds[-1][0] + bounds[-1][1] == n_samples:
        first = bounds.pop(0)
        start, length = bounds.pop()
        bounds.append((start, length + first[1]))
    r_on, r_off, t_s = model.r_on, model.r_off, model.t_s
    out = np.full(n_samples, r_off, dtype=float)
    idx = np.arange(n_samples)
    for start, length in bounds:
        if length >= n_samples:
            out[:] = r_on
            return out
        if t_s > 0 and not length * dt > 2.0 * t_s:
            raise ConfigError(
                f"on-interval of {length} samples is too short for two "
                f"ramps of t_s={t_s} s (need length > 2*t_s)"
            )
        p = (idx - start) % n_samples
        inside = p < length
        out[inside] = r_on
        if t_s > 0.0:
            tp = p * dt
            down = inside & (tp < t_s)
            up = inside & (tp > length * dt - t_s)
            out[down] = r_off + (r_on - r_off) * (tp[down] / t_s)
            out[up] = r_on + (r_off - r_on) * ((tp[up] - (length * dt - t_s)) / t_s)
    return out


def spec_to_dict(spec: NetworkSpec) -> dict:
    """Serialize to the flat JSON configuration document."""
    return {
        "n_lines": spec.n_lines,
        "delta_ns": seconds_to_ns(spec.line.delay),
        "z0_ohm": spec.z0,
        "r_on_ohm": spec.switch.r_on,
        "r_off_ohm": spec.switch.r_off,
        "t_s_ns": seconds_to_ns(spec.switch.t_s),
        "line_loss_db": spec.line.loss_db,
        "ports_present": list(spec.ports_present),
    }


def spec_from_dict(doc: dict) -> NetworkSpec:
    """Parse and validate the flat JSON configuration document.

    Unknown keys are rejected.  z0_ohm defaults to 50, line_loss_db to 0,
    and ports_present to all 2N ports.
    """
    if not isinstance(doc, dict):
        raise ConfigError(f"config must be a JSON object, got {type(doc).__name__}")
    unknown = set(doc) - _SPEC_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {"n_lines", "delta_ns", "r_on_ohm", "r_off_ohm", "t_s_ns"} - set(doc)
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    try:
        n_lines = int(doc["n_lines"])
        spec = NetworkSpec(
            n_lines=n_lines,
            switch=SwitchModel(
                r_on=float(doc["r_on_ohm"]),
                r_off=float(doc["r_off_ohm"]),
                t_s=float(doc["t_s_ns"]) * NS,
            ),
            line=LineModel(
                delay=float(doc["delta_ns"]) * NS,
                loss_db=float(doc.get("line_loss_db", 0.0)),
            ),
            z0=float(doc.get("z0_ohm", 50.0)),
            ports_present=tuple(int(p) for p in doc.get("ports_present", ())),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config value: {exc}") from exc
    return validate_spec(spec)


def reduce_network(spec: NetworkSpec, removed_port: int) -> NetworkSpec:
    """Remove one port, leaving its line end open in the removed slots.

    The port's switches cease to exist entirely, so waves arriving during
    its time slots see a total open reflection at the line end and finish
    the circulation on the next pass.
    """
    if removed_port not in spec.ports_present:
        raise ConfigError(f"port {removed_port} is not present; cannot remove it")
    if len(spec.ports_present) != 2 * spec.n_lines:
        raise ConfigError("network already has a port removed; only one reduction is supported")
    remaining = tuple(p for p in spec.ports_present if p != removed_port)
    return validate_spec(replace(spec, ports_present=remaining))


def amplitude_db(x: float, cap: float = 200.0) -> float:
    """-20*log10|x|, capped at `cap` dB for vanishing magnitudes."""
    m = abs(x)
    if m <= 10.0 ** (-cap / 20.0):
        return cap
    return min(-20.0 * math.log10(m), cap)
