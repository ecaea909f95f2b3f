"""Frequency-domain extraction: single-bin DFT S-parameters, scalar
metrics, and Touchstone / CSV export.

S-parameters are evaluated only at the excitation frequency: each
transient is correlated against the tone over a window holding an
integer number of both tone cycles and schedule periods, so every DFT
bin is leakage-free.  Switching spurs at offsets of the schedule rate
are deliberately not reported.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, NetworkSpec, Schedule, spec_to_dict
from .clocks import schedule_to_dict, validate_schedule
from .engine import Excitation, SimConfig, TransientResult, compile_network

ISOLATION_CAP_DB = 200.0


@dataclass
class SParamGrid:
    """Complex scattering matrices S[p][q] on an ascending frequency list."""

    frequencies: np.ndarray            # (F,) Hz, strictly ascending
    ports: tuple[int, ...]             # port labels, ascending
    s: np.ndarray                      # (F, P, P) complex, S[f, p_idx, q_idx]
    z0: float = 50.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.s = np.asarray(self.s, dtype=complex)
        if self.frequencies.size and np.any(np.diff(self.frequencies) <= 0):
            raise ConfigError("frequencies must be strictly ascending")
        if not np.all(np.isfinite(self.s)):
            raise ConfigError("scattering matrix contains non-finite entries")

    @property
    def n_ports(self) -> int:
        return len(self.ports)

    def at(self, p: int, q: int) -> np.ndarray:
        """S[p][q] over all frequencies, by port label."""
        return self.s[:, self.ports.index(p), self.ports.index(q)]

    def column_power(self, q: int) -> np.ndarray:
        """Total scattered power sum_p |S[p][q]|^2, per frequency."""
        return np.sum(np.abs(self.s[:, :, self.ports.index(q)]) ** 2, axis=1)


def magnitude_db(values, cap: float = ISOLATION_CAP_DB) -> np.ndarray:
    """-20*log10|S| elementwise, capped so vanishing entries stay finite."""
    mags = np.maximum(np.abs(np.asarray(values)), 10.0 ** (-cap / 20.0))
    return np.minimum(-20.0 * np.log10(mags), cap)


def coherent_grid(
    schedule_hyperperiod: float,
    measure_hyperperiods: int,
    f_min: float,
    f_max: float,
    max_points: int,
    dt: float | None = None,
) -> list[float]:
    """Frequencies k / (measure_hyperperiods * hyperperiod) within [f_min, f_max].

    Every returned tone and every switching spur lands on an exact DFT bin
    of the measurement window.  If `dt` is given, the list is truncated
    below the discrete Nyquist rate.  At most `max_points` frequencies,
    spread evenly across the available bins.
    """
    if schedule_hyperperiod <= 0 or measure_hyperperiods < 1:
        raise ConfigError("need a positive hyperperiod and >= 1 measurement period")
    if max_points < 1:
        raise ConfigError(f"max_points must be >= 1, got {max_points}")
    window = measure_hyperperiods * schedule_hyperperiod
    if dt is not None:
        f_max = min(f_max, (0.5 / dt) * (1.0 - 1e-12))
    k_lo = max(1, math.ceil(f_min * window - 1e-9))
    k_hi = math.floor(f_max * window + 1e-9)
    if k_hi < k_lo:
        raise ConfigError(
            f"no coherent bins in [{f_min}, {f_max}] Hz: the {window} s "
            f"window has bin spacing {1.0 / window} Hz"
        )
    if k_hi - k_lo + 1 <= max_points:
        ks = range(k_lo, k_hi + 1)
    else:
        ks = sorted(set(int(round(x)) for x in np.linspace(k_lo, k_hi, max_points)))
    return [k / window for k in ks]


def extract_column(
    result: TransientResult,
    frequency: float | None = None,
    window: slice | None = None,
) -> dict[int, complex]:
    """One S-matrix column from a transient: S[p][q] = bin(b_p) / bin(a_q)."""
    f = result.excitation.frequency if frequency is None else frequency
    if window is None:
        window = slice(result.measure_start, result.n_steps)
    n_win = window.stop - window.start
    cycles = f * n_win * result.dt
    if abs(cycles - round(cycles)) > 1e-6 or round(cycles) < 1:
        raise ConfigError(
            f"window of {n_win} steps does not hold an integer number of "
            f"tone cycles at {f} Hz"
        )
    if n_win % result.steps_per_window_period != 0:
        raise ConfigError("window does not hold an integer number of schedule periods")
    t = np.arange(window.start, window.stop) * result.dt
    probe = np.exp(-2j * np.pi * f * t)
    a_bin = np.dot(result.a_src[window], probe)
    if a_bin == 0:
        raise ConfigError("excitation bin is empty; cannot normalize")
    return {p: complex(np.dot(result.b[p][window], probe) / a_bin) for p in result.ports}


def _sweep_columns(args):
    spec, schedule, cfg, q, frequencies = args
    model = compile_network(spec, schedule, cfg)
    out = []
    for f in frequencies:
        res = model.run(Excitation(port=q, frequency=f, amplitude=cfg.source_amplitude))
        out.append(extract_column(res))
    return q, out


def sweep(
    spec: NetworkSpec,
    schedule: Schedule,
    cfg: SimConfig,
    frequencies,
    jobs: int = 1,
) -> SParamGrid:
    """Full S-matrix: one transient per (excited port, frequency).

    Work items are independent; the assembled grid is identical for any
    execution order or parallelism.
    """
    freqs = [float(f) for f in frequencies]
    ports = tuple(sorted(spec.ports_present))
    n_p = len(ports)
    s = np.zeros((len(freqs), n_p, n_p), dtype=complex)

    tasks = [(spec, schedule, cfg, q, freqs) for q in ports]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_columns, tasks))
    else:
        results = [_sweep_columns(t) for t in tasks]

    for q, columns in results:
        qi = ports.index(q)
        for fi, col in enumerate(columns):
            for p, val in col.items():
                s[fi, ports.index(p), qi] = val

    meta = {
        "spec": spec_to_dict(spec),
        "schedule_sha256": schedule_digest(schedule),
        "z0_ohm": spec.z0,
    }
    return SParamGrid(frequencies=np.array(freqs), ports=ports, s=s, z0=spec.z0, meta=meta)


def schedule_digest(schedule: Schedule) -> str:
    doc = json.dumps(schedule_to_dict(schedule), sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()


@dataclass
class PathMetrics:
    """Scalar metrics per frequency, keyed by port (pairs)."""

    il_db: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    isolation_db: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    return_loss_db: dict[int, np.ndarray] = field(default_factory=dict)


def metrics(grid: SParamGrid, circulation) -> PathMetrics:
    """Insertion loss along the circulation, isolation elsewhere, and
    return loss per port.  `circulation` maps each source port to its
    intended receiver (CirculationState or plain dict)."""
    perm = dict(circulation.perm) if hasattr(circulation, "perm") else dict(circulation)
    missing = [p for p in perm if p not in grid.ports]
    if missing:
        raise ConfigError(f"circulation references ports absent from the grid: {missing}")
    out = PathMetrics()
    for p in grid.ports:
        out.return_loss_db[p] = magnitude_db(grid.at(p, p))
    for q in grid.ports:
        target = perm.get(q)
        for p in grid.ports:
            if p == q:
                continue
            if p == target:
                out.il_db[(q, p)] = magnitude_db(grid.at(p, q))
            else:
                out.isolation_db[(q, p)] = magnitude_db(grid.at(p, q))
    return out


def group_delay(grid: SParamGrid, from_port: int, to_port: int) -> np.ndarray:
    """Group delay (s) per adjacent frequency interval of the path."""
    if grid.frequencies.size < 2:
        raise ConfigError("group delay needs at least 2 frequency points")
    vals = grid.at(to_port, from_port)
    phase = np.unwrap(np.angle(vals))
    df = np.diff(grid.frequencies)
    gd = -np.diff(phase) / (2.0 * np.pi * df)
    if np.any(np.abs(gd * df) > 0.5):
        raise ConfigError(
            "frequency spacing exceeds half a cycle of the path delay; "
            "phase unwrapping is ambiguous -- use a denser grid"
        )
    return gd


def infer_circulation(schedule: Schedule, spec: NetworkSpec) -> dict[int, int] | None:
    """Recover the programmed circulation from the delta-offset pairing.

    Returns None when the pairing does not form a permutation (e.g. a
    hand-edited schedule, or a reduced network's wrap-around path, which
    is completed by reflection rather than by a paired switch)."""
    report = validate_schedule(schedule, spec)
    ports = schedule.ports()
    tx_lines: dict[int, set[int]] = {p: set() for p in ports}
    for (p, n), ivs in schedule.switches.items():
        if ivs:
            tx_lines[p].add(n)
    paired: dict[int, set[int]] = {}
    for tx, rx, line in report.receiver_offset_pairs:
        paired.setdefault((tx, rx), set()).add(line)
    perm: dict[int, int] = {}
    for (tx, rx), lines in paired.items():
        if lines == tx_lines[tx]:
            if tx in perm:
                return None
            perm[tx] = rx
    if sorted(perm) != list(ports) or sorted(perm.values()) != list(ports):
        return None
    return perm


# -- file formats ------------------------------------------------------------

def _fmt(x: float) -> str:
    """Shortest exact decimal form; guarantees bit-stable re-parsing."""
    return repr(float(x))


def write_touchstone(grid: SParamGrid, path) -> None:
    """Touchstone v1.1, real/imaginary, reference from the grid's z0.

    Two-port files use the standard column-major S11 S21 S12 S22 order;
    larger networks are written row per line, wrapped at four complex
    values per line.
    """
    if grid.frequencies.size == 0:
        raise ConfigError("refusing to write an empty grid")
    n = grid.n_ports
    expect = f".s{n}p"
    if not str(path).lower().endswith(expect):
        raise ConfigError(f"{path}: extension must be {expect} for a {n}-port grid")
    z0s = str(int(grid.z0)) if float(grid.z0).is_integer() else _fmt(grid.z0)
    lines = [f"# Hz S RI R {z0s}"]
    for fi, f in enumerate(grid.frequencies):
        m = grid.s[fi]
        if n <= 2:
            vals = []
            # 1- and 2-port records are single-line, column-major
            for q in range(n):
                for p in range(n):
                    vals += [_fmt(m[p, q].real), _fmt(m[p, q].imag)]
            lines.append(" ".join([_fmt(f)] + vals))
        else:
            for p in range(n):
                row = []
                for q in range(n):
                    row += [_fmt(m[p, q].real), _fmt(m[p, q].imag)]
                prefix = [_fmt(f)] if p == 0 else []
                for chunk_start in range(0, n, 4):
                    chunk = row[2 * chunk_start: 2 * (chunk_start + 4)]
                    lines.append(" ".join(prefix + chunk))
                    prefix = []
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_touchstone(path) -> SParamGrid:
    """Parse a Touchstone file written by write_touchstone (Hz, S, RI)."""
    match = re.search(r"\.s(\d+)p$", str(path).lower())
    if not match:
        raise ConfigError(f"{path}: cannot infer port count from extension")
    n = int(match.group(1))
    option = None
    numbers: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("!", 1)[0].strip()
            if not line:
                continue
            if line.startswith("#"):
                option = line.split()
                continue
            numbers.extend(float(tok) for tok in line.split())
    if option is None:
        raise ConfigError(f"{path}: missing option line")
    if [w.upper() for w in option[:4]] != ["#", "HZ", "S", "RI"]:
        raise ConfigError(f"{path}: unsupported option line {' '.join(option)}")
    z0 = float(option[5]) if len(option) >= 6 else 50.0
    per_record = 1 + 2 * n * n
    if not numbers or len(numbers) % per_record != 0:
        raise ConfigError(f"{path}: expected multiples of {per_record} values")
    freqs = []
    mats = []
    for i in range(0, len(numbers), per_record):
        rec = numbers[i:i + per_record]
        freqs.append(rec[0])
        body = rec[1:]
        m = np.empty((n, n), dtype=complex)
        if n <= 2:
            idx = 0
            for q in range(n):
                for p in range(n):
                    m[p, q] = complex(body[idx], body[idx + 1])
                    idx += 2
        else:
            idx = 0
            for p in range(n):
                for q in range(n):
                    m[p, q] = complex(body[idx], body[idx + 1])
                    idx += 2
        mats.append(m)
    return SParamGrid(
        frequencies=np.array(freqs),
        ports=tuple(range(1, n + 1)),
        s=np.array(mats),
        z0=z0,
    )


def write_csv(grid: SParamGrid, path) -> None:
    """CSV: freq_hz, then re/im of S[p][q] in row-major port order."""
    if grid.frequencies.size == 0:
        raise ConfigError("refusing to write an empty grid")
    header = ["freq_hz"]
    for p in grid.ports:
        for q in grid.ports:
            header += [f"re_S_{p}_{q}", f"im_S_{p}_{q}"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for fi, f in enumerate(grid.frequencies):
            row = [_fmt(f)]
            for pi in range(grid.n_ports):
                for qi in range(grid.n_ports):
                    v = grid.s[fi, pi, qi]
                    row += [_fmt(v.real), _fmt(v.imag)]
            fh.write(",".join(row) + "\n")
