"""Discrete-time traveling-wave transient simulator.

Each delay line carries one forward and one backward wave buffer of
exactly K samples (K = samples per delay).  Per timestep, the switch
network on each side of the lines is solved as a small nodal system:
every port node sits behind its reference impedance (Thevenin source
2a behind Z0), every line end presents its arriving wave the same way,
and the switches couple them with conductances 1/R(t).  A line end
with nothing conducting reflects with Gamma = +1 (open), which is what
completes the circulation in odd-port reduced networks.

With a single conducting switch the nodal solve reduces exactly to the
transmission coefficient h = 2*Z0 / (R + 2*Z0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ConfigError,
    NetworkSpec,
    Schedule,
    reduce_network,  # noqa: F401  (re-exported: reduction is an engine-level operation)
    resistance_grid,
    validate_spec,
)

# a resistance this far below any physical value is treated as an ideal
# short and solved by node merging instead of a huge conductance, which
# would wreck the conditioning of the nodal system
SHORT_THRESHOLD_OHM = 1e-9


@dataclass(frozen=True)
class SimConfig:
    """Discretization and measurement-window settings."""

    samples_per_delay: int = 128
    settle_hyperperiods: int = 8
    measure_hyperperiods: int = 4
    source_amplitude: float = 1.0

    def violations(self) -> list[str]:
        out = []
        if self.samples_per_delay < 32:
            out.append(f"samples_per_delay: must be >= 32, got {self.samples_per_delay}")
        if self.settle_hyperperiods < 4:
            out.append(f"settle_hyperperiods: must be >= 4, got {self.settle_hyperperiods}")
        if self.measure_hyperperiods < 1:
            out.append(f"measure_hyperperiods: must be >= 1, got {self.measure_hyperperiods}")
        if not math.isfinite(self.source_amplitude):
            out.append("source_amplitude: must be finite")
        return out


@dataclass(frozen=True)
class Excitation:
    """Single-tone Thevenin source (open-circuit amplitude, behind Z0)."""

    port: int
    frequency: float
    amplitude: float = 1.0


@dataclass
class TransientResult:
    """Recorded port waves of one transient run."""

    excitation: Excitation
    dt: float
    ports: tuple[int, ...]
    a_src: np.ndarray                 # incident wave at the excited port, per step
    b: dict[int, np.ndarray]          # outgoing wave per port, per step
    measure_start: int                # first step of the measurement window
    steps_per_window_period: int      # steps in one settle/measure period

    @property
    def n_steps(self) -> int:
        return self.a_src.shape[0]

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps) * self.dt


def _merge_groups(shorted_pairs, n_nodes: int) -> np.ndarray:
    """Union-find: map each node to a group index, merging shorted pairs."""
    parent = list(range(n_nodes))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in shorted_pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = sorted({find(i) for i in range(n_nodes)})
    index = {r: k for k, r in enumerate(roots)}
    return np.array([index[find(i)] for i in range(n_nodes)], dtype=int)


def scattering_operator(conductances, z0: float) -> np.ndarray:
    """Linear map from incident waves [a_ports, a_lines] to outgoing waves.

    conductances: (P, N) array, entries >= 0; np.inf marks an ideal short
    (the port and line nodes are merged exactly).  Returns the dense
    (P+N) x (P+N) operator T with b = T @ a.
    """
    g = np.asarray(conductances, dtype=float)
    if g.ndim != 2 or g.shape[1] < 1:
        raise ConfigError(f"conductance matrix must be (ports, lines) with >= 1 line, got {g.shape}")
    if np.any(np.isnan(g)) or np.any(g < 0):
        raise ConfigError("conductances must be nonnegative and not NaN")
    if not z0 > 0:
        raise ConfigError(f"z0 must be > 0, got {z0}")
    p, n = g.shape
    total = p + n

    shorted = np.isinf(g) | (g > 1.0 / SHORT_THRESHOLD_OHM)
    group = _merge_groups(
        [(m, p + k) for m, k in zip(*np.nonzero(shorted))], total
    )
    n_groups = int(group.max()) + 1

    m_sys = np.zeros((n_groups, n_groups))
    for i in range(total):
        m_sys[group[i], group[i]] += 1.0 / z0
    for mm, kk in zip(*np.nonzero((g > 0) & ~shorted)):
        gi, gj = group[mm], group[p + kk]
        if gi == gj:
            continue
        val = g[mm, kk]
        m_sys[gi, gi] += val
        m_sys[gj, gj] += val
        m_sys[gi, gj] -= val
        m_sys[gj, gi] -= val

    try:
        m_inv = np.linalg.inv(m_sys)
    except np.linalg.LinAlgError as exc:  # diag-dominant SPD: cannot happen
        raise RuntimeError(f"singular nodal system: {exc}") from exc

    agg = np.zeros((n_groups, total))
    agg[group, np.arange(total)] = 1.0
    return (2.0 / z0) * (agg.T @ m_inv @ agg) - np.eye(total)


def solve_side(a_ports, a_lines, conductances, z0: float = 50.0):
    """One-shot nodal solve of one side of the delay lines.

    Returns (outgoing_port_waves, injected_line_waves).  A line end with
    no conducting switch attached yields b_n = a_n (open reflection).
    """
    a_p = np.asarray(a_ports, dtype=float)
    a_n = np.asarray(a_lines, dtype=float)
    g = np.asarray(conductances, dtype=float)
    if g.shape != (a_p.size, a_n.size):
        raise ConfigError(
            f"conductance shape {g.shape} does not match {a_p.size} ports x {a_n.size} lines"
        )
    t_op = scattering_operator(g, z0)
    b = t_op @ np.concatenate([a_p, a_n])
    return b[: a_p.size], b[a_p.size:]


class _CompiledNetwork:
    """Per-sample side operators for one (spec, schedule, cfg) triple."""

    def __init__(self, spec: NetworkSpec, schedule: Schedule, cfg: SimConfig):
        validate_spec(spec)
        bad = cfg.violations()
        if bad:
            raise ConfigError("invalid sim config: " + "; ".join(bad))
        extra = [k for k in schedule.switches if k[0] not in spec.ports_present]
        if extra:
            raise ConfigError(f"schedule references absent ports: {sorted({k[0] for k in extra})}")
        problems = schedule.violations()
        if problems:
            raise ConfigError("invalid schedule: " + "; ".join(problems))

        self.spec = spec
        self.schedule = schedule
        self.cfg = cfg
        delta = spec.delay
        self.k = cfg.samples_per_delay
        self.dt = delta / self.k
        t_s = spec.switch.t_s
        if t_s > 0 and self.dt > t_s / 4:
            raise ConfigError(
                f"timestep {self.dt} s too coarse for t_s={t_s} s; "
                f"need samples_per_delay >= {math.ceil(4 * delta / t_s)}"
            )

        periods = schedule.hyperperiod / delta
        m_sched = int(round(periods))
        if m_sched < 1 or abs(periods - m_sched) > 1e-9 * periods:
            raise ConfigError(
                f"schedule hyperperiod ({schedule.hyperperiod} s) must be an "
                f"integer multiple of the line delay ({delta} s)"
            )
        self.steps_per_hyperperiod = m_sched * self.k

        self.left_ports = spec.left_ports()
        self.right_ports = spec.right_ports()
        self.ports = tuple(sorted(spec.ports_present))
        self.port_col = {p: i for i, p in enumerate(self.ports)}
        self.loss_factor = spec.line.amplitude_factor

        times = np.arange(self.steps_per_hyperperiod) * self.dt
        self.t_left = self._side_operators(self.left_ports, times)
        self.t_right = self._side_operators(self.right_ports, times)

    def _side_operators(self, side_ports, times) -> np.ndarray:
        """Stack of scattering operators, one per sample of the hyperperiod."""
        spec = self.spec
        h = times.size
        n = spec.n_lines
        p = len(side_ports)
        r_all = np.empty((h, p, n))
        for i, port in enumerate(side_ports):
            for line in range(1, n + 1):
                ivs = self.schedule.intervals_seconds(port, line)
                if ivs:
                    r_all[:, i, line - 1] = resistance_samples(
                        times, ivs, self.schedule.hyperperiod, spec.switch
                    )
                else:
                    r_all[:, i, line - 1] = spec.switch.r_off
        with np.errstate(divide="ignore"):
            g_all = np.where(r_all == 0.0, np.inf, 1.0 / r_all)

        ops = np.empty((h, p + n, p + n))
        cache: dict[bytes, np.ndarray] = {}
        for idx in range(h):
            key = g_all[idx].tobytes()
            t_op = cache.get(key)
            if t_op is None:
                t_op = scattering_operator(g_all[idx], spec.z0)
                cache[key] = t_op
            ops[idx] = t_op
        return ops

    def tone_steps(self, frequency: float) -> tuple[int, int]:
        """Coherence check; returns (bin index k, steps per effective period).

        The effective period is the least common multiple of the schedule
        hyperperiod and the tone period on the coherent measurement grid.
        """
        m = self.cfg.measure_hyperperiods
        window = m * self.schedule.hyperperiod
        x = frequency * window
        k = int(round(x))
        if k < 1 or abs(x - k) > 1e-6:
            raise ConfigError(
                f"frequency {frequency} Hz is not on the coherent grid "
                f"(bins of {1.0 / window} Hz)"
            )
        if frequency >= 0.5 / self.dt:
            raise ConfigError(f"frequency {frequency} Hz is at or above Nyquist ({0.5 / self.dt} Hz)")
        g = math.gcd(m, k)
        return k, (m // g) * self.steps_per_hyperperiod

    def run(self, exc: Excitation) -> TransientResult:
        if exc.port not in self.ports:
            raise ConfigError(f"excited port {exc.port} is not present")
        _, eff_steps = self.tone_steps(exc.frequency)
        cfg = self.cfg
        total = (cfg.settle_hyperperiods + cfg.measure_hyperperiods) * eff_steps
        measure_start = cfg.settle_hyperperiods * eff_steps

        k = self.k
        n = self.spec.n_lines
        h = self.steps_per_hyperperiod
        p_l, p_r = len(self.left_ports), len(self.right_ports)
        lf = self.loss_factor
        omega_dt = 2.0 * math.pi * exc.frequency * self.dt
        half_amp = 0.5 * exc.amplitude

        left_cols = np.array([self.port_col[p] for p in self.left_ports], dtype=int)
        right_cols = np.array([self.port_col[p] for p in self.right_ports], dtype=int)
        exc_side = "left" if exc.port % 2 == 1 else "right"
        exc_idx = (self.left_ports if exc_side == "left" else self.right_ports).index(exc.port)

        fwd = np.zeros((k, n))   # waves in flight, left -> right
        bwd = np.zeros((k, n))   # waves in flight, right -> left
        b_out = np.zeros((total, len(self.ports)))
        a_src = np.zeros(total)

        in_l = np.zeros((k, p_l + n))
        in_r = np.zeros((k, p_r + n))

        for s0 in range(0, total, k):
            phase = s0 % h
            steps = np.arange(s0, s0 + k)
            src = half_amp * np.sin(omega_dt * steps)
            a_src[s0:s0 + k] = src

            in_l[:] = 0.0
            in_r[:] = 0.0
            in_l[:, p_l:] = bwd * lf
            in_r[:, p_r:] = fwd * lf
            if exc_side == "left":
                in_l[:, exc_idx] = src
            else:
                in_r[:, exc_idx] = src

            out_l = np.matmul(self.t_left[phase:phase + k], in_l[:, :, None])[:, :, 0]
            out_r = np.matmul(self.t_right[phase:phase + k], in_r[:, :, None])[:, :, 0]

            b_out[s0:s0 + k, left_cols] = out_l[:, :p_l]
            b_out[s0:s0 + k, right_cols] = out_r[:, :p_r]
            fwd = out_l[:, p_l:]
            bwd = out_r[:, p_r:]

        return TransientResult(
            excitation=exc,
            dt=self.dt,
            ports=self.ports,
            a_src=a_src,
            b={p: b_out[:, i] for p, i in self.port_col.items()},
            measure_start=measure_start,
            steps_per_window_period=eff_steps,
        )


def compile_network(spec: NetworkSpec, schedule: Schedule, cfg: SimConfig) -> _CompiledNetwork:
    """Precompute per-sample side operators; reusable across excitations."""
    return _CompiledNetwork(spec, schedule, cfg)


def run_transient(
    spec: NetworkSpec, schedule: Schedule, exc: Excitation, cfg: SimConfig | None = None
) -> TransientResult:
    """Simulate one single-tone excitation and record all port waves."""
    return compile_network(spec, schedule, cfg or SimConfig()).run(exc)


def write_traces_csv(result: TransientResult, path) -> None:
    """Full-rate trace dump: t_ns, a_q, then b per port."""
    cols = ["t_ns", f"a_{result.excitation.port}"] + [f"b_{p}" for p in result.ports]
    t_ns = result.times() / 1e-9
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(result.n_steps):
            row = [repr(float(t_ns[i])), repr(float(result.a_src[i]))]
            row += [repr(float(result.b[p][i])) for p in result.ports]
            fh.write(",".join(row) + "\n")
