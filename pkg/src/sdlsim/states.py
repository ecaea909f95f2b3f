"""Programmable circulation states: admissibility, counting, enumeration,
and constructive clock synthesis.

A circulation state is a permutation of the 2N ports saying which port
receives each port's signal.  Two structural rules bound the accessible
states: a mapped pair must cross the delay lines (same-side circulation
is impossible), and no pair may map to each other (the network is
nonreciprocal, so S_ij and S_ji cannot both be transmission paths).
Every cycle of an admissible permutation therefore has even length >= 4
and alternates sides.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, NetworkSpec, Schedule, seconds_to_ns
from .clocks import _slot_windows_ns

ENUMERATION_LIMIT_N = 6


@dataclass(frozen=True)
class CirculationState:
    """Bijection on ports: pairs[(src, dst)] sorted by source port."""

    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def from_mapping(cls, mapping: dict[int, int]) -> "CirculationState":
        srcs = sorted(mapping)
        dsts = sorted(mapping.values())
        if srcs != dsts:
            raise ConfigError(f"circulation mapping is not a bijection on its ports: {mapping}")
        return cls(tuple((s, mapping[s]) for s in srcs))

    @property
    def perm(self) -> dict[int, int]:
        return dict(self.pairs)

    def ports(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self.pairs)

    def cycles(self) -> list[tuple[int, ...]]:
        """Disjoint cycles, each rotated to start at its lowest odd (left)
        port, listed in order of their lowest member."""
        perm = self.perm
        seen: set[int] = set()
        out = []
        for start in self.ports():
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            p = perm[start]
            while p != start:
                cyc.append(p)
                seen.add(p)
                p = perm[p]
            odd = [q for q in cyc if q % 2 == 1]
            if odd:
                i = cyc.index(min(odd))
                cyc = cyc[i:] + cyc[:i]
            out.append(tuple(cyc))
        return sorted(out, key=min)

    def matrix_a(self, n_lines: int) -> np.ndarray:
        """0/1 left-to-right sub-matrix: rows = odd ports, cols = even ports."""
        a = np.zeros((n_lines, n_lines), dtype=int)
        for s, d in self.pairs:
            if s % 2 == 1 and d % 2 == 0:
                a[(s - 1) // 2, d // 2 - 1] = 1
        return a

    def matrix_b(self, n_lines: int) -> np.ndarray:
        """0/1 right-to-left sub-matrix: rows = even ports, cols = odd ports."""
        b = np.zeros((n_lines, n_lines), dtype=int)
        for s, d in self.pairs:
            if s % 2 == 0 and d % 2 == 1:
                b[s // 2 - 1, (d - 1) // 2] = 1
        return b

    def to_dict(self) -> dict:
        return {str(s): d for s, d in self.pairs}


def state_from_dict(doc: dict) -> CirculationState:
    """Parse the {"src": dst, ...} JSON mapping."""
    try:
        mapping = {int(k): int(v) for k, v in doc.items()}
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"malformed circulation state document: {exc}") from exc
    return CirculationState.from_mapping(mapping)


def is_admissible(state, spec: NetworkSpec) -> tuple[bool, list[str]]:
    """Check the two structural rules; returns (ok, violation list)."""
    if isinstance(state, CirculationState):
        perm = state.perm
    else:
        perm = dict(state)
        CirculationState.from_mapping(perm)  # bijection check
    violations = []
    for s, d in sorted(perm.items()):
        if s not in spec.ports_present or d not in spec.ports_present:
            violations.append(f"{s}->{d}: port not present in the network")
        if (s % 2) == (d % 2):
            violations.append(f"{s}->{d}: circulation between ports on the same side is impossible")
        if perm.get(d) == s:
            violations.append(f"{s}->{d}->{s}: two-cycle would need transmission in both directions")
    return (not violations, violations)


def count_b_given_a(n: int) -> int:
    """Ways to route the reverse side once the forward side is fixed.

    Inclusion-exclusion over the n forbidden positions (the reverse of a
    forward pair), i.e. the derangement count D_n.  Exact integer.
    """
    if n < 0:
        raise ConfigError(f"n must be >= 0, got {n}")
    return sum((-1) ** k * math.comb(n, k) * math.factorial(n - k) for k in range(n + 1))


def count_states(n: int) -> int:
    """Total admissible circulation states of the full 2N-port network."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    return math.factorial(n) * count_b_given_a(n)


def enumerate_states(n: int, limit: int | None = None):
    """Yield every admissible state of the full 2N-port network.

    Deterministic lexicographic order over (forward, reverse) routing
    pairs.  Without `limit`, n must stay small: the state count grows
    exponentially.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if limit is None and n > ENUMERATION_LIMIT_N:
        raise ConfigError(
            f"refusing full enumeration for n={n} (> {ENUMERATION_LIMIT_N}); pass a limit"
        )
    left = tuple(range(1, 2 * n + 1, 2))
    right = tuple(range(2, 2 * n + 1, 2))

    def gen():
        count = 0
        for fwd in itertools.permutations(right):
            a = dict(zip(left, fwd))
            for rev in itertools.permutations(left):
                b = dict(zip(right, rev))
                if any(b[a[p]] == p for p in left):
                    continue
                yield CirculationState.from_mapping({**a, **b})
                count += 1
                if limit is not None and count >= limit:
                    return

    return gen()


def brute_force_count(n: int) -> int:
    """Independent oracle: count admissible states by direct enumeration."""
    spec_like = _FullPortSet(n)
    total = 0
    left = tuple(range(1, 2 * n + 1, 2))
    right = tuple(range(2, 2 * n + 1, 2))
    for fwd in itertools.permutations(right):
        for rev in itertools.permutations(left):
            mapping = {**dict(zip(left, fwd)), **dict(zip(right, rev))}
            ok, _ = is_admissible(mapping, spec_like)
            total += ok
    return total


class _FullPortSet:
    """Minimal stand-in exposing ports_present for admissibility checks."""

    def __init__(self, n: int):
        self.ports_present = tuple(range(1, 2 * n + 1))


def synth_schedule(state: CirculationState, spec: NetworkSpec) -> Schedule:
    """Build a clock schedule realizing an arbitrary admissible state.

    Each cycle of length 2c is given c dedicated delay lines and the
    canonical clocks of a 2c-port circulator with its ports relabeled in
    cycle order (sub-period 2*c*delta, duty 1/c).  The global hyperperiod
    is the least common multiple of the sub-periods; each sub-schedule is
    tiled across it.  Lowest-numbered free lines go to the cycle holding
    the lowest port, which keeps the construction deterministic.
    """
    if len(spec.ports_present) != 2 * spec.n_lines:
        raise ConfigError("state synthesis requires all 2N ports present")
    ok, violations = is_admissible(state, spec)
    if not ok:
        raise ConfigError("inadmissible circulation state: " + "; ".join(violations))
    if set(state.ports()) != set(spec.ports_present):
        raise ConfigError("state must map every port of the network exactly once")

    cycles = state.cycles()
    half_lengths = []
    for cyc in cycles:
        if len(cyc) % 2 != 0 or len(cyc) < 4:
            raise ConfigError(f"cycle {cyc} cannot alternate sides")  # unreachable past admissibility
        half_lengths.append(len(cyc) // 2)
    if sum(half_lengths) != spec.n_lines:
        raise ConfigError("cycles do not cover the network's lines exactly")

    delta_ns = seconds_to_ns(spec.delay)
    hyper_ns = 2 * math.lcm(*half_lengths) * delta_ns

    switches: dict[tuple[int, int], tuple[tuple[float, float], ...]] = {}
    next_line = 1
    for cyc, c in zip(cycles, half_lengths):
        lines = list(range(next_line, next_line + c))
        next_line += c
        sub_period_ns = 2 * c * delta_ns
        n_tiles = int(round(hyper_ns / sub_period_ns))
        for role, port in enumerate(cyc, start=1):
            for slot, line in enumerate(lines, start=1):
                j = (role + 2 * slot - 2) % (2 * c)
                base = _slot_windows_ns(j, c, delta_ns)
                tiled = []
                for r in range(n_tiles):
                    off = r * sub_period_ns
                    tiled.extend((s + off, e + off) for s, e in base)
                switches[(port, line)] = _merge_abutting(sorted(tiled), hyper_ns)
    return Schedule(hyperperiod_ns=hyper_ns, switches=switches)


def _merge_abutting(intervals, hyperperiod_ns: float) -> tuple[tuple[float, float], ...]:
    """Join intervals that touch end-to-start; the switch never actually
    turns off across a tile boundary, so no ramp may be inserted there."""
    tol = 1e-9 * hyperperiod_ns
    out: list[list[float]] = []
    for s, e in intervals:
        if out and abs(s - out[-1][1]) <= tol:
            out[-1][1] = e
        else:
            out.append([s, e])
    return tuple((s, e) for s, e in out)


def reduced_circulation(spec: NetworkSpec) -> dict[int, int]:
    """Circulation realized by the canonical clocks on a reduced network:
    m -> next present port, skipping the absent one."""
    ports = sorted(spec.ports_present)
    full = 2 * spec.n_lines
    out = {}
    for p in ports:
        q = p % full + 1
        while q not in spec.ports_present:
            q = q % full + 1
        out[p] = q
    return out
