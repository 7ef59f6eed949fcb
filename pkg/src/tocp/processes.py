"""The five coupled dynamics driven by a shared clock schedule.

* spin process ``eta``: healthy sites (0) become infected (1) at infect
  events when at least one neighbour is infected; heal events force 0.
* counting process ``xi``: nonnegative integers; an infect event at x
  adds the neighbour sum to x; heal zeroes x.  Exact (unbounded) Python
  integers, since values grow multiplicatively.
* real process ``zeta``: like ``xi`` over nonnegative reals, plus a
  deterministic exponential drift ``exp((1 - 2*lam*d) * dt)`` between
  events, applied lazily per vertex.
* dual set process: heal removes x; an infect event at a member x adds
  all neighbours of x (x stays).
* branching set process: on an oriented tree; an infect event at a
  member replaces it by its sons (leaves at the truncation depth are
  simply removed).

All step functions mutate their state argument in place and return it;
:func:`run` copies on observation.  State "at time t" means after all
events with time <= t.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import exp

import numpy as np

from .clocks import HEAL, ClockSchedule
from .graphs import FiniteGraph

__all__ = [
    "ZetaState",
    "all_ones_spin",
    "all_ones_counts",
    "all_ones_zeta",
    "step_eta",
    "step_xi",
    "step_zeta",
    "step_dual",
    "step_branch",
    "run",
    "coupled_run_eta_xi",
    "coupled_run_eta_zeta",
]


# ---------------------------------------------------------------------------
# state constructors


def all_ones_spin(graph: FiniteGraph) -> np.ndarray:
    """The all-infected spin configuration."""
    return np.ones(graph.n_vertices, dtype=np.uint8)


def all_ones_counts(graph: FiniteGraph) -> list[int]:
    """All-ones counting configuration (exact integers)."""
    return [1] * graph.n_vertices


@dataclass
class ZetaState:
    """Nonnegative reals plus per-vertex last-drift times.

    ``values[x]`` is the value as of ``last_update[x]``; reading at a
    later time multiplies by ``exp(drift * elapsed)`` exactly once per
    elapsed interval.
    """

    values: np.ndarray
    last_update: np.ndarray

    def copy(self) -> "ZetaState":
        return ZetaState(self.values.copy(), self.last_update.copy())

    def synced_values(self, t: float, drift: float) -> np.ndarray:
        """Values drifted to common time ``t`` (non-mutating)."""
        return self.values * np.exp(drift * (t - self.last_update))


def all_ones_zeta(graph: FiniteGraph) -> ZetaState:
    V = graph.n_vertices
    return ZetaState(np.ones(V, dtype=np.float64), np.zeros(V, dtype=np.float64))


# ---------------------------------------------------------------------------
# single-event transitions


def step_eta(config: np.ndarray, event, graph: FiniteGraph) -> np.ndarray:
    """Apply one event to a spin configuration."""
    _, x, kind = event
    if kind == HEAL:
        config[x] = 0
    elif config[x] == 0:
        adj = graph.adjacency(x)
        if config[adj].any():
            config[x] = 1
    return config


def step_xi(config: list[int], event, graph: FiniteGraph) -> list[int]:
    """Apply one event to a counting configuration (exact arithmetic)."""
    _, x, kind = event
    if kind == HEAL:
        config[x] = 0
    else:
        s = 0
        for y in graph.adjacency(x):
            s += config[y]
        config[x] += s
    return config


def step_zeta(config: ZetaState, event, graph: FiniteGraph, lam: float, d_param: int) -> ZetaState:
    """Apply one event to a real-valued configuration with lazy drift.

    Requires a ``2 * d_param``-regular graph.  Before the update, x (and
    for infect events its neighbours) are drift-synced to the event
    time.
    """
    if not graph.is_regular() or graph.deg[0] != 2 * d_param:
        raise ValueError("zeta dynamics require a 2d-regular graph")
    t, x, kind = event
    drift = 1.0 - 2.0 * lam * d_param
    vals, last = config.values, config.last_update
    if kind == HEAL:
        vals[x] = 0.0
        last[x] = t
        return config
    adj = graph.adjacency(x)
    vals[adj] *= np.exp(drift * (t - last[adj]))
    last[adj] = t
    vals[x] *= exp(drift * (t - last[x]))
    last[x] = t
    vals[x] += vals[adj].sum()
    return config


def step_dual(aset: set, event, graph: FiniteGraph) -> set:
    """Apply one event to the dual set process."""
    _, x, kind = event
    if kind == HEAL:
        aset.discard(x)
    elif x in aset:
        aset.update(graph.adjacency(x).tolist())
    return aset


def step_branch(sset: set, event, graph: FiniteGraph) -> set:
    """Apply one event to the branching set process (oriented tree only).

    An infect event at a member replaces it by its sons; truncation
    leaves have no sons, so the member is removed without offspring,
    which makes the truncated process a lower bound of the unbounded
    one.
    """
    if graph.sons is None:
        raise ValueError("branching process requires a tree with oriented sons")
    _, x, kind = event
    if kind == HEAL:
        sset.discard(x)
    elif x in sset:
        sset.discard(x)
        sset.update(graph.sons_of(x).tolist())
    return sset


# ---------------------------------------------------------------------------
# trajectory driver

_COPIERS = {
    "eta": lambda s: s.copy(),
    "xi": lambda s: list(s),
    "zeta": lambda s: s.copy(),
    "dual": lambda s: set(s),
    "branch": lambda s: set(s),
}


def run(
    kind: str,
    schedule: ClockSchedule,
    graph: FiniteGraph,
    initial,
    observe_times,
    lam: float | None = None,
    d_param: int | None = None,
):
    """Replay a schedule through one process and snapshot at given times.

    Parameters
    ----------
    kind : {"eta", "xi", "zeta", "dual", "branch"}
    schedule : ClockSchedule
        Drives the dynamics; deterministic replay.
    initial
        Process state (array / list / ZetaState / set); mutated.
    observe_times : sequence of float
        Sorted, within ``[0, horizon]``.  A snapshot at ``t`` reflects
        all events with time <= t.
    lam, d_param
        Required for ``kind="zeta"`` (drift rate ``1 - 2*lam*d_param``).

    Returns
    -------
    list
        One state copy per observation time (zeta snapshots are
        drift-synced to the observation time).
    """
    if kind not in _COPIERS:
        raise ValueError(f"unknown process kind {kind!r}")
    obs = list(observe_times)
    if any(b < a for a, b in zip(obs, obs[1:])):
        raise ValueError("observe_times must be sorted")
    if obs and (obs[0] < 0 or obs[-1] > schedule.horizon):
        raise ValueError("observation time beyond schedule horizon")
    if kind == "zeta":
        if lam is None or d_param is None:
            raise ValueError("zeta needs lam and d_param")
        drift = 1.0 - 2.0 * lam * d_param

    def snapshot(state, t):
        if kind == "zeta":
            out = state.copy()
            out.values = state.synced_values(t, drift)
            out.last_update = np.full_like(out.last_update, t)
            return out
        return _COPIERS[kind](state)

    state = initial
    out = []
    oi = 0
    step = {
        "eta": lambda st, ev: step_eta(st, ev, graph),
        "xi": lambda st, ev: step_xi(st, ev, graph),
        "zeta": lambda st, ev: step_zeta(st, ev, graph, lam, d_param),
        "dual": lambda st, ev: step_dual(st, ev, graph),
        "branch": lambda st, ev: step_branch(st, ev, graph),
    }[kind]
    for t, x, k in zip(schedule.times, schedule.vertices, schedule.kinds):
        while oi < len(obs) and obs[oi] < t:
            out.append(snapshot(state, obs[oi]))
            oi += 1
        if oi == len(obs):
            break
        state = step(state, (float(t), int(x), int(k)))
    while oi < len(obs):
        out.append(snapshot(state, obs[oi]))
        oi += 1
    return out


# ---------------------------------------------------------------------------
# coupled replays


def coupled_run_eta_xi(schedule: ClockSchedule, graph: FiniteGraph, observe_times):
    """Mismatch counts between eta and the indicator of xi > 0.

    Both processes start from all ones and replay the same schedule; the
    coupling identity says the count is always zero.
    """
    eta = all_ones_spin(graph)
    xi = all_ones_counts(graph)
    obs = list(observe_times)
    mismatches = []
    oi = 0

    def record():
        ind = np.fromiter((1 if v > 0 else 0 for v in xi), dtype=np.uint8, count=len(xi))
        mismatches.append(int((ind != eta).sum()))

    for t, x, k in zip(schedule.times, schedule.vertices, schedule.kinds):
        while oi < len(obs) and obs[oi] < t:
            record()
            oi += 1
        if oi == len(obs):
            break
        ev = (float(t), int(x), int(k))
        step_eta(eta, ev, graph)
        step_xi(xi, ev, graph)
    while oi < len(obs):
        record()
        oi += 1
    return mismatches


def coupled_run_eta_zeta(
    schedule: ClockSchedule, graph: FiniteGraph, observe_times, lam: float, d_param: int
):
    """Mismatch counts between eta and the indicator of zeta > 0."""
    eta = all_ones_spin(graph)
    zeta = all_ones_zeta(graph)
    obs = list(observe_times)
    mismatches = []
    oi = 0

    def record():
        ind = (zeta.values > 0).astype(np.uint8)
        mismatches.append(int((ind != eta).sum()))

    for t, x, k in zip(schedule.times, schedule.vertices, schedule.kinds):
        while oi < len(obs) and obs[oi] < t:
            record()
            oi += 1
        if oi == len(obs):
            break
        ev = (float(t), int(x), int(k))
        step_eta(eta, ev, graph)
        step_zeta(zeta, ev, graph, lam, d_param)
    while oi < len(obs):
        record()
        oi += 1
    return mismatches
