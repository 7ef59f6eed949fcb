"""Vectorized multi-replica simulation engines.

The schedule-driven machinery in :mod:`tocp.processes` is exact but
touches one event at a time, which is too slow for estimators that need
10^5 independent replicas.  The engines here exploit the superposition
property of the per-vertex Poisson clocks: merged over a graph with V
vertices, events arrive as a single Poisson stream of rate
``V * (1 + lam)`` whose marks are an independent uniform vertex and an
infect/heal flag with infect probability ``lam / (1 + lam)``.  Replicas
are then advanced in lock step, one event per replica per pass, with all
per-event work done by numpy over the replica axis.

For the spin and counting processes the state at an observation time
depends only on the event *sequence*, so event counts per observation
interval are drawn Poisson and no event times are generated at all.
The real-valued process needs times for its drift and keeps them.

Determinism: given the same ``(graph, lam, obs, n_replicas, seed)`` the
output is reproducible; replica blocks derive their generators from
``SeedSequence(seed, spawn_key=(block_index,))``.

Agreement with the schedule-driven reference dynamics is established
statistically in the test suite; couplings that need *shared* clocks
always go through :class:`tocp.clocks.ClockSchedule` instead.
"""
from __future__ import annotations

import numpy as np

from .graphs import FiniteGraph

__all__ = [
    "spin_replicas",
    "counts_replicas",
    "reals_replicas",
    "set_survival_replicas",
    "branching_replicas",
]

_XI_GUARD = 1 << 60  # counting values beyond this abort the int64 fast path

_BLOCK_BYTES = 256 * 1024 * 1024


def _block_size(n_replicas: int, n_vertices: int, itemsize: int, arrays: int = 1) -> int:
    per_replica = (n_vertices + 1) * itemsize * arrays
    b = int(_BLOCK_BYTES // max(per_replica, 1))
    return max(256, min(n_replicas, b))


def _padded_neighbors(graph: FiniteGraph):
    """(V, width) int64 neighbour matrix padded with the phantom index V."""
    return graph.nbr.astype(np.int64, copy=False), graph.n_vertices


def _check_obs(obs_times) -> np.ndarray:
    obs = np.asarray(obs_times, dtype=np.float64)
    if obs.ndim != 1 or len(obs) == 0:
        raise ValueError("need at least one observation time")
    if (np.diff(obs) < 0).any() or obs[0] < 0:
        raise ValueError("observation times must be sorted and nonnegative")
    return obs


# ---------------------------------------------------------------------------
# spin process (eta)


def spin_replicas(
    graph: FiniteGraph,
    lam: float,
    obs_times,
    observe_vertex: int,
    n_replicas: int,
    seed: int,
    initial: np.ndarray | None = None,
) -> np.ndarray:
    """Spin value at ``observe_vertex`` for many independent replicas.

    Starts from all ones unless ``initial`` (a length-V 0/1 vector) is
    given.  Returns a uint8 array of shape ``(len(obs_times), n_replicas)``.
    Replicas whose configuration hits all-zero are retired early (the
    state is absorbing).
    """
    obs = _check_obs(obs_times)
    NBR, V = _padded_neighbors(graph)
    p_inf = lam / (1.0 + lam)
    rate = V * (1.0 + lam)
    out = np.zeros((len(obs), n_replicas), dtype=np.uint8)
    bs = _block_size(n_replicas, V, 1)
    n_blocks = (n_replicas + bs - 1) // bs
    for blk in range(n_blocks):
        lo, hi = blk * bs, min((blk + 1) * bs, n_replicas)
        B = hi - lo
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(blk,)))
        )
        state = np.empty((B, V + 1), dtype=np.uint8)
        if initial is None:
            state[:, :V] = 1
        else:
            state[:, :V] = np.asarray(initial, dtype=np.uint8)[None, :]
        state[:, V] = 0
        flat = state.reshape(-1)
        orig = np.arange(lo, hi, dtype=np.int64)
        inf_cnt = state[:, :V].sum(axis=1, dtype=np.int64)
        prev_t = 0.0
        for j, t_obs in enumerate(obs):
            dt = t_obs - prev_t
            prev_t = t_obs
            if dt > 0 and len(orig) > 0:
                n_ev = rng.poisson(rate * dt, size=len(orig))
                max_ev = int(n_ev.max()) if len(n_ev) else 0
                rowbase = np.arange(len(orig), dtype=np.int64) * (V + 1)
                for step in range(max_ev):
                    act = np.flatnonzero(n_ev > step)
                    r = rng.random(len(orig))
                    ru = r[act] * V
                    u = ru.astype(np.int64)
                    is_inf = (ru - u) < p_inf
                    hr = act[~is_inf]
                    pos_h = rowbase[hr] + u[~is_inf]
                    old = flat[pos_h]
                    flat[pos_h] = 0
                    inf_cnt[hr] -= old  # one event per replica: indices unique
                    ir = act[is_inf]
                    ui = u[is_inf]
                    pos_i = rowbase[ir] + ui
                    old_i = flat[pos_i]
                    grew = flat[rowbase[ir][:, None] + NBR[ui]].max(axis=1)
                    newv = old_i | grew
                    flat[pos_i] = newv
                    inf_cnt[ir] += (newv - old_i).astype(np.int64)
                    # drop extinct replicas every so often: all-zero is absorbing
                    if step % 512 == 511:
                        dead = inf_cnt == 0
                        if dead.mean() > 0.25:
                            keep = ~dead
                            state = np.ascontiguousarray(state[keep])
                            flat = state.reshape(-1)
                            orig = orig[keep]
                            n_ev = n_ev[keep]
                            inf_cnt = inf_cnt[keep]
                            rowbase = np.arange(len(orig), dtype=np.int64) * (V + 1)
            if len(orig) > 0:
                out[j, orig] = state[:, observe_vertex]
        del state, flat
    return out


# ---------------------------------------------------------------------------
# counting process (xi)


def counts_replicas(
    graph: FiniteGraph,
    lam: float,
    obs_times,
    observe_vertex: int,
    n_replicas: int,
    seed: int,
) -> np.ndarray:
    """Counting-process value at ``observe_vertex`` across replicas.

    Starts from all ones.  Values are int64 with a guard at 2**60; the
    guard trips only in astronomically unlikely tails at the horizons
    this engine is used for (use the schedule-driven exact-integer path
    for long horizons).  Returns shape ``(len(obs_times), n_replicas)``.
    """
    obs = _check_obs(obs_times)
    NBR, V = _padded_neighbors(graph)
    p_inf = lam / (1.0 + lam)
    rate = V * (1.0 + lam)
    out = np.zeros((len(obs), n_replicas), dtype=np.int64)
    bs = _block_size(n_replicas, V, 8)
    n_blocks = (n_replicas + bs - 1) // bs
    for blk in range(n_blocks):
        lo, hi = blk * bs, min((blk + 1) * bs, n_replicas)
        B = hi - lo
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(blk,)))
        )
        state = np.ones((B, V + 1), dtype=np.int64)
        state[:, V] = 0
        flat = state.reshape(-1)
        rowbase = np.arange(B, dtype=np.int64) * (V + 1)
        prev_t = 0.0
        for j, t_obs in enumerate(obs):
            dt = t_obs - prev_t
            prev_t = t_obs
            if dt > 0:
                n_ev = rng.poisson(rate * dt, size=B)
                for step in range(int(n_ev.max()) if B else 0):
                    act = np.flatnonzero(n_ev > step)
                    r = rng.random(B)
                    ru = r[act] * V
                    u = ru.astype(np.int64)
                    is_inf = (ru - u) < p_inf
                    flat[rowbase[act[~is_inf]] + u[~is_inf]] = 0
                    ir = act[is_inf]
                    ui = u[is_inf]
                    if len(ir):
                        add = flat[rowbase[ir][:, None] + NBR[ui]].sum(axis=1)
                        pos = rowbase[ir] + ui
                        newv = flat[pos] + add
                        flat[pos] = newv
                        if int(newv.max()) > _XI_GUARD:
                            raise RuntimeError(
                                "counting values exceeded the int64 guard; "
                                "use the exact schedule-driven run instead"
                            )
            out[j, lo:hi] = state[:, observe_vertex]
        del state, flat
    return out


# ---------------------------------------------------------------------------
# real-valued process (zeta)


def reals_replicas(
    graph: FiniteGraph,
    lam: float,
    d_param: int,
    obs_times,
    observe_vertex: int,
    n_replicas: int,
    seed: int,
) -> np.ndarray:
    """Drift-corrected real value at ``observe_vertex`` across replicas.

    Starts from all ones; between events every coordinate decays or
    grows by ``exp((1 - 2*lam*d_param) * dt)``, applied lazily.  Returns
    float64 of shape ``(len(obs_times), n_replicas)``.
    """
    obs = _check_obs(obs_times)
    if not graph.is_regular() or graph.deg[0] != 2 * d_param:
        raise ValueError("zeta dynamics require a 2d-regular graph")
    NBR, V = _padded_neighbors(graph)
    p_inf = lam / (1.0 + lam)
    rate = V * (1.0 + lam)
    c = 1.0 - 2.0 * lam * d_param
    n_obs = len(obs)
    out = np.zeros((n_obs, n_replicas), dtype=np.float64)
    bs = _block_size(n_replicas, V, 8, arrays=2)
    n_blocks = (n_replicas + bs - 1) // bs
    for blk in range(n_blocks):
        lo, hi = blk * bs, min((blk + 1) * bs, n_replicas)
        B = hi - lo
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(blk,)))
        )
        val = np.ones((B, V + 1), dtype=np.float64)
        val[:, V] = 0.0
        lu = np.zeros((B, V + 1), dtype=np.float64)
        vflat = val.reshape(-1)
        lflat = lu.reshape(-1)
        rowbase = np.arange(B, dtype=np.int64) * (V + 1)
        t = np.zeros(B)
        oi = np.zeros(B, dtype=np.int64)
        active = oi < n_obs
        while active.any():
            dt = rng.exponential(1.0 / rate, size=B)
            tn = t + dt
            # record observations falling strictly before the next event
            while True:
                rec = active & (tn > obs[np.minimum(oi, n_obs - 1)]) & (oi < n_obs)
                rows = np.flatnonzero(rec)
                if len(rows) == 0:
                    break
                t_o = obs[oi[rows]]
                pos = rowbase[rows] + observe_vertex
                out[oi[rows], lo + rows] = vflat[pos] * np.exp(c * (t_o - lflat[pos]))
                oi[rows] += 1
                active = oi < n_obs
            rows = np.flatnonzero(active)
            if len(rows) == 0:
                break
            r = rng.random(B)
            ru = r[rows] * V
            u = ru.astype(np.int64)
            is_inf = (ru - u) < p_inf
            hr = rows[~is_inf]
            pos_h = rowbase[hr] + u[~is_inf]
            vflat[pos_h] = 0.0
            lflat[pos_h] = tn[hr]
            ir = rows[is_inf]
            ui = u[is_inf]
            if len(ir):
                t_ev = tn[ir]
                nidx = rowbase[ir][:, None] + NBR[ui]
                nv = vflat[nidx] * np.exp(c * (t_ev[:, None] - lflat[nidx]))
                vflat[nidx] = nv
                lflat[nidx] = t_ev[:, None]
                pos = rowbase[ir] + ui
                self_v = vflat[pos] * np.exp(c * (t_ev - lflat[pos]))
                vflat[pos] = self_v + nv.sum(axis=1)
                lflat[pos] = t_ev
            t = tn
        del val, lu, vflat, lflat
    return out


# ---------------------------------------------------------------------------
# set-valued processes (dual / branching survival)


class _BufferedRng:
    """Scalar exponential / uniform / choice draws served from batches."""

    def __init__(self, rng: np.random.Generator, chunk: int = 8192):
        self.rng = rng
        self.chunk = chunk
        self._exp = rng.exponential(1.0, size=chunk)
        self._uni = rng.random(chunk)
        self._ie = 0
        self._iu = 0

    def exponential(self) -> float:
        if self._ie == self.chunk:
            self._exp = self.rng.exponential(1.0, size=self.chunk)
            self._ie = 0
        v = self._exp[self._ie]
        self._ie += 1
        return v

    def uniform(self) -> float:
        if self._iu == self.chunk:
            self._uni = self.rng.random(self.chunk)
            self._iu = 0
        v = self._uni[self._iu]
        self._iu += 1
        return v


def set_survival_replicas(
    neighbors_fn,
    start_vertex: int,
    lam: float,
    t_end: float,
    n_replicas: int,
    seed: int,
    cap: int = 2000,
) -> int:
    """Number of replicas whose dual set is nonempty at ``t_end``.

    Only clocks of current members matter: each member rings at rate
    ``1 + lam``; an infect ring adds all neighbours (member stays), a
    heal ring removes the member.  Replicas reaching ``cap`` members are
    declared survivors: dying back from that size within the remaining
    horizon has negligible probability at the horizons used here, and
    the cap keeps supercritical runs from exploding.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed)))
    buf = _BufferedRng(rng)
    p_inf = lam / (1.0 + lam)
    survived = 0
    for _ in range(n_replicas):
        members = [start_vertex]
        pos = {start_vertex: 0}
        t = 0.0
        while True:
            sz = len(members)
            if sz == 0:
                break
            if sz >= cap:
                survived += 1
                break
            t += buf.exponential() / ((1.0 + lam) * sz)
            if t > t_end:
                survived += 1
                break
            i = int(buf.uniform() * sz)
            x = members[i]
            if buf.uniform() < p_inf:
                for y in neighbors_fn(x):
                    y = int(y)
                    if y not in pos:
                        pos[y] = len(members)
                        members.append(y)
            else:
                last = members.pop()
                if last != x:
                    members[i] = last
                    pos[last] = i
                del pos[x]
    return survived


def branching_replicas(
    n: int,
    lam: float,
    t_end: float,
    depth: int,
    n_replicas: int,
    seed: int,
    frontier: str = "escape",
    max_events: int = 50_000_000,
) -> dict:
    """Survival statistics for the oriented branching set process.

    Members are tracked by depth only (each vertex of the oriented tree
    is entered at most once from a single-root start, so the set process
    is an honest branching process and depths are a sufficient state).

    ``frontier`` controls what happens at the truncation depth:

    * ``"escape"``: a lineage reaching ``depth`` certifies survival for
      its replica (the standard window-crossing criterion; equals
      survival of the embedded offspring chain past ``depth``
      generations, up to lineages still in flight at ``t_end``).
    * ``"absorb"``: members at ``depth`` exist but leave no offspring,
      the graph-faithful truncated dynamics; survival probabilities are
      biased low once the population front reaches the boundary.

    Returns a dict with ``survived``, ``replicas`` and interior event
    counts ``heal_events`` / ``infect_events`` (events at members of
    depth < ``depth``, whose infect fraction estimates the offspring
    rate).
    """
    if frontier not in ("escape", "absorb"):
        raise ValueError("frontier must be 'escape' or 'absorb'")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed)))
    buf = _BufferedRng(rng)
    p_inf = lam / (1.0 + lam)
    survived = 0
    heal_events = 0
    infect_events = 0
    budget = max_events
    for _ in range(n_replicas):
        cnt = [0] * (depth + 1)
        cnt[0] = 1
        total = 1
        t = 0.0
        while True:
            if total == 0:
                break
            t += buf.exponential() / ((1.0 + lam) * total)
            if t > t_end:
                survived += 1
                break
            budget -= 1
            if budget < 0:
                raise RuntimeError("branching event budget exhausted")
            m = buf.uniform() * total
            j = 0
            acc = cnt[0]
            while acc <= m:
                j += 1
                acc += cnt[j]
            if buf.uniform() < p_inf:
                if j < depth:
                    infect_events += 1
                    cnt[j] -= 1
                    if frontier == "escape" and j + 1 == depth:
                        survived += 1
                        break
                    cnt[j + 1] += n
                    total += n - 1
                else:
                    # truncation leaf: no sons exist, member drops out
                    cnt[j] -= 1
                    total -= 1
            else:
                if j < depth:
                    heal_events += 1
                cnt[j] -= 1
                total -= 1
    return {
        "survived": survived,
        "replicas": n_replicas,
        "heal_events": heal_events,
        "infect_events": infect_events,
    }
