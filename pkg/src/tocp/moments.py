"""Moment identities: closed-form means and the two-point correlation ODE.

The mean of the counting process on an r-regular graph solves a scalar
ODE with solution ``exp(t (lam * r - 1))``.  The two-point correlations
``G_t(x)`` of the drift-corrected real process on the d-lattice solve a
linear system ``dG/dt = Q G`` whose generator-like matrix ``Q`` acts on
functions of the displacement x.  Here ``Q`` is realized on a truncated
sup-norm box with absorbing boundary (columns leaving the box are
dropped), which only removes nonnegative mass from ``exp(tQ)`` and so
keeps the truncated ``G_t(0)`` a lower bound of the untruncated one.

The bounded vector ``h(x) = F_d(x) + b`` built from the random-walk
hitting probabilities is annihilated by the full-lattice ``Q`` when the
offset ``b`` is chosen from the hitting probability of a neighbour; its
range ratio ``(1 + b)/b`` then bounds the second moment uniformly in
time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .walk import HittingTable

__all__ = [
    "ValidityError",
    "TruncatedQ",
    "HarmonicH",
    "mean_xi_closed_form",
    "box_size",
    "box_index",
    "box_coords",
    "shell_distances",
    "build_q",
    "q_norm_bound",
    "expm_apply",
    "integrate_second_moment",
    "build_h",
    "check_harmonic",
    "second_moment_bound",
]


class ValidityError(ValueError):
    """The offset construction's hypothesis fails at the requested (d, lam)."""


def mean_xi_closed_form(lam: float, r: int, t: float) -> float:
    """Mean of the counting process per site on an r-regular graph."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return math.exp(t * (lam * r - 1.0))


# ---------------------------------------------------------------------------
# box indexing: coordinates in [-R, R]^d, mixed radix with axis 0 least
# significant, so the origin sits at index (size - 1) // 2.


def box_size(d: int, R: int) -> int:
    return (2 * R + 1) ** d


def box_index(coords, R: int) -> int:
    idx = 0
    for c in reversed(coords):
        if abs(c) > R:
            raise ValueError(f"coordinate {coords} outside box")
        idx = idx * (2 * R + 1) + (c + R)
    return idx


def box_coords(idx: int, d: int, R: int) -> tuple[int, ...]:
    side = 2 * R + 1
    out = []
    for _ in range(d):
        out.append(idx % side - R)
        idx //= side
    return tuple(out)


def shell_distances(d: int, R: int) -> np.ndarray:
    """Sup-norm of every box point, shape (box_size,)."""
    side = 2 * R + 1
    idx = np.arange(side**d)
    dist = np.zeros(side**d, dtype=np.int64)
    for axis in range(d):
        c = (idx // side**axis) % side - R
        np.maximum(dist, np.abs(c), out=dist)
    return dist


@dataclass
class TruncatedQ:
    """Two-point correlation generator on a truncated box.

    ``matrix`` is CSR over box indices; ``exact_rows`` (small boxes
    only) holds the same entries as exact rationals for bit-true row-sum
    checks.  Boundary handling is absorbing: couplings pointing outside
    the box are dropped.
    """

    d: int
    lam: float
    radius: int
    matrix: sp.csr_matrix
    exact_rows: dict | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def origin(self) -> int:
        return box_index((0,) * self.d, self.radius)


def _origin_pair_targets(d: int):
    """Counts of ordered unit-vector pairs (y, z), z != -y, by target y+z."""
    units = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        units.append(tuple(e))
        units.append(tuple(-v for v in e))
    counts: dict[tuple, int] = {}
    for y in units:
        for z in units:
            tgt = tuple(a + b for a, b in zip(y, z))
            if all(v == 0 for v in tgt):
                continue
            counts[tgt] = counts.get(tgt, 0) + 1
    return counts


def build_q(d: int, lam: float, R: int, exact: bool = False) -> TruncatedQ:
    """Assemble the truncated correlation generator.

    Rows x != 0 carry ``-4 lam d`` on the diagonal and ``2 lam`` on each
    in-box neighbour.  Row 0 carries ``1 - 2 lam d`` on the diagonal,
    ``2 lam`` on neighbours of the origin and ``lam`` times the ordered
    pair count on every distance-2 target (1 for doubled steps, 2 for
    mixed-axis ones), which is why ``R >= 2`` is required.
    """
    if d < 1 or lam <= 0:
        raise ValueError("need d >= 1 and lam > 0")
    if R < 2:
        raise ValueError("R must be >= 2 (row 0 reaches distance-2 targets)")
    side = 2 * R + 1
    size = side**d
    if size > 400_000:
        raise ValueError("box beyond the resource guard")
    origin = box_index((0,) * d, R)
    idx = np.arange(size, dtype=np.int64)

    rows = [idx]
    cols = [idx]
    diag = np.full(size, -4.0 * lam * d)
    diag[origin] = 1.0 - 2.0 * lam * d
    vals = [diag]
    for axis in range(d):
        c = (idx // side**axis) % side - R
        for sgn in (1, -1):
            ok = np.abs(c + sgn) <= R
            rows.append(idx[ok])
            cols.append(idx[ok] + sgn * side**axis)
            vals.append(np.full(ok.sum(), 2.0 * lam))
    pair_targets = _origin_pair_targets(d)
    for tgt, count in pair_targets.items():
        rows.append(np.array([origin]))
        cols.append(np.array([box_index(tgt, R)]))
        vals.append(np.array([lam * count]))
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsr()

    exact_rows = None
    if exact:
        if size > 20_000:
            raise ValueError("exact entries only for small boxes")
        lamf = Fraction(lam)
        exact_rows = {}
        coo = matrix.tocoo()
        for r, c, v in zip(coo.row, coo.col, coo.data):
            r, c = int(r), int(c)
            if r == origin:
                if c == origin:
                    fv = 1 - 2 * lamf * d
                else:
                    tgt = box_coords(c, d, R)
                    if sum(abs(t) for t in tgt) == 1:
                        fv = 2 * lamf
                    else:
                        fv = lamf * pair_targets[tgt]
            elif c == r:
                fv = -4 * lamf * d
            else:
                fv = 2 * lamf
            exact_rows.setdefault(r, {})[c] = fv
    return TruncatedQ(d, lam, R, matrix, exact_rows)


def q_norm_bound(Q: TruncatedQ) -> float:
    """Closed-form sup-norm bound ``1 + 8 lam d + 4 lam d**2``."""
    return 1.0 + 8.0 * Q.lam * Q.d + 4.0 * Q.lam * Q.d**2


def expm_apply(Q: TruncatedQ | sp.spmatrix, v: np.ndarray, t: float, rtol: float = 1e-13) -> np.ndarray:
    """Action ``exp(tQ) v`` by substepped truncated Taylor series.

    The horizon is split so each substep has ``||Q||_inf * dt <= 1/2``;
    within a substep terms are accumulated until two consecutive terms
    fall below ``rtol`` relative to the running result.  Target accuracy
    is well past the 1e-10 contract.
    """
    A = Q.matrix if isinstance(Q, TruncatedQ) else Q
    if t < 0:
        raise ValueError("t must be >= 0")
    w = np.asarray(v, dtype=np.float64).copy()
    if t == 0 or not w.any():
        return w
    norm = float(np.abs(A).sum(axis=1).max())
    n_sub = max(1, int(math.ceil(norm * t / 0.5)))
    tau = t / n_sub
    for _ in range(n_sub):
        term = w.copy()
        acc = w.copy()
        small = 0
        for k in range(1, 120):
            term = A.dot(term) * (tau / k)
            acc += term
            if np.max(np.abs(term)) <= rtol * max(np.max(np.abs(acc)), 1e-300):
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
        w = acc
    return w


@dataclass
class SecondMomentResult:
    times: list
    g0: list
    leakage: list


def integrate_second_moment(d: int, lam: float, R: int, times) -> SecondMomentResult:
    """Evolve the correlation system from the all-ones start.

    Returns the origin value ``G_t(0)`` at each requested time together
    with a truncation indicator: the weight that ``exp(tQ)`` row 0
    assigns to the outer two shells of the box, i.e. the part of
    ``G_t(0)`` already in contact with the absorbing boundary.
    """
    ts = sorted(times)
    if ts and ts[0] < 0:
        raise ValueError("times must be >= 0")
    Q = build_q(d, lam, R)
    outer = shell_distances(d, R) >= R - 1
    e0 = np.zeros(Q.size)
    e0[Q.origin] = 1.0
    QT = Q.matrix.T.tocsr()
    g = np.ones(Q.size)
    row0 = e0.copy()
    g0 = []
    leak = []
    prev = 0.0
    for t in ts:
        g = expm_apply(Q, g, t - prev)
        row0 = expm_apply(QT, row0, t - prev)
        prev = t
        g0.append(float(g[Q.origin]))
        leak.append(float(row0[outer].sum()))
    return SecondMomentResult(ts, g0, leak)


@dataclass
class HarmonicH:
    """Bounded positive vector annihilated by the full-lattice generator."""

    d: int
    lam: float
    radius: int
    b: float
    values: np.ndarray  # F_d(x) + b over the box


def offset_threshold(d: int, f_e1: float) -> float:
    """Smallest rate for which the positive offset exists: 1/(4d(1-(d+1)F))."""
    margin = 1.0 - (d + 1) * f_e1
    if margin <= 0:
        raise ValidityError(
            f"hypothesis fails at d={d}: (d+1) F_d(e1) = {(d + 1) * f_e1:.4f} >= 1"
        )
    return 1.0 / (4.0 * d * margin)


def build_h(d: int, lam: float, hitting: HittingTable, R: int) -> HarmonicH:
    """Assemble ``h = F_d + b`` on the box, with the offset

    ``b = (4 d lam [1 - (d+1) F_d(e1)] - 1) / (1 + 4 d**2 lam)``,

    requiring ``lam`` strictly above :func:`offset_threshold` so that
    ``b > 0``.
    """
    if hitting.d != d or hitting.radius < R:
        raise ValueError("hitting table does not cover the requested box")
    e1 = (1,) + (0,) * (d - 1)
    f1 = hitting.lookup(e1)
    thr = offset_threshold(d, f1)
    if lam <= thr:
        raise ValidityError(
            f"lam = {lam} at or below the offset threshold {thr:.6f} for d = {d}"
        )
    b = (4.0 * d * lam * (1.0 - (d + 1) * f1) - 1.0) / (1.0 + 4.0 * d * d * lam)
    side = 2 * R + 1
    values = np.empty(side**d)
    for i in range(side**d):
        values[i] = hitting.lookup(box_coords(i, d, R)) + b
    return HarmonicH(d, lam, R, b, values)


@dataclass
class HarmonicReport:
    max_residual: float
    n_interior: int
    row0_identity_residual: float


def check_harmonic(Q: TruncatedQ, h: HarmonicH, interior_radius: int) -> HarmonicReport:
    """Max of ``|(Q h)(x)|`` over the interior of the box.

    Rows within ``interior_radius`` see no truncation (their couplings
    stay inside the box), so the residual there measures only the
    hitting-table accuracy.  Also reports the closed-form origin-row
    identity ``(1 + 4 lam d^2) b + 1 - 4 lam d [1 - (d+1) F(e1)]``,
    which is zero by construction of the offset.
    """
    if interior_radius > Q.radius - 2:
        raise ValueError("interior radius must be <= R - 2")
    if h.radius != Q.radius or h.d != Q.d:
        raise ValueError("h and Q cover different boxes")
    resid = Q.matrix.dot(h.values)
    mask = shell_distances(Q.d, Q.radius) <= interior_radius
    e1 = (1,) + (0,) * (Q.d - 1)
    f1 = h.values[box_index(e1, Q.radius)] - h.b
    row0 = (1.0 + 4.0 * Q.lam * Q.d**2) * h.b + 1.0 - 4.0 * Q.lam * Q.d * (
        1.0 - (Q.d + 1) * f1
    )
    return HarmonicReport(float(np.abs(resid[mask]).max()), int(mask.sum()), float(row0))


def second_moment_bound(h: HarmonicH) -> float:
    """Uniform-in-time second-moment bound ``(1 + b)/b`` from the range of h."""
    if h.b <= 0:
        raise ValidityError("offset must be positive")
    return (1.0 + h.b) / h.b
