"""Simple-random-walk return probabilities and hitting probabilities.

Everything here is about the symmetric nearest-neighbour walk on the
d-dimensional integer lattice.  The central quantities are the
even-step return probabilities ``p(2n) = P(S_2n = 0)``, the Green
function ``G_d(0,0) = 1 + sum_n p(2n)`` (finite for d >= 3), and the
hitting probability ``F_d(x)`` that a walk started at x ever reaches the
origin, with the classical identities ``F_d(e1) = (G - 1)/G`` and
``F_d(x) = G_d(x)/G_d(0,0)``.

Return probabilities factor over axes.  Writing ``p(2n) = A(n) * B_d(n)``
with ``A(n) = C(2n, n)/4**n`` and ``B_d(n)`` the collision probability of
two independent uniform allocations of n step-pairs over d axes, both
factors live in (0, 1] and the d-fold convolution of the axis weight
sequence ``w(m) = 1/(m!)**2`` can be evaluated in doubles without
scaling trouble.  An exact big-integer version of the same convolution
backs the rational mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, ive

__all__ = [
    "DivergenceError",
    "ReturnSeries",
    "GreenResult",
    "HittingE1",
    "HittingTable",
    "TailBounds",
    "p_return_exact",
    "return_probabilities",
    "return_series",
    "green_function",
    "hitting_prob_e1",
    "hitting_table",
    "first_return_probabilities",
    "mc_return_oracle",
    "tail_certificates",
]


class DivergenceError(ValueError):
    """Raised when a Green-function series diverges (recurrent walk, d <= 2)."""


# upper rational bound on e, used to turn irrational bound checks into
# exact rational comparisons (replacing e by E_HI only shrinks 1/(2e)^k)
_E_HI = Fraction(27182818284590453, 10**16)

_EXACT_GUARD = 80_000  # refuse exact mode beyond n * d of this size


# ---------------------------------------------------------------------------
# return probabilities


def _walk_pair_counts(d: int, n_max: int) -> list[int]:
    """Exact W_d(n) = sum over axis allocations of multinomial(n; m)**2.

    Computed by the convolution W_j(s) = sum_m C(s, m)**2 W_{j-1}(s - m)
    in Python integers; ``p(2n) = C(2n, n) * W_d(n) / (2d)**(2n)``.
    Returns ``[W_d(0), ..., W_d(n_max)]``.
    """
    comb2 = [[math.comb(s, m) ** 2 for m in range(s + 1)] for s in range(n_max + 1)]
    W = [1] * (n_max + 1)
    for _ in range(1, d):
        prev = W
        W = [
            sum(comb2[s][m] * prev[s - m] for m in range(s + 1))
            for s in range(n_max + 1)
        ]
    return W


def p_return_exact(d: int, n: int) -> Fraction:
    """Exact rational return probability ``P(S_2n = 0)`` on the d-lattice."""
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    if n * d > _EXACT_GUARD:
        raise ValueError("n * d beyond the exact-arithmetic resource guard")
    W = _walk_pair_counts(d, n)
    return Fraction(math.comb(2 * n, n) * W[n], (2 * d) ** (2 * n))


def _central_binomial_over_4n(n_max: int) -> np.ndarray:
    """A(n) = C(2n, n)/4**n for n = 0..n_max via a stable product recurrence."""
    A = np.empty(n_max + 1)
    A[0] = 1.0
    for n in range(1, n_max + 1):
        A[n] = A[n - 1] * (2 * n - 1) / (2 * n)
    return A


def _allocation_collision(d: int, n_max: int) -> np.ndarray:
    """B_d(n): collision probability of two uniform d-axis allocations of n items.

    B_1 = 1; B_j(k) = sum_m binom_pmf(m; k, 1/j)**2 * B_{j-1}(k - m).
    All values lie in (0, 1].
    """
    lg = gammaln(np.arange(n_max + 2, dtype=np.float64))
    B = np.ones(n_max + 1)
    for j in range(2, d + 1):
        prev = B
        B = np.empty(n_max + 1)
        B[0] = 1.0
        lp, lq = math.log(1.0 / j), math.log(1.0 - 1.0 / j)
        for k in range(1, n_max + 1):
            m = np.arange(k + 1)
            logpmf = lg[k + 1] - lg[m + 1] - lg[k - m + 1] + m * lp + (k - m) * lq
            pmf = np.exp(logpmf)
            B[k] = float(np.dot(pmf * pmf, prev[k::-1]))
    return B


def return_probabilities(d: int, n_max: int) -> np.ndarray:
    """Float array of ``p(2n)`` for n = 1..n_max (index 0 is n = 1)."""
    if d < 1 or n_max < 1:
        raise ValueError("need d >= 1 and n_max >= 1")
    A = _central_binomial_over_4n(n_max)
    B = _allocation_collision(d, n_max)
    return (A * B)[1:]


@dataclass
class ReturnSeries:
    """Return-probability series with truncation and tail bookkeeping."""

    d: int
    terms: np.ndarray  # p(2n), n = 1..truncation_N
    truncation_N: int
    tail_estimate: float
    tail_mode: str


def _power_sum_tail(s: float, N: int) -> float:
    """sum_{n > N} n**(-s) via integral plus Euler-Maclaurin correction."""
    return N ** (1.0 - s) / (s - 1.0) - 0.5 * N ** (-s) + s / 12.0 * N ** (-s - 1.0)


def _tail_sup_mk(d: int) -> float:
    """Numeric value of the k >= 3 block bound: sum_k 2*sqrt(2)*d*M_{k-1}**d."""
    total = 0.0
    k = 3
    while True:
        mk = _m_ratio(k - 1) ** d
        term = 2.0 * math.sqrt(2.0) * d * mk
        total += term
        if term < 1e-300 or k > 10_000:
            break
        k += 1
    return total


def _m_ratio(k: int) -> float:
    """M_k = (k+1)**k / (e**k * k!)."""
    return math.exp(k * math.log(k + 1) - k - math.lgamma(k + 1))


def return_series(d: int, n_max: int, tail_mode: str = "local_clt") -> ReturnSeries:
    """Series terms plus a tail estimate for ``sum_{n > n_max} p(2n)``.

    ``local_clt`` fits the coefficient of the large-n law
    ``p(2n) ~ c * n**(-d/2)`` to the last computed terms and integrates
    it past the truncation; the reported estimate is meant to be trusted
    only within a factor of two.  ``block_bounds`` uses the closed-form
    block bounds (valid upper bound for ``n_max >= 2d``; effective only
    in high dimension).
    """
    terms = return_probabilities(d, n_max)
    if tail_mode == "local_clt":
        if d <= 2:
            tail = math.inf
        else:
            s = d / 2.0
            k = max(10, n_max // 10)
            ns = np.arange(n_max - k + 1, n_max + 1, dtype=np.float64)
            c = float(np.mean(terms[-k:] * ns**s))
            tail = c * _power_sum_tail(s, n_max)
    elif tail_mode == "block_bounds":
        if n_max < 2 * d:
            raise ValueError("block_bounds tail requires n_max >= 2d")
        tail = _tail_sup_mk(d)
    else:
        raise ValueError(f"unknown tail mode {tail_mode!r}")
    return ReturnSeries(d, terms, n_max, tail, tail_mode)


@dataclass
class GreenResult:
    value: float
    uncertainty: float
    series: ReturnSeries


_DEFAULT_TERMS = {3: 10_000, 4: 4_000}


def green_function(
    d: int, truncation_N: int | None = None, tail_mode: str = "local_clt"
) -> GreenResult:
    """Green function ``G_d(0,0) = 1 + sum p(2n)`` for a transient walk.

    Raises :class:`DivergenceError` for d <= 2.  The value includes the
    tail estimate; the uncertainty equals the tail estimate itself
    (safety factor two on the tail).
    """
    if d <= 2:
        raise DivergenceError(f"return series diverges for d = {d} (recurrent walk)")
    N = truncation_N or _DEFAULT_TERMS.get(d, 2_000)
    series = return_series(d, N, tail_mode)
    partial = math.fsum(series.terms.tolist())
    if tail_mode == "block_bounds":
        # the block machinery gives an upper bound, not an estimate
        value = 1.0 + partial + 0.5 * series.tail_estimate
        uncert = 0.5 * series.tail_estimate
    else:
        value = 1.0 + partial + series.tail_estimate
        uncert = series.tail_estimate
    return GreenResult(value, uncert, series)


@dataclass
class HittingE1:
    """Hitting probability of the origin from a lattice neighbour."""

    value: float
    uncertainty: float
    recurrent: bool


def hitting_prob_e1(
    d: int, truncation_N: int | None = None, tail_mode: str = "local_clt"
) -> HittingE1:
    """``F_d(e1) = (G - 1)/G``; returns 1.0 flagged recurrent for d <= 2."""
    if d <= 2:
        return HittingE1(1.0, 0.0, True)
    g = green_function(d, truncation_N, tail_mode)
    value = (g.value - 1.0) / g.value
    return HittingE1(value, g.uncertainty / g.value**2, False)


def first_return_probabilities(p: np.ndarray, n_max: int | None = None) -> np.ndarray:
    """First-return probabilities ``f(2n)`` from return probabilities.

    Uses the renewal recursion ``p(2n) = sum_{k<=n} f(2k) p(2n-2k)``
    (with p(0) = 1).  ``p`` is indexed by n starting at 1, as produced by
    :func:`return_probabilities`.
    """
    N = n_max or len(p)
    f = np.zeros(N)
    for n in range(1, N + 1):
        acc = p[n - 1]
        if n > 1:
            acc -= float(np.dot(f[: n - 1], p[n - 2 :: -1][: n - 1]))
        f[n - 1] = acc
    return f


# ---------------------------------------------------------------------------
# hitting table over a box


@dataclass
class HittingTable:
    """``F_d(x)`` over the sup-norm box of a given radius.

    Values are stored per symmetry class (coordinates sorted by absolute
    value), since F is invariant under coordinate permutations and sign
    flips.
    """

    d: int
    radius: int
    green_origin: float
    classes: dict
    tail_uncertainty: float

    def lookup(self, x) -> float:
        key = tuple(sorted(abs(int(c)) for c in x))
        if len(key) != self.d or key[-1] > self.radius:
            raise KeyError(f"point {x} outside table")
        return self.classes[key]


def _one_axis_pmf(a: int, n_max: int) -> np.ndarray:
    """P(1d walk at step s equals a) for s = 0..n_max (zero off parity)."""
    s = np.arange(n_max + 1, dtype=np.float64)
    out = np.zeros(n_max + 1)
    ok = (np.arange(n_max + 1) >= a) & ((np.arange(n_max + 1) - a) % 2 == 0)
    sv = s[ok]
    kv = (sv + a) / 2.0
    out[ok] = np.exp(gammaln(sv + 1) - gammaln(kv + 1) - gammaln(sv - kv + 1) - sv * math.log(2.0))
    return out


def hitting_table(d: int, radius: int, n_terms: int | None = None) -> HittingTable:
    """Hitting probabilities on the box ``max_i |x_i| <= radius``.

    ``G_d(x) = sum_s P(S_s = x)`` is evaluated by allocating the s steps
    over the d axes (binomial splitting, one axis at a time) with the
    one-axis displacement law ``C(s, (s+a)/2) / 2**s``, then
    ``F_d(x) = G_d(x) / G_d(0, 0)``.  A power-law tail with an
    empirically fitted coefficient accounts for s beyond the truncation.
    """
    if d < 3:
        raise DivergenceError("hitting tables need a transient walk (d >= 3)")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    K = n_terms or {3: 6_000, 4: 3_000}.get(d, 2_000)
    n_classes = math.comb(radius + d, d)
    if n_classes * K > 5e7:
        raise ValueError("hitting table beyond the resource guard")

    lg = gammaln(np.arange(K + 2, dtype=np.float64))
    axis_pmf = {a: _one_axis_pmf(a, K) for a in range(radius + 1)}

    # binomial allocation weights pmf(m; s, 1/j), built once per axis count
    def binom_rows(j: int):
        rows = []
        lp, lq = math.log(1.0 / j), math.log(1.0 - 1.0 / j)
        for s in range(K + 1):
            m = np.arange(s + 1)
            rows.append(np.exp(lg[s + 1] - lg[m + 1] - lg[s - m + 1] + m * lp + (s - m) * lq))
        return rows

    rows_by_j = {j: binom_rows(j) for j in range(2, d + 1)}

    memo: dict[tuple, np.ndarray] = {}

    def alloc(prefix: tuple) -> np.ndarray:
        """P(axes 1..j hit prefix displacements | s steps on those axes)."""
        if prefix in memo:
            return memo[prefix]
        j = len(prefix)
        if j == 1:
            out = axis_pmf[prefix[0]]
        else:
            sub = alloc(prefix[:-1])
            pa = axis_pmf[prefix[-1]]
            rows = rows_by_j[j]
            out = np.empty(K + 1)
            out[0] = pa[0] * sub[0]
            for s in range(1, K + 1):
                w = rows[s] * pa[: s + 1]
                out[s] = float(np.dot(w, sub[s::-1]))
        memo[prefix] = out
        return out

    def series_total(term: np.ndarray) -> tuple[float, float]:
        total = math.fsum(term.tolist())
        nz = np.flatnonzero(term[K // 2 :] > 0) + K // 2
        nz = nz[-20:]
        s_half = d / 2.0
        c = float(np.mean(term[nz] * nz.astype(float) ** s_half)) if len(nz) else 0.0
        tail = 0.5 * c * _power_sum_tail(s_half, K)
        return total + tail, tail

    classes = {}
    tail_unc = 0.0
    for key in _sorted_classes(d, radius):
        g, tail = series_total(alloc(key))
        classes[key] = g
        tail_unc = max(tail_unc, tail)
    g0 = classes[(0,) * d]
    table = {k: (1.0 if all(c == 0 for c in k) else v / g0) for k, v in classes.items()}
    return HittingTable(d, radius, g0, table, tail_unc / g0)


def _sorted_classes(d: int, radius: int):
    """Nondecreasing d-tuples with entries in 0..radius."""
    out = []

    def rec(prefix, lo):
        if len(prefix) == d:
            out.append(tuple(prefix))
            return
        for v in range(lo, radius + 1):
            rec(prefix + [v], v)

    rec([], 0)
    return out


def _green_bessel(d: int, x, rtol: float = 1e-10) -> float:
    """Independent quadrature route to ``G_d(x)`` (Poissonized walk).

    The continuous-time unit-rate walk factorizes over axes, giving
    ``G_d(x) = integral_0^inf prod_i ive(|x_i|, t/d) dt``.  Used as a
    cross-check oracle for the allocation series.
    """
    from scipy.integrate import quad

    a = [abs(int(c)) for c in x]

    def f(t):
        out = 1.0
        for ai in a:
            out *= ive(ai, t / d)
        return out

    val, err = quad(f, 0.0, np.inf, epsabs=1e-12, epsrel=rtol, limit=400)
    return float(val)


# ---------------------------------------------------------------------------
# Monte Carlo oracle


def mc_return_oracle(d: int, trials: int, horizon_steps: int, seed: int) -> dict:
    """Fraction of walks from e1 that hit the origin within a step budget.

    A finite horizon can only miss late returns, so the estimate is a
    lower bound for ``F_d(e1)``; the matching truncated expectation is
    ``sum_{2n <= horizon} f(2n)`` from :func:`first_return_probabilities`.
    Returns a dict with ``estimate``, ``se``, ``hits`` and ``trials``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed)))
    pos = np.zeros((trials, d), dtype=np.int16)
    pos[:, 0] = 1
    hits = 0
    active = pos
    for _ in range(horizon_steps):
        m = len(active)
        if m == 0:
            break
        r = rng.random(m) * (2 * d)
        k = r.astype(np.int64)
        axis = k >> 1
        step = ((k & 1) << 1) - 1
        active[np.arange(m), axis] += step.astype(np.int16)
        at_zero = ~active.any(axis=1)
        nh = int(at_zero.sum())
        if nh:
            hits += nh
            active = active[~at_zero]
    est = hits / trials
    se = math.sqrt(max(est * (1.0 - est), 1e-300) / trials)
    return {"estimate": est, "se": se, "hits": hits, "trials": trials}


# ---------------------------------------------------------------------------
# closed-form tail certificates


@dataclass
class TailBounds:
    """Closed-form quantities controlling the high-dimension series tail."""

    d: int
    L_values: dict  # n -> (2n-1)!! / (2d)**n
    L_dip_at_ceil_d: bool
    beta_values: dict  # n -> n! / (sqrt(2 pi n) (n/e)**n)
    M_values: dict  # k -> (k+1)**k / (e**k k!)
    M2_is_sup: bool
    H1_exact: Fraction
    H1_bound_holds: bool
    H2_exact: Fraction
    H2_bound_holds: bool


def _double_factorial_ratio(n: int, d: int) -> Fraction:
    """L(n, d) = (2n - 1)!! / (2d)**n exactly."""
    num = 1
    for i in range(1, 2 * n, 2):
        num *= i
    return Fraction(num, (2 * d) ** n)


def tail_certificates(d: int) -> TailBounds:
    """Evaluate the block-bound machinery for the series tail at dimension d.

    ``H1 = sum_{n=2..d} p(2n)`` and ``H2 = sum_{n=d+1..2d} p(2n)`` are
    computed as exact rationals; the comparisons against
    ``3/(2 d**2) + 2d/(2e)**floor(d/2)`` and ``2d (2/e)**(2d)`` replace e
    by a rational upper bound so that a True verdict is rigorous.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    n_probe = min(2 * d + 2, max(d + 2, 12))
    L_values = {n: _double_factorial_ratio(n, d) for n in range(2, n_probe)}
    # L decreases while n < ceil(d) and increases afterwards
    ratios_ok = True
    for n in range(3, n_probe):
        growing = L_values[n] > L_values[n - 1]
        if (n < math.ceil(d) and growing) or (n > math.ceil(d) and not growing):
            ratios_ok = False
    beta_values = {
        n: math.exp(math.lgamma(n + 1) - 0.5 * math.log(2 * math.pi * n) - n * (math.log(n) - 1))
        for n in (1, 2, 5, 10, 20, 40)
    }
    M_values = {k: _m_ratio(k) for k in range(1, 21)}
    M2_is_sup = all(M_values[2] >= M_values[k] for k in range(2, 21))

    W = _walk_pair_counts(d, 2 * d)
    p_exact = {
        n: Fraction(math.comb(2 * n, n) * W[n], (2 * d) ** (2 * n))
        for n in range(2, 2 * d + 1)
    }
    H1 = sum((p_exact[n] for n in range(2, d + 1)), Fraction(0))
    H2 = sum((p_exact[n] for n in range(d + 1, 2 * d + 1)), Fraction(0))
    k_half = d // 2
    h1_rhs_lower = Fraction(3, 2 * d * d) + Fraction(2 * d, 1) / ((2 * _E_HI) ** k_half)
    h2_rhs_lower = Fraction(2 * d, 1) * (Fraction(2, 1) / _E_HI) ** (2 * d)
    return TailBounds(
        d=d,
        L_values=L_values,
        L_dip_at_ceil_d=ratios_ok,
        beta_values=beta_values,
        M_values=M_values,
        M2_is_sup=M2_is_sup,
        H1_exact=H1,
        H1_bound_holds=H1 <= h1_rhs_lower,
        H2_exact=H2,
        H2_bound_holds=H2 <= h2_rhs_lower,
    )
