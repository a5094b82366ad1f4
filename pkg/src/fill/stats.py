"""Small-sample statistical primitives.

Tail sums are computed in log space throughout: neighborhoods can reach a
few thousand records and naive products of binomial terms underflow long
before that.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, gammaln

from .errors import (
    DegenerateTable,
    InsufficientSample,
    InvalidArguments,
    ZeroVarianceBoth,
)

# Tables with probability within this relative slack of the observed table
# count as ties in the two-sided Fisher sum; exact float equality would make
# tie inclusion depend on rounding noise.
_FISHER_REL_TOL = 1e-7

_logfact = gammaln(np.arange(256, dtype=np.float64))


def _log_factorials(n: int) -> np.ndarray:
    """Cached lgamma table; _log_factorials(n)[m] == log(m!) for m <= n."""
    global _logfact
    if n + 1 >= _logfact.size:
        _logfact = gammaln(np.arange(2 * (n + 1), dtype=np.float64))
    return _logfact


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float


def binom_sf(k: int, n: int, p: float) -> float:
    """P(X >= k) for X ~ Binomial(n, p).

    Summed from exact log-binomial coefficients with the log-sum-exp
    pattern. P(X >= 0) is 1 by definition. The shift is taken over the
    full term range and the suffix is summed with fsum, so the result is
    exactly non-increasing in k: calls for k and k+1 round the same term
    set and correct rounding preserves their ordering.
    """
    k = int(k)
    n = int(n)
    if k < 0 or n < 0 or k > n or not (0.0 <= p <= 1.0) or not math.isfinite(p):
        raise InvalidArguments(f"binom_sf(k={k}, n={n}, p={p})")
    if k == 0:
        return 1.0
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    lf = _log_factorials(n + 1)
    j = np.arange(0, n + 1)
    log_coef = lf[n + 1] - lf[j + 1] - lf[n - j + 1]
    log_terms = log_coef + j * math.log(p) + (n - j) * math.log1p(-p)
    shift = float(log_terms.max())
    tail = math.fsum(np.exp(log_terms[k:] - shift).tolist())
    return min(1.0, math.exp(shift) * tail)


def _log_hypergeom(x, c1, c2, r1, lf):
    return (
        lf[c1 + 1] - lf[x + 1] - lf[c1 - x + 1]
        + lf[c2 + 1] - lf[r1 - x + 1] - lf[c2 - r1 + x + 1]
        - (lf[c1 + c2 + 1] - lf[r1 + 1] - lf[c1 + c2 - r1 + 1])
    )


def fisher_exact(table) -> TestResult:
    """Two-sided Fisher exact test on a 2x2 count table.

    The p-value sums every table (margins fixed) whose hypergeometric
    probability is at most the observed table's, ties included up to a
    1e-7 relative slack. The statistic is the sample odds ratio
    (a*d)/(b*c); when any cell is zero, 0.5 is added to every cell first
    (Haldane-Anscombe) so the ratio stays finite and positive.
    """
    (a, b), (c, d) = table
    cells = [a, b, c, d]
    if any(int(v) != v or v < 0 for v in cells):
        raise InvalidArguments(f"cells must be non-negative integers: {cells}")
    a, b, c, d = (int(v) for v in cells)
    if a + b == 0 or c + d == 0 or a + c == 0 or b + d == 0:
        raise DegenerateTable(f"zero margin in {[[a, b], [c, d]]}")

    # canonical orientation: simultaneous row+column swap leaves both the
    # odds ratio and the p-value invariant, so pick one representative and
    # the symmetry holds exactly in floats too
    if (d, c, b, a) < (a, b, c, d):
        a, b, c, d = d, c, b, a

    if min(a, b, c, d) == 0:
        odds = ((a + 0.5) * (d + 0.5)) / ((b + 0.5) * (c + 0.5))
    else:
        odds = (a * d) / (b * c)

    r1, c1, c2 = a + b, a + c, b + d
    n_total = a + b + c + d
    lf = _log_factorials(n_total + 1)
    lo = max(0, r1 - c2)
    hi = min(r1, c1)
    x = np.arange(lo, hi + 1)
    log_probs = _log_hypergeom(x, c1, c2, r1, lf)
    log_obs = float(_log_hypergeom(np.array([a]), c1, c2, r1, lf)[0])
    include = log_probs <= log_obs + math.log1p(_FISHER_REL_TOL)
    chosen = log_probs[include]
    peak = float(chosen.max())
    p = math.exp(peak + math.log(float(np.exp(chosen - peak).sum())))
    return TestResult(statistic=float(odds), p_value=min(1.0, p))


def welch_t(xs, ys) -> TestResult:
    """Two-tailed Welch t-test for samples with unequal variances.

    Uses the Welch-Satterthwaite degrees of freedom and the regularized
    incomplete beta function for the tail probability.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size < 2 or ys.size < 2:
        raise InsufficientSample("both samples need at least 2 values")
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise InvalidArguments("samples must be finite")
    vx = float(xs.var(ddof=1))
    vy = float(ys.var(ddof=1))
    nx, ny = xs.size, ys.size
    a = vx / nx
    b = vy / ny
    if a + b == 0.0:
        # covers both exact zero variances and a standard error that
        # underflows to zero, where the statistic is equally undefined
        raise ZeroVarianceBoth("t statistic undefined when both variances vanish")
    t = (float(xs.mean()) - float(ys.mean())) / math.sqrt(a + b)
    # Welch-Satterthwaite in ratio form, immune to under/overflow of a**2;
    # both ratios computed the same way keeps swapped samples bit-symmetric
    ra = a / (a + b)
    rb = b / (a + b)
    df = 1.0 / (ra * ra / (nx - 1) + rb * rb / (ny - 1))
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return TestResult(statistic=t, p_value=min(1.0, p))


def bh_fdr(pvals) -> list:
    """Benjamini-Hochberg step-up adjustment, returned in input order."""
    pvals = list(pvals)
    for p in pvals:
        if not (0.0 <= p <= 1.0):
            raise InvalidArguments(f"p-value out of [0, 1]: {p}")
    m = len(pvals)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: pvals[i])
    adjusted = [0.0] * m
    running = 1.0
    for rank in range(m, 0, -1):
        i = order[rank - 1]
        # at the top rank the scale factor is exactly 1: using pvals[i]
        # directly keeps adjusted >= raw, which p*m/m can round away from
        candidate = pvals[i] if rank == m else min(1.0, pvals[i] * m / rank)
        running = min(running, candidate)
        adjusted[i] = running
    return adjusted
