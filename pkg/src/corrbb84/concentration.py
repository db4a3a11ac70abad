"""Concentration-inequality layer.

Three primitives back all statistical estimates:

* ``bernstein_upper_delta`` -- one-sided upward deviation for sums of
  independent Bernoulli variables with known mean,
  Delta+(x, eps) = sqrt(2 x ln(1/eps)) + (2/3) ln(1/eps).
* ``azuma_delta`` -- martingale deviation sqrt(2 n ln(1/eps)) for bounded
  increments over n steps.
* ``binomial_bound_pair`` -- two-sided confidence bounds on the mean of a
  sum of independent Bernoulli variables given an observed count, obtained
  by inverting the Chernoff bound exp(-n D(k/n || p)) in the Bernoulli
  relative entropy D. Bisection to absolute tolerance 1e-12 in the rate.

All logarithms are natural. Pure functions, safe under concurrency.
"""

from __future__ import annotations

import math
from functools import lru_cache

BISECTION_TOL = 1e-12


def _check_epsilon(epsilon: float) -> None:
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie strictly in (0, 1), got {epsilon}")


def bernstein_upper_delta(mean: float, epsilon: float) -> float:
    """Upward deviation allowance for a Bernoulli sum with expectation ``mean``.

    Exceeding ``mean + bernstein_upper_delta(mean, epsilon)`` has probability
    at most ``epsilon``. Monotone increasing in ``mean``, decreasing in
    ``epsilon``.
    """
    _check_epsilon(epsilon)
    if mean < 0:
        raise ValueError(f"mean must be nonnegative, got {mean}")
    log_term = math.log(1.0 / epsilon)
    return math.sqrt(2.0 * mean * log_term) + (2.0 / 3.0) * log_term


def azuma_delta(n: int, epsilon: float) -> float:
    """Martingale deviation sqrt(2 n ln(1/epsilon)) for n bounded increments."""
    _check_epsilon(epsilon)
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    return math.sqrt(2.0 * n * math.log(1.0 / epsilon))


def bernoulli_kl(p: float, q: float) -> float:
    """Relative entropy D(p || q) between Bernoulli(p) and Bernoulli(q), nats.

    Uses the 0*log(0) = 0 convention; infinite when q puts no mass where p does.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError(f"arguments must be probabilities, got p={p}, q={q}")
    kl = 0.0
    if p > 0.0:
        if q == 0.0:
            return math.inf
        kl += p * math.log(p / q)
    if p < 1.0:
        if q == 1.0:
            return math.inf
        kl += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return kl


def _solve_kl(p_hat: float, target: float, lo: float, hi: float) -> float:
    """Root of D(p_hat || x) = target for x in [lo, hi], monotone side."""
    # D(p_hat || .) is monotone on either side of p_hat, so plain bisection
    # converges; 100 halvings take the bracket far below BISECTION_TOL.
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if bernoulli_kl(p_hat, mid) >= target:
            # outer side: move toward p_hat
            if mid < p_hat:
                lo = mid
            else:
                hi = mid
        else:
            if mid < p_hat:
                hi = mid
            else:
                lo = mid
        if hi - lo <= BISECTION_TOL:
            break
    return 0.5 * (lo + hi)


@lru_cache(maxsize=1 << 17)
def binomial_bound_pair(epsilon: float, observed: int, total: int) -> tuple[float, float]:
    """Two-sided bounds on the expectation of a Bernoulli sum.

    For ``observed`` successes out of ``total`` independent (not necessarily
    identical) Bernoulli trials, returns counts ``(lower, upper)`` such that
    the true expectation of the sum lies outside either bound with
    probability at most ``epsilon`` per side. ``lower <= observed <= upper``,
    and both ends are nondecreasing in ``observed``.
    """
    _check_epsilon(epsilon)
    if observed < 0 or total < 0 or observed > total:
        raise ValueError(f"need 0 <= observed <= total, got {observed}/{total}")
    if total == 0:
        # no trials: the sum is identically zero
        return (0.0, 0.0)
    p_hat = observed / total
    target = math.log(1.0 / epsilon) / total
    if observed == 0:
        lower = 0.0
    else:
        lower = total * _solve_kl(p_hat, target, 0.0, p_hat)
    if observed == total:
        upper = float(total)
    else:
        upper = total * _solve_kl(p_hat, target, p_hat, 1.0)
    # bisection may land an ulp past the observation; keep the contract exact
    lower = min(lower, float(observed))
    upper = max(upper, float(observed))
    return (lower, upper)


def identity_bound_pair(epsilon: float, observed: int, total: int) -> tuple[float, float]:
    """Degenerate bound pair (observed, observed); used to evaluate the decoy
    formulas on exact expectations in analytic cross-checks."""
    if observed < 0 or observed > total:
        raise ValueError(f"need 0 <= observed <= total, got {observed}/{total}")
    return (float(observed), float(observed))
