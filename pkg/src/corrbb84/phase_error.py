"""Phase-error estimation via the basis-coin argument.

The security statement needs an upper bound on the error rate a
complementary-basis measurement would have produced on the single-photon key
rounds. That bound is assembled from:

* ``g_interval`` -- the algebraic envelope [G-, G+] of rates compatible with
  given coin statistics,
* ``trash_minus_upper`` -- a concentration bound on the number of coin-minus
  outcomes among single-photon trash rounds,
* ``phase_error_rate_bound`` -- the composition with the decoy-state bounds
  and martingale deviations, and
* ``total_pe_failure`` -- the failure-probability bookkeeping.

``coin_inequality_check`` evaluates the underlying count-level inequality on
simulator ground truth (true photon numbers are never observable in real
operation); it exists for validation only.

Degenerate statistics never raise: any undefined or out-of-range envelope
argument falls back to the trivial bound e_ph = 1, with the responsible guard
named in the audit record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from .concentration import azuma_delta
from .decoy import DecoyBounds

if TYPE_CHECKING:
    from .simulator import GroundTruth


@dataclass(frozen=True)
class PhaseErrorBound:
    """Phase-error-rate bound plus the intermediates needed for audit."""

    e_ph_upper: float
    trash_minus_upper: float
    delta_A: float
    eps_PE: float | None = None
    audit: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class CoinCheckResult:
    """Outcome of the count-level coin inequality on ground-truth tallies."""

    holds: bool
    margin: float
    lhs: float
    rhs: float
    trivial_branch: bool


def g_interval(y: float, z: float) -> tuple[float, float]:
    """Envelope [G-, G+] of rates y' compatible with
    sqrt(y' y) + sqrt((1-y')(1-y)) >= z.

    G+ = g+(y, z) when y < z^2 and 1 otherwise; G- = g-(y, z) when
    y > 1 - z^2 and 0 otherwise, with
    g+-(y, z) = y + (1-z^2)(1-2y) +- 2 sqrt(z^2 (1-z^2) y (1-y)).
    ``z`` is clamped into [0, 1] first; z <= 0 carries no coin information
    and yields the trivial interval [0, 1].
    """
    if not (0.0 <= y <= 1.0):
        raise ValueError(f"y must lie in [0, 1], got {y}")
    z = min(max(z, 0.0), 1.0)
    z_sq = z * z
    root = 2.0 * math.sqrt(max(0.0, z_sq * (1.0 - z_sq) * y * (1.0 - y)))
    base = y + (1.0 - z_sq) * (1.0 - 2.0 * y)
    g_plus = base + root if y < z_sq else 1.0
    g_minus = base - root if y > 1.0 - z_sq else 0.0
    return (min(max(g_minus, 0.0), 1.0), min(max(g_plus, 0.0), 1.0))


def trash_minus_upper(
    N: int,
    p1: float,
    p_keep: float,
    l_c: int,
    coin_param: float,
    eps_C: float,
) -> float:
    """Upper bound on the number of single-photon trash-sifted coin-minus
    outcomes, holding except with probability (l_c + 1) * eps_C.

    Mean term N p1 (1-p_keep)/2 * coin_param, plus the aggregated one-sided
    Bernoulli-sum deviation over l_c + 1 interleaved groups of independent
    rounds: sqrt(N p1 (l_c+1) (1-p_keep) coin_param ln(1/eps_C))
    + (2 (l_c+1)/3) ln(1/eps_C).
    """
    if not (0.0 < eps_C < 1.0):
        raise ValueError(f"eps_C must lie strictly in (0, 1), got {eps_C}")
    if l_c < 0:
        raise ValueError(f"l_c must be nonnegative, got {l_c}")
    if not (0.0 <= coin_param <= 0.5):
        raise ValueError(f"coin parameter must lie in [0, 1/2], got {coin_param}")
    log_term = math.log(1.0 / eps_C)
    mean = N * p1 * (1.0 - p_keep) / 2.0 * coin_param
    deviation = math.sqrt(N * p1 * (l_c + 1) * (1.0 - p_keep) * coin_param * log_term)
    residual = 2.0 * (l_c + 1) / 3.0 * log_term
    return mean + deviation + residual


def total_pe_failure(
    eps_A: float, eps_B: float, eps_C: float, l_c: int, d: float
) -> float:
    """Total parameter-estimation failure probability
    5 eps_A + (l_c + 1) eps_C + 10 eps_B + d; rejected when >= 1."""
    if l_c < 0:
        raise ValueError(f"l_c must be nonnegative, got {l_c}")
    total = 5.0 * eps_A + (l_c + 1) * eps_C + 10.0 * eps_B + d
    if total >= 1.0:
        raise ValueError(
            f"parameter-estimation failure budget {total} >= 1; nothing can be certified"
        )
    return total


def phase_error_rate_bound(
    decoy: DecoyBounds,
    trash_upper: float,
    n_sifted_det: int,
    p_keep: float,
    eps_A: float,
) -> PhaseErrorBound:
    """Data-driven upper bound on the single-photon phase-error rate.

    With Delta_A the martingale deviation for n_sifted_det rounds,
    y = (x_err_upper + Delta_A) / (x_det_lower - Delta_A) and
    z = 1 - 2 p_keep (trash_upper + Delta_A)
            / ((1 - p_keep)(z_det_upper + x_det_lower)),
    the bound is ((z_det_upper + Delta_A) G+(y, z) + Delta_A) / z_det_lower,
    capped at 1. Out-of-range intermediates yield the trivial bound 1, with
    the guard that fired recorded in the audit.
    """
    delta_A = azuma_delta(n_sifted_det, eps_A)
    audit: dict = {
        "delta_A": delta_A,
        "n_sifted_det": n_sifted_det,
        "eps_A": eps_A,
        "trash_minus_upper": trash_upper,
        "trivial_bound_reason": None,
    }

    def trivial(reason: str) -> PhaseErrorBound:
        audit["trivial_bound_reason"] = reason
        return PhaseErrorBound(
            e_ph_upper=1.0, trash_minus_upper=trash_upper, delta_A=delta_A, audit=audit
        )

    if decoy.z_det_lower <= 0.0:
        return trivial("z_det_lower_nonpositive")
    if decoy.x_det_lower <= delta_A:
        return trivial("x_det_lower_not_above_delta_A")
    y = (decoy.x_err_upper + delta_A) / (decoy.x_det_lower - delta_A)
    audit["y"] = y
    if not (0.0 <= y <= 1.0):
        return trivial("y_out_of_range")
    denom = (1.0 - p_keep) * (decoy.z_det_upper + decoy.x_det_lower)
    if denom <= 0.0:
        return trivial("coin_denominator_nonpositive")
    z = 1.0 - 2.0 * p_keep * (trash_upper + delta_A) / denom
    audit["z"] = z
    g_plus = g_interval(y, z)[1]
    audit["g_plus"] = g_plus
    e_ph = ((decoy.z_det_upper + delta_A) * g_plus + delta_A) / decoy.z_det_lower
    return PhaseErrorBound(
        e_ph_upper=min(1.0, e_ph),
        trash_minus_upper=trash_upper,
        delta_A=delta_A,
        audit=audit,
    )


def coin_inequality_check(
    ground_truth: "GroundTruth",
    n_sifted_det: int,
    p_keep: float,
    eps_A: float,
) -> CoinCheckResult:
    """Evaluate the count-level coin inequality on true single-photon tallies.

    Checks whether the number of key-basis single-photon errors is at most
    (n_z_det + Delta_A) G+((n_x_err + Delta_A)/(n_x_det - Delta_A),
    1 - 2 p_keep (n_minus + Delta_A)/((1-p_keep)(n_z_det + n_x_det)))
    + Delta_A. Requires simulator ground truth; degenerate envelope arguments
    fall back to the deterministic bound (errors <= detections).
    """
    n_z_err = ground_truth.z_err_single()
    n_z_det = ground_truth.z_det_single()
    n_x_err = ground_truth.x_err_single()
    n_x_det = ground_truth.x_det_single()
    n_minus = ground_truth.trash_minus_single
    delta_A = azuma_delta(n_sifted_det, eps_A)

    trivial = False
    if n_x_det <= delta_A or n_z_det + n_x_det == 0:
        trivial = True
    else:
        y = (n_x_err + delta_A) / (n_x_det - delta_A)
        if not (0.0 <= y <= 1.0):
            trivial = True
    if trivial:
        rhs = float(n_z_det)
    else:
        z = 1.0 - 2.0 * p_keep * (n_minus + delta_A) / (
            (1.0 - p_keep) * (n_z_det + n_x_det)
        )
        rhs = (n_z_det + delta_A) * g_interval(y, z)[1] + delta_A
    margin = rhs - n_z_err
    return CoinCheckResult(
        holds=margin >= 0.0,
        margin=margin,
        lhs=float(n_z_err),
        rhs=rhs,
        trivial_branch=trivial,
    )
