"""Final key length, security parameter, and the end-to-end pipeline.

``evaluate_pipeline`` chains decoy estimation -> coin-parameter bound ->
trash-round concentration -> phase-error bound -> error-correction leakage ->
key length -> security parameter, and returns every intermediate in an audit
record so a certified key length can be traced term by term.

The variable-length key formula is
l = max(0, n_1_lower (1 - h(e_ph)) - lambda_EC - 2 log2(1/(2 eps_PA))
        - log2(2/eps_EV))
with h the binary entropy clamped to 1 above 1/2; the produced key is
eps_sec-secure with eps_sec = 2 sqrt(eps_PE) + eps_PA + eps_EV, where eps_PE
is the total parameter-estimation failure probability. All logarithms here
are base 2 (key lengths in bits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import correlations as corr
from .decoy import CountTriple, apply_decoy_bounds
from .model import ConfigError, ProtocolConfig, mean_intensity, require_valid, single_photon_prob
from .phase_error import phase_error_rate_bound, total_pe_failure, trash_minus_upper

DEFAULT_F_EC = 1.16


@dataclass(frozen=True)
class ObservedCounts:
    """The announced data of one run: per-intensity detected/error counts of
    keep-sifted rounds by basis, plus the total detected sifted count
    (keep and trash)."""

    z_det: CountTriple
    z_err: CountTriple
    x_det: CountTriple
    x_err: CountTriple
    n_sifted_det: int

    def validate(self) -> list[str]:
        problems = []
        for err, det, label in (
            (self.z_err, self.z_det, "Z"),
            (self.x_err, self.x_det, "X"),
        ):
            for mu in ("m_s", "m_w", "m_v"):
                if getattr(err, mu) > getattr(det, mu):
                    problems.append(f"{label}-basis errors exceed detections at {mu}")
        if self.z_det.total + self.x_det.total > self.n_sifted_det:
            problems.append("keep-sifted detections exceed total sifted detections")
        if self.n_sifted_det < 0:
            problems.append("n_sifted_det must be nonnegative")
        return problems


@dataclass(frozen=True)
class KeyRateResult:
    """Certified key length with its security parameter and audit trail."""

    key_length: int
    eps_sec: float
    e_ph_upper: float
    z_det_lower: float
    lambda_EC: float
    audit: dict = field(default_factory=dict, compare=False)


def binary_entropy(x: float) -> float:
    """Binary entropy in bits for x <= 1/2; exactly 1 above 1/2."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"entropy argument must lie in [0, 1], got {x}")
    if x > 0.5:
        return 1.0
    if x == 0.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def ec_leakage(z_det_total: int, z_err_total: int, f_EC: float = DEFAULT_F_EC) -> float:
    """Bits disclosed by one-way error correction, modeled as
    f_EC * n * h(QBER); zero for an empty or error-free key."""
    if f_EC < 1.0:
        raise ValueError(f"error-correction inefficiency must be >= 1, got {f_EC}")
    if z_err_total > z_det_total:
        raise ValueError("error count exceeds detection count")
    if z_det_total == 0:
        return 0.0
    return f_EC * z_det_total * binary_entropy(z_err_total / z_det_total)


def key_length(
    n_K1_lower: float,
    e_ph_upper: float,
    lambda_EC: float,
    eps_PA: float,
    eps_EV: float,
) -> int:
    """Certified key length in bits (floor of the max(0, .) expression)."""
    for name, value in (("eps_PA", eps_PA), ("eps_EV", eps_EV)):
        if not (0.0 < value < 1.0):
            raise ValueError(f"{name} must lie strictly in (0, 1), got {value}")
    raw = (
        n_K1_lower * (1.0 - binary_entropy(e_ph_upper))
        - lambda_EC
        - 2.0 * math.log2(1.0 / (2.0 * eps_PA))
        - math.log2(2.0 / eps_EV)
    )
    return int(math.floor(max(0.0, raw)))


def security_parameter(eps_PE: float, eps_PA: float, eps_EV: float) -> float:
    """Overall security parameter 2 sqrt(eps_PE) + eps_PA + eps_EV."""
    if not (0.0 <= eps_PE < 1.0):
        raise ValueError(f"eps_PE must lie in [0, 1), got {eps_PE}")
    return 2.0 * math.sqrt(eps_PE) + eps_PA + eps_EV


def evaluate_pipeline(
    observed: ObservedCounts,
    config: ProtocolConfig,
    correlation_model: corr.CorrelationModel | None = None,
    f_EC: float = DEFAULT_F_EC,
) -> KeyRateResult:
    """Full evaluation: observed counts + configuration -> certified key.

    ``correlation_model=None`` bypasses the correlation stage entirely
    (uncorrelated source: l_c = 0, d = 0, zero coin parameter); a model with
    delta_1 = 0 must produce the identical result. Degenerate statistics
    yield key_length 0 with the reason in the audit, never an exception;
    invalid configurations raise :class:`~corrbb84.model.ConfigError`.
    """
    require_valid(config)
    problems = observed.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    budget = config.epsilon_budget
    iset = config.intensity_set

    if correlation_model is None:
        if budget.d != 0.0:
            raise ConfigError(
                f"truncation budget d={budget.d} without a correlation model"
            )
        l_c, d_used, coin_param = 0, 0.0, 0.0
    else:
        if budget.d != correlation_model.truncation_d:
            raise ConfigError(
                f"epsilon budget carries d={budget.d} but the correlation model "
                f"carries truncation_d={correlation_model.truncation_d}"
            )
        l_c = correlation_model.l_c_eff
        d_used = correlation_model.truncation_d
        if correlation_model.delta_1 > 0.0 and d_used > 0.0:
            needed = corr.required_truncation_length(
                config.N, mean_intensity(iset), correlation_model
            )
            if l_c < needed:
                raise ConfigError(
                    f"l_c_eff={l_c} below the required truncation length {needed} "
                    f"for d={d_used}"
                )
        if correlation_model.delta_1 > 0.0 and d_used <= 0.0 and l_c <= 0:
            raise ConfigError(
                "correlated source with d=0 needs an explicit positive l_c_eff"
            )
        coin_param = corr.coin_parameter_bound(l_c, iset, correlation_model)

    eps_PE = total_pe_failure(budget.eps_A, budget.eps_B, budget.eps_C, l_c, d_used)

    decoy_bounds = apply_decoy_bounds(observed, config)
    p1 = single_photon_prob(iset)
    trash_upper = trash_minus_upper(
        config.N, p1, config.p_keep, l_c, coin_param, budget.eps_C
    )
    phase = phase_error_rate_bound(
        decoy_bounds, trash_upper, observed.n_sifted_det, config.p_keep, budget.eps_A
    )
    phase = replace(phase, eps_PE=eps_PE)

    lambda_EC = ec_leakage(observed.z_det.total, observed.z_err.total, f_EC)
    n_K1_lower = decoy_bounds.z_det_lower
    length = key_length(
        n_K1_lower, phase.e_ph_upper, lambda_EC, budget.eps_PA, budget.eps_EV
    )
    if phase.e_ph_upper >= 1.0 or n_K1_lower <= 0.0:
        length = 0
    eps_sec = security_parameter(eps_PE, budget.eps_PA, budget.eps_EV)

    audit = {
        "decoy": decoy_bounds.audit,
        "decoy_bounds": {
            "z_det_lower": decoy_bounds.z_det_lower,
            "z_det_upper": decoy_bounds.z_det_upper,
            "x_det_lower": decoy_bounds.x_det_lower,
            "x_err_upper": decoy_bounds.x_err_upper,
        },
        "correlation": {
            "bypassed": correlation_model is None,
            "l_c": l_c,
            "coin_parameter": coin_param,
            "trash_minus_upper": trash_upper,
        },
        "phase_error": phase.audit,
        "e_ph_upper": phase.e_ph_upper,
        "lambda_EC": lambda_EC,
        "n_K1_lower": n_K1_lower,
        # every epsilon consumed, exactly once; shares sum to eps_PE
        "epsilon_shares": {
            "azuma_5_eps_A": 5.0 * budget.eps_A,
            "trash_lc1_eps_C": (l_c + 1) * budget.eps_C,
            "decoy_10_eps_B": 10.0 * budget.eps_B,
            "truncation_d": d_used,
        },
        "eps_PE": eps_PE,
        "meaningful": eps_sec < 1.0,
    }
    return KeyRateResult(
        key_length=length,
        eps_sec=eps_sec,
        e_ph_upper=phase.e_ph_upper,
        z_det_lower=decoy_bounds.z_det_lower,
        lambda_EC=lambda_EC,
        audit=audit,
    )
