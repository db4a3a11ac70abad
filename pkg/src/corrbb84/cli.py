"""Command-line front end.

Subcommands: ``keyrate`` (counts file or simulation -> key-rate JSON),
``simulate`` (-> counts + ground-truth CSV), ``scan`` (-> rate-vs-distance
CSV), ``optimize`` (-> best-parameters JSON), ``validate`` (-> oracle-suite
pass/fail report).

Configs are JSON with explicit fields for every protocol, channel and
correlation parameter; the security epsilons carry no defaults and must be
spelled out. Every output embeds a RunManifest (tool version, config hash,
seeds, bound-algorithm id, timestamp); for fixed (config, seed, version) the
numeric sections are byte-identical across runs -- only the manifest
timestamp varies.

Exit codes: 0 success (including zero-key results, which set a flag in the
output), 1 oracle-suite failure, 2 configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .correlations import CorrelationModel, required_truncation_length
from .decoy import CountTriple
from .keyrate import ObservedCounts, evaluate_pipeline
from .model import (
    ConfigError,
    EpsilonBudget,
    IntensitySet,
    ProtocolConfig,
    mean_intensity,
    validate_config,
)
from .optimizer import OptimizationSpec, optimize_params, scan_distance
from .simulator import ChannelModel, expected_counts, sample_counts, validate_channel
from .validation import run_validation

BOUND_ALGORITHM = "kl-bisection"
RNG_ALGORITHM = "numpy-pcg64"
MANIFEST_PREFIX = "# corrbb84-manifest: "

COUNT_CATEGORIES = ("det", "err")
BASES = ("Z", "X")
INTENSITIES = ("s", "w", "v")


@dataclass(frozen=True)
class RunManifest:
    version: str
    config_hash: str
    seed: int | None
    bound_algorithm: str
    rng_algorithm: str
    timestamp: str
    threads: int | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def make_manifest(config_text: str, seed: int | None) -> RunManifest:
    threads_env = os.environ.get("CORRBB84_THREADS")
    return RunManifest(
        version=__version__,
        config_hash=hashlib.sha256(config_text.encode()).hexdigest(),
        seed=seed,
        bound_algorithm=BOUND_ALGORITHM,
        rng_algorithm=RNG_ALGORITHM,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        threads=int(threads_env) if threads_env else None,
    )


def _jsonable(value):
    """Recursively convert numpy scalars so json.dumps round-trips exactly."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


def _fmt(value: float) -> str:
    """17-significant-digit decimal; round-trip exact for doubles."""
    return format(float(value), ".17g")


# --- config ingestion -------------------------------------------------------


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing required field {where}.{key}")
    return section[key]


def load_config(path: str) -> dict:
    try:
        with open(path) as handle:
            raw = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    data["_raw_text"] = raw
    return data


def parse_protocol(data: dict) -> ProtocolConfig:
    protocol = _require(data, "protocol", "config")
    intensities = _require(protocol, "intensities", "protocol")
    probs = _require(protocol, "intensity_probs", "protocol")
    epsilons = _require(data, "epsilons", "config")
    budget = EpsilonBudget(
        eps_A=_require(epsilons, "eps_A", "epsilons"),
        eps_B=_require(epsilons, "eps_B", "epsilons"),
        eps_C=_require(epsilons, "eps_C", "epsilons"),
        eps_PA=_require(epsilons, "eps_PA", "epsilons"),
        eps_EV=_require(epsilons, "eps_EV", "epsilons"),
        d=_require(epsilons, "d", "epsilons"),
    )
    config = ProtocolConfig(
        N=int(_require(protocol, "N", "protocol")),
        intensity_set=IntensitySet(
            s=_require(intensities, "s", "protocol.intensities"),
            w=_require(intensities, "w", "protocol.intensities"),
            v=_require(intensities, "v", "protocol.intensities"),
            p_s=_require(probs, "s", "protocol.intensity_probs"),
            p_w=_require(probs, "w", "protocol.intensity_probs"),
            p_v=_require(probs, "v", "protocol.intensity_probs"),
        ),
        p_keep=_require(protocol, "p_keep", "protocol"),
        epsilon_budget=budget,
    )
    problems = validate_config(config)
    if problems:
        raise ConfigError("; ".join(problems))
    return config


def parse_channel(data: dict) -> ChannelModel:
    section = _require(data, "channel", "config")
    channel = ChannelModel(
        distance_km=_require(section, "distance_km", "channel"),
        attenuation_db_per_km=section.get("attenuation_db_per_km", 0.2),
        detector_efficiency=section.get("detector_efficiency", 0.25),
        dark_count_prob=section.get("dark_count_prob", 1e-7),
        misalignment=section.get("misalignment", 0.01),
        f_EC=section.get("f_EC", 1.16),
    )
    problems = validate_channel(channel)
    if problems:
        raise ConfigError("; ".join(problems))
    return channel


def parse_correlations(data: dict, config: ProtocolConfig) -> CorrelationModel | None:
    section = data.get("correlations")
    if section is None:
        return None
    d = config.epsilon_budget.d
    model = CorrelationModel(
        delta_1=_require(section, "delta_1", "correlations"),
        decay_C=_require(section, "decay_C", "correlations"),
        truncation_d=d,
        l_c_eff=int(section.get("l_c_eff", 0)),
    )
    if model.delta_1 > 0 and d > 0 and "l_c_eff" not in section:
        needed = required_truncation_length(
            config.N, mean_intensity(config.intensity_set), model
        )
        model = dataclasses.replace(model, l_c_eff=needed)
    return model


# --- counts CSV -------------------------------------------------------------


def write_counts_csv(path: str, observed: ObservedCounts, manifest: RunManifest) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(MANIFEST_PREFIX + json.dumps(manifest.to_dict(), sort_keys=True) + "\n")
        writer = csv.writer(handle)
        writer.writerow(["category", "basis", "intensity", "count"])
        triples = {
            ("det", "Z"): observed.z_det,
            ("err", "Z"): observed.z_err,
            ("det", "X"): observed.x_det,
            ("err", "X"): observed.x_err,
        }
        for category in COUNT_CATEGORIES:
            for basis in BASES:
                triple = triples[(category, basis)]
                for label, value in zip(INTENSITIES, (triple.m_s, triple.m_w, triple.m_v)):
                    writer.writerow([category, basis, label, value])
        writer.writerow(["sifted_total", "", "", observed.n_sifted_det])


def read_counts_csv(path: str) -> ObservedCounts:
    cells: dict[tuple[str, str, str], int] = {}
    sifted_total = None
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read counts file {path}: {exc}") from exc
    with handle:
        rows = csv.reader(line for line in handle if not line.startswith("#"))
        header = next(rows, None)
        if header != ["category", "basis", "intensity", "count"]:
            raise ConfigError(f"unexpected counts CSV header in {path}: {header}")
        for row in rows:
            if not row:
                continue
            category, basis, intensity, count = row
            if category == "sifted_total":
                sifted_total = int(count)
            else:
                cells[(category, basis, intensity)] = int(count)
    if sifted_total is None:
        raise ConfigError(f"counts file {path} lacks the sifted_total row")
    try:
        def triple(category: str, basis: str) -> CountTriple:
            return CountTriple(*(cells[(category, basis, mu)] for mu in INTENSITIES))

        return ObservedCounts(
            z_det=triple("det", "Z"),
            z_err=triple("err", "Z"),
            x_det=triple("det", "X"),
            x_err=triple("err", "X"),
            n_sifted_det=sifted_total,
        )
    except KeyError as exc:
        raise ConfigError(f"counts file {path} is missing cell {exc}") from exc


def write_truth_csv(path: str, truth, manifest: RunManifest) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(MANIFEST_PREFIX + json.dumps(manifest.to_dict(), sort_keys=True) + "\n")
        writer = csv.writer(handle)
        writer.writerow(["category", "basis", "intensity", "photon_number", "count"])
        categories = {
            ("det", "Z"): truth.z_det,
            ("err", "Z"): truth.z_err,
            ("det", "X"): truth.x_det,
            ("err", "X"): truth.x_err,
        }
        for (category, basis), table in categories.items():
            for label in INTENSITIES:
                for bucket, value in sorted(table[label].items()):
                    writer.writerow([category, basis, label, bucket, value])
        writer.writerow(["trash_minus", "", "", 1, truth.trash_minus_single])


# --- subcommands ------------------------------------------------------------


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    if path:
        with open(path, "w") as handle:
            handle.write(text + "\n")
    else:
        print(text)


def cmd_keyrate(args) -> int:
    data = load_config(args.config)
    config = parse_protocol(data)
    model = parse_correlations(data, config)
    manifest = make_manifest(data["_raw_text"], args.seed)
    if args.counts:
        observed = read_counts_csv(args.counts)
    elif args.simulate:
        channel = parse_channel(data)
        if args.mode == "sampled":
            if args.seed is None:
                raise ConfigError("sampled simulation requires --seed")
            observed, _ = sample_counts(config, channel, args.seed)
        else:
            observed, _ = expected_counts(config, channel)
    else:
        raise ConfigError("keyrate needs either --counts FILE or --simulate")
    f_ec = data.get("channel", {}).get("f_EC", 1.16)
    result = evaluate_pipeline(observed, config, model, f_EC=f_ec)
    payload = {
        "manifest": manifest.to_dict(),
        "result": {
            "key_length": result.key_length,
            "eps_sec": result.eps_sec,
            "e_ph_upper": result.e_ph_upper,
            "z_det_lower": result.z_det_lower,
            "lambda_EC": result.lambda_EC,
            "zero_key": result.key_length == 0,
            "audit": result.audit,
        },
    }
    _write_json(args.out, payload)
    return 0


def cmd_simulate(args) -> int:
    data = load_config(args.config)
    config = parse_protocol(data)
    channel = parse_channel(data)
    manifest = make_manifest(data["_raw_text"], args.seed)
    if args.mode == "sampled":
        if args.seed is None:
            raise ConfigError("sampled simulation requires --seed")
        observed, truth = sample_counts(config, channel, args.seed)
    else:
        observed, truth = expected_counts(config, channel)
    write_counts_csv(args.counts_out, observed, manifest)
    if args.truth_out:
        write_truth_csv(args.truth_out, truth, manifest)
    return 0


def parse_distances(spec: str) -> list[float]:
    """Either a comma list "0,10,25" or an inclusive range "start:stop:step"."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {spec!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("distance step must be positive")
        values = []
        current = start
        while current <= stop + 1e-9:
            values.append(round(current, 9))
            current += step
        return values
    return [float(p) for p in spec.split(",") if p]


def _optimizer_spec(data: dict, config: ProtocolConfig, args) -> OptimizationSpec:
    section = data.get("optimizer", {})
    overrides = {}
    for key in (
        "eps_pe_target", "eps_PA", "eps_EV", "budget", "restarts",
        "coordinate_passes", "v",
    ):
        if key in section:
            overrides[key] = section[key]
    if args.budget is not None:
        overrides["budget"] = args.budget
    model = parse_correlations(data, config)
    if model is not None and model.delta_1 > 0 and model.truncation_d <= 0 and model.l_c_eff <= 0:
        raise ConfigError(
            "correlated optimization with d=0 needs an explicit correlations.l_c_eff"
        )
    return OptimizationSpec(N=config.N, correlation=model, **overrides)


def cmd_scan(args) -> int:
    data = load_config(args.config)
    config = parse_protocol(data)
    channel = parse_channel(data)
    spec = _optimizer_spec(data, config, args)
    manifest = make_manifest(data["_raw_text"], args.seed)
    distances = parse_distances(args.distances)
    rows = scan_distance(spec, channel, distances, seed=args.seed)
    columns = ["distance_km", "key_length", "eps_sec", "evaluations"] + sorted(
        {key for row in rows for key in row if key.startswith("param_")}
    )
    with open(args.out, "w", newline="") as handle:
        handle.write(MANIFEST_PREFIX + json.dumps(manifest.to_dict(), sort_keys=True) + "\n")
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [
                    _fmt(row[col]) if isinstance(row.get(col), float) else row.get(col, "")
                    for col in columns
                ]
            )
    return 0


def cmd_optimize(args) -> int:
    data = load_config(args.config)
    config = parse_protocol(data)
    channel = parse_channel(data)
    spec = _optimizer_spec(data, config, args)
    manifest = make_manifest(data["_raw_text"], args.seed)
    outcome = optimize_params(spec, channel, seed=args.seed)
    payload = {
        "manifest": manifest.to_dict(),
        "result": {
            "params": outcome.params,
            "key_length": outcome.key_length,
            "eps_sec": outcome.result.eps_sec if outcome.result else None,
            "evaluations": outcome.evaluations,
            "zero_key_everywhere": outcome.zero_key_everywhere,
        },
    }
    _write_json(args.out, payload)
    return 0


def cmd_validate(args) -> int:
    manifest = make_manifest(f"validate:{args.level}", args.seed)
    checks = run_validation(level=args.level, seed=args.seed)
    lines = []
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        stats = json.dumps(_jsonable(check.stats), sort_keys=True)
        lines.append(f"{status} {check.name} {stats}")
    report = "\n".join(lines)
    print(report)
    if args.out:
        payload = {
            "manifest": manifest.to_dict(),
            "checks": [
                {"name": c.name, "passed": c.passed, "stats": _jsonable(c.stats)}
                for c in checks
            ],
        }
        _write_json(args.out, payload)
    return 0 if all(check.passed for check in checks) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrbb84",
        description="Finite-key security engine for decoy-state BB84 with "
        "correlated bit-and-basis encoders",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    keyrate = sub.add_parser("keyrate", help="certified key length from counts")
    keyrate.add_argument("--config", required=True)
    keyrate.add_argument("--counts", help="observed-counts CSV")
    keyrate.add_argument("--simulate", action="store_true", help="generate counts instead")
    keyrate.add_argument("--mode", choices=["expected", "sampled"], default="expected")
    keyrate.add_argument("--seed", type=int, default=None)
    keyrate.add_argument("--out", help="result JSON path (default: stdout)")
    keyrate.set_defaults(func=cmd_keyrate)

    simulate = sub.add_parser("simulate", help="write counts and ground-truth CSVs")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--mode", choices=["expected", "sampled"], default="sampled")
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--counts-out", required=True)
    simulate.add_argument("--truth-out")
    simulate.set_defaults(func=cmd_simulate)

    scan = sub.add_parser("scan", help="optimized key length vs distance CSV")
    scan.add_argument("--config", required=True)
    scan.add_argument("--distances", required=True, help='"0:100:10" or "0,10,25"')
    scan.add_argument("--seed", type=int, default=0)
    scan.add_argument("--budget", type=int, default=None)
    scan.add_argument("--out", required=True)
    scan.set_defaults(func=cmd_scan)

    optimize = sub.add_parser("optimize", help="optimize protocol parameters")
    optimize.add_argument("--config", required=True)
    optimize.add_argument("--seed", type=int, default=0)
    optimize.add_argument("--budget", type=int, default=None)
    optimize.add_argument("--out", help="result JSON path (default: stdout)")
    optimize.set_defaults(func=cmd_optimize)

    validate = sub.add_parser("validate", help="run the oracle suites")
    validate.add_argument("--level", choices=["quick", "full"], default="quick")
    validate.add_argument("--seed", type=int, default=0)
    validate.add_argument("--out", help="report JSON path")
    validate.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
