"""Command-line pipeline: run / reaction / scan.

Emits one JSON record per run (deterministic field order; byte-identical
re-runs modulo wall_time) and CSV tables for scans.

Exit codes: 0 success, 2 configuration error, 3 numerical
non-convergence, 4 capacity cap exceeded, 5 no valid samples.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import rng, __version__
from .activespace import DEFAULT_ETA
from .baselines import HCIOptions, ext_hci, hci_variational
from .errors import (CapacityError, ConfigError, ConvergenceError,
                     EmptyValidSampleError)
from .fcidump import read_fcidump
from .sampler import (NoiseModel, apply_readout_noise, lucj_params_from_ccsd,
                      lucj_state, read_counts, sample_counts,
                      state_from_ci_vector)
from .solver import fci_ground_state
from .sqd import ExtensionThresholds, RecoveryConfig, ext_sqd, sqd_ground_state
from .units import hartree_to_ev

METHODS = ("fci", "hci", "ext-hci", "sqd", "ext-sqd")
SAMPLERS = ("lucj", "ci-vector", "counts-file")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CAPACITY = 4
EXIT_EMPTY_VALID = 5


@dataclass
class RunConfig:
    """Pipeline parameters; defaults follow the reference protocol."""

    hamiltonian_path: str = ""
    method: str = "sqd"
    sampler: str = "ci-vector"
    shots: int = 6_000_000
    iterations: int = 10
    batches: int = 16
    samples_per_batch: int = 1000
    discard_below: float = 1e-2
    doubles_above: float = 1e-1
    eta: float = DEFAULT_ETA
    flip_probability: float = 0.0
    seed: int = 0
    epsilon1: float = 1e-4
    closure: bool = True
    lucj_layers: int = 1
    amplitudes_path: str = ""
    counts_path: str = ""
    output_path: str = ""

    def validate(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        if not self.hamiltonian_path:
            raise ConfigError("a Hamiltonian file is required")
        if not os.path.exists(self.hamiltonian_path):
            raise ConfigError(f"no such file: {self.hamiltonian_path}")
        if self.shots <= 0:
            raise ConfigError("shots must be positive")
        if self.method in ("sqd", "ext-sqd"):
            if self.sampler == "counts-file":
                if not self.counts_path:
                    raise ConfigError("sampler=counts-file needs --counts")
                if not os.path.exists(self.counts_path):
                    raise ConfigError(f"no such file: {self.counts_path}")
            if self.sampler == "lucj" and not self.amplitudes_path:
                raise ConfigError("sampler=lucj needs --amplitudes (npz with t2, optional t1)")


def _acquire_counts(config: RunConfig, ham):
    if config.sampler == "counts-file":
        counts = read_counts(config.counts_path)
    else:
        if config.sampler == "ci-vector":
            reference = fci_ground_state(ham)
            state = state_from_ci_vector(reference.vector, ham.n_orb,
                                         ham.n_alpha, ham.n_beta)
        else:
            data = np.load(config.amplitudes_path)
            if "t2" not in data:
                raise ConfigError("amplitudes file must contain 't2'")
            t1 = data["t1"] if "t1" in data else None
            params = lucj_params_from_ccsd(t1, data["t2"], config.lucj_layers)
            state = lucj_state(params, ham.n_orb, ham.n_alpha, ham.n_beta)
        counts = sample_counts(state, config.shots,
                               seed=int(rng.stream(config.seed, "shots")
                                        .integers(2**63)))
    if config.flip_probability > 0:
        noise = NoiseModel(config.flip_probability,
                           seed=int(rng.stream(config.seed, "noise")
                                    .integers(2**63)))
        counts = apply_readout_noise(counts, noise)
    return counts


def execute_run(config: RunConfig) -> dict:
    """Run the configured pipeline and return the result record."""
    config.validate()
    started = time.perf_counter()
    ham = read_fcidump(config.hamiltonian_path)
    thresholds = ExtensionThresholds(discard_below=config.discard_below,
                                     doubles_above=config.doubles_above)
    record = {
        "tool": "sqdci",
        "version": __version__,
        "method": config.method,
        "config": asdict(config),
    }

    if config.method == "fci":
        result = fci_ground_state(ham)
        record.update(energy=result.energy, dimension=result.dimension,
                      iterations=1, energy_history=[result.energy])
    elif config.method in ("hci", "ext-hci"):
        hci = hci_variational(ham, HCIOptions(epsilon1=config.epsilon1))
        record.update(energy=hci.energy, dimension=hci.dimension,
                      iterations=hci.diagnostics.get("hci_sweeps", 0),
                      energy_history=[hci.energy])
        if config.method == "ext-hci":
            extended = ext_hci(ham, hci, thresholds)
            record.update(energy=extended.energy,
                          dimension_extended=extended.dimension,
                          energy_history=[hci.energy, extended.energy])
    else:
        counts = _acquire_counts(config, ham)
        recovery = RecoveryConfig(iterations=config.iterations,
                                  batches=config.batches,
                                  samples_per_batch=config.samples_per_batch,
                                  seed=config.seed, closure=config.closure)
        sqd = sqd_ground_state(ham, counts, recovery)
        record.update(energy=sqd.energy, dimension=sqd.dimension,
                      dimension_raw=sqd.raw_dimension,
                      iterations=config.iterations,
                      energy_history=list(sqd.energy_history))
        if config.method == "ext-sqd":
            extended = ext_sqd(ham, sqd, thresholds, batches=config.batches)
            record.update(energy=extended.energy,
                          dimension_extended=extended.dimension)
            record["energy_history"] = list(sqd.energy_history) + [extended.energy]

    record["energy_ev"] = hartree_to_ev(record["energy"])
    record["wall_time"] = time.perf_counter() - started
    return record


def _dump_record(record: dict, path: str | None):
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def reaction_report(product_record: dict, reactant_record: dict,
                    allow_mismatch: bool = False) -> dict:
    """Energy difference between product and reactant records.

    Negative values are exothermic.
    """
    for record in (product_record, reactant_record):
        if "energy" not in record or "method" not in record:
            raise ConfigError("record lacks 'energy' or 'method' field")
    if product_record["method"] != reactant_record["method"]:
        if not allow_mismatch:
            raise ConfigError(
                "records use different methods "
                f"({product_record['method']} vs {reactant_record['method']}); "
                "pass --allow-method-mismatch to override")
        print("warning: comparing energies across methods", file=sys.stderr)
    delta = product_record["energy"] - reactant_record["energy"]
    return {
        "delta_e_hartree": delta,
        "delta_e_ev": hartree_to_ev(delta),
        "product": {"method": product_record["method"],
                    "energy": product_record["energy"]},
        "reactant": {"method": reactant_record["method"],
                     "energy": reactant_record["energy"]},
    }


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read record {path}: {exc}") from exc


def scan_table(config: RunConfig, template: str, sizes: list[int],
               methods: list[str]) -> list[dict]:
    """Run each (size, method) pair over a family of FCIDUMP files."""
    if "{size}" not in template:
        raise ConfigError("scan template must contain '{size}'")
    rows = []
    for size in sorted(sizes):
        path = template.format(size=size)
        if not os.path.exists(path):
            raise ConfigError(f"missing scan member: {path}")
        for method in methods:
            member = RunConfig(**{**asdict(config),
                                  "hamiltonian_path": path,
                                  "method": method})
            record = execute_run(member)
            rows.append({"size": size, "method": method,
                         "energy": record["energy"],
                         "dimension": record.get("dimension", ""),
                         "dimension_extended": record.get("dimension_extended", "")})
    return rows


def _write_csv(rows, path: str | None):
    import csv
    fieldnames = ["size", "method", "energy", "dimension", "dimension_extended"]
    fh = open(path, "w", newline="", encoding="utf-8") if path else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if path:
            fh.close()


def _read_config_file(path) -> dict:
    """key = value lines, field names as in RunConfig."""
    values = {}
    valid = set(RunConfig.__dataclass_fields__)
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"malformed config line: {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in valid:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = value.strip()
    return values


def _coerce(field_name: str, value):
    kind = RunConfig.__dataclass_fields__[field_name].type
    if isinstance(value, str):
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            if value.lower() in ("1", "true", "on", "yes"):
                return True
            if value.lower() in ("0", "false", "off", "no"):
                return False
            raise ConfigError(f"bad boolean for {field_name}: {value!r}")
    return value


def _build_run_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(_read_config_file(args.config))
    overrides = {
        "hamiltonian_path": args.hamiltonian,
        "method": args.method,
        "sampler": args.sampler,
        "shots": args.shots,
        "iterations": args.iterations,
        "batches": args.batches,
        "samples_per_batch": args.samples_per_batch,
        "discard_below": args.discard_below,
        "doubles_above": args.doubles_above,
        "eta": args.eta,
        "flip_probability": args.flip_prob,
        "seed": args.seed,
        "epsilon1": args.epsilon1,
        "closure": args.closure,
        "lucj_layers": args.lucj_layers,
        "amplitudes_path": args.amplitudes,
        "counts_path": args.counts,
        "output_path": args.out,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    config = RunConfig()
    for key, value in values.items():
        setattr(config, key, _coerce(key, value))
    return config


def _add_run_arguments(parser):
    parser.add_argument("--hamiltonian", help="FCIDUMP file")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--method", choices=METHODS)
    parser.add_argument("--sampler", choices=SAMPLERS)
    parser.add_argument("--shots", type=int)
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--batches", type=int)
    parser.add_argument("--samples-per-batch", type=int, dest="samples_per_batch")
    parser.add_argument("--discard-below", type=float, dest="discard_below")
    parser.add_argument("--doubles-above", type=float, dest="doubles_above")
    parser.add_argument("--eta", type=float)
    parser.add_argument("--flip-prob", type=float, dest="flip_prob")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--epsilon1", type=float)
    parser.add_argument("--closure", type=int, choices=(0, 1))
    parser.add_argument("--lucj-layers", type=int, dest="lucj_layers")
    parser.add_argument("--amplitudes", help="npz with t2 (and optional t1)")
    parser.add_argument("--counts", help="counts file (sampler=counts-file)")
    parser.add_argument("--out", help="output path (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sqdci",
        description="Sampled-subspace and selected-CI ground-state pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one method on one Hamiltonian")
    _add_run_arguments(run)

    reaction = sub.add_parser("reaction", help="energy difference of two records")
    reaction.add_argument("--product", required=True)
    reaction.add_argument("--reactant", required=True)
    reaction.add_argument("--allow-method-mismatch", action="store_true")
    reaction.add_argument("--out")

    scan = sub.add_parser("scan", help="run methods over a sized FCIDUMP family")
    _add_run_arguments(scan)
    scan.add_argument("--template", required=True,
                      help="path template containing '{size}'")
    scan.add_argument("--sizes", required=True,
                      help="comma-separated active-space sizes")
    scan.add_argument("--methods", required=True,
                      help="comma-separated methods")
    return parser


def main(argv=None) -> int:
    # Thread count is controlled by SQDCI_THREADS only (propagated to the
    # numerical backends); all other environment is ignored.
    threads = os.environ.get("SQDCI_THREADS")
    if threads:
        os.environ.setdefault("OMP_NUM_THREADS", threads)

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            record = execute_run(_build_run_config(args))
            _dump_record(record, args.out)
        elif args.command == "reaction":
            report = reaction_report(_load_json(args.product),
                                     _load_json(args.reactant),
                                     allow_mismatch=args.allow_method_mismatch)
            _dump_record(report, args.out)
        elif args.command == "scan":
            config = _build_run_config(args)
            sizes = [int(s) for s in args.sizes.split(",") if s]
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
            for method in methods:
                if method not in METHODS:
                    raise ConfigError(f"unknown method {method!r}")
            rows = scan_table(config, args.template, sizes, methods)
            _write_csv(rows, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except EmptyValidSampleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_VALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
