"""Command-line front end.

Subcommands: seal, unseal, cheat, verify, and experiment. Global flags
(--seed, --config, --out, --format) sit before the subcommand. A key-value
config file can supply any experiment or seal parameter; explicit flags win.

Exit codes: 0 on success, 2 when an exact computation violates a guaranteed
inequality (which would indicate a broken build), 1 for ordinary errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import oaep as oaep_mod
from . import protocols
from .adversary import basis_cheat, generic_cheat, predicate_cheat, random_strategy_sweep
from .harness import (
    ConfigInvalid,
    ExperimentConfig,
    InvariantViolation,
    emit_report,
    rows_to_csv,
    rows_to_json,
    run_bound_sweep,
    run_multipicture_scaling,
    run_oaep_negligibility,
)
from .states import Ensemble, state_from_dict


def load_config(path: str | Path) -> dict:
    """Parse a key = value config file; values may be ints, floats, or lists."""
    data: dict = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"malformed config line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        data[key] = _parse_value(value)
    return data


def _parse_value(text: str):
    if "," in text:
        return [_parse_value(part.strip()) for part in text.split(",")]
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def _write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="ascii", newline="")
    else:
        sys.stdout.write(text)


def _dump_json(payload, out: str | None) -> None:
    _write_output(json.dumps(payload, indent=2) + "\n", out)


def _load_instance(path: str) -> protocols.SealedInstance:
    return protocols.instance_from_dict(json.loads(Path(path).read_text()))


def _merged_params(args, keys: list[str]) -> dict:
    config = load_config(args.config) if args.config else {}
    merged = {k: v for k, v in config.items() if k in keys}
    for key in keys:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            merged[key] = value
    return merged


def cmd_seal(args) -> int:
    params = _merged_params(
        args, ["protocol", "message", "garbage", "pictures", "y", "k0", "n", "key"]
    )
    protocol = params.get("protocol")
    if protocol == protocols.NAIVE:
        inst = protocols.seal_naive(
            str(params.get("message", "M")), str(params.get("garbage", "0"))
        )
    elif protocol == protocols.GARBAGE:
        garbage = params.get("garbage", ["junk0"])
        if isinstance(garbage, str):
            garbage = [g for g in garbage.split(",") if g]
        inst = protocols.seal_garbage(str(params.get("message", "M")), [str(g) for g in garbage])
    elif protocol == protocols.MULTIPICTURE:
        pictures = params.get("pictures")
        if pictures is None:
            raise ConfigInvalid("multipicture seal needs --pictures")
        if isinstance(pictures, str):
            pictures = [p for p in pictures.split(",") if p]
        inst = protocols.seal_multipicture([str(p) for p in pictures])
    elif protocol == protocols.OAEP:
        key = params.get("key")
        master = bytes.fromhex(key) if key else oaep_mod.REFERENCE_MASTER_KEY
        ctx = oaep_mod.OaepContext.create(
            k0=int(params.get("k0", 8)), n=int(params.get("n", 16)), master_key=master
        )
        inst = oaep_mod.seal_oaep(int(params.get("y", 0)), ctx)
    else:
        raise ConfigInvalid(f"unknown or missing protocol {protocol!r}")
    _dump_json(protocols.instance_to_dict(inst), args.out)
    return 0


def cmd_unseal(args) -> int:
    inst = _load_instance(args.instance)
    message, success = protocols.honest_unseal(inst, args.seed)
    _dump_json({"message": message, "success": success}, args.out)
    return 0


def cmd_cheat(args) -> int:
    inst = _load_instance(args.instance)
    if args.attack == "generic":
        reports = [("generic", generic_cheat(inst))]
    elif args.attack == "basis":
        reports = [("basis", basis_cheat(inst))]
    elif args.attack == "predicate":
        true_labels = set((args.predicate_true or "").split(","))
        g = {label: int(label in true_labels) for label in inst.reference.c_labels()}
        reports = [("predicate", predicate_cheat(inst, g))]
    elif args.attack == "random":
        reports = [
            (f"random-{i}", report)
            for i, report in enumerate(
                random_strategy_sweep(inst, args.trials, args.seed)
            )
        ]
    else:
        raise ConfigInvalid(f"unknown attack {args.attack!r}")
    payload = [dict(attack=name, **report.to_dict()) for name, report in reports]
    _dump_json(payload if len(payload) > 1 else payload[0], args.out)
    return 0


def _load_returned(path: str) -> Ensemble:
    data = json.loads(Path(path).read_text())
    if "amps" in data:
        return Ensemble.pure(state_from_dict(data))
    members = tuple(
        (float(m["weight"]), state_from_dict(m["state"])) for m in data["members"]
    )
    return Ensemble(members)


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    returned = _load_returned(args.returned)
    believe, accept = protocols.verify_return(inst, returned, args.seed)
    _dump_json({"believe": believe, "accept_probability": accept}, args.out)
    return 0


def cmd_experiment(args) -> int:
    overrides = load_config(args.config) if args.config else {}
    overrides["experiment"] = args.which
    overrides.setdefault("seed", args.seed)
    if args.trials is not None:
        overrides["trials"] = args.trials
    cfg = ExperimentConfig.from_mapping(overrides)
    if args.which == "bound-sweep":
        rows = run_bound_sweep(cfg)
    elif args.which == "multi-scaling":
        rows = run_multipicture_scaling(cfg.picture_counts, cfg.seed)
    else:
        rows = run_oaep_negligibility(cfg.oaep_k0, cfg.rset_sizes, n=cfg.oaep_n)
    if args.out:
        emit_report(rows, args.format, args.out)
    else:
        text = rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows)
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qseal",
        description="Simulate sealed-message protocols and verify their detection bounds.",
    )
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--out", help="output path (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    seal = sub.add_parser("seal", help="construct a sealed instance")
    seal.add_argument("--protocol", choices=("naive", "garbage", "multipicture", "oaep"))
    seal.add_argument("--message")
    seal.add_argument("--garbage", help="garbage label, or comma list for the garbage protocol")
    seal.add_argument("--pictures", help="comma-separated picture identifiers")
    seal.add_argument("--y", type=int, help="message value for the oaep protocol")
    seal.add_argument("--k0", type=int)
    seal.add_argument("--n", type=int)
    seal.add_argument("--key", help="hex master key for the oaep protocol")
    seal.set_defaults(func=cmd_seal)

    unseal = sub.add_parser("unseal", help="run the honest unseal once")
    unseal.add_argument("--instance", required=True)
    unseal.set_defaults(func=cmd_unseal)

    cheat = sub.add_parser("cheat", help="run a cheating strategy and report it")
    cheat.add_argument("--instance", required=True)
    cheat.add_argument(
        "--attack", choices=("generic", "basis", "predicate", "random"), default="generic"
    )
    cheat.add_argument("--predicate-true", help="comma-separated labels with predicate value 1")
    cheat.add_argument("--trials", type=int, default=1)
    cheat.set_defaults(func=cmd_cheat)

    verify = sub.add_parser("verify", help="verify a returned state against an instance")
    verify.add_argument("--instance", required=True)
    verify.add_argument("--returned", required=True, help="state or ensemble JSON file")
    verify.set_defaults(func=cmd_verify)

    experiment = sub.add_parser("experiment", help="run a reproducible experiment")
    experiment.add_argument(
        "which", choices=("bound-sweep", "multi-scaling", "oaep-negligibility")
    )
    experiment.add_argument("--trials", type=int)
    experiment.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
