"""Command-line entry points: build zoo channels, run the capacity and
potential-bound suites, classification, additivity experiments, and the
equality-case checks, emitting one JSON report per subcommand.

Exit codes: 0 success, 2 invariant violation, 3 config error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .additivity import (
    activation_search,
    additivity_gap,
    chain_check,
    write_gap_records_csv,
)
from .capacities import c_e, holevo_capacity, msw_chi, p1, q1, q_a
from .channels import CptpViolation, KrausChannel
from .entanglement import ppt_check
from .linops import InvariantViolation
from .optim import OptimOptions, derive_seed
from .potential import (
    canonical_lift,
    chi_p_upper,
    channel_eof,
    is_degradable,
    is_entanglement_breaking,
    is_hadamard,
    perfection_audit,
    q_a_potential,
)
from .serialize import SCHEMA_VERSION, channel_to_json, to_jsonable
from .structure import (
    Block,
    BlockDecomposition,
    construct_block_state,
    discover_block_decomposition,
    expected_entropy_gap,
    verify_block_form,
    verify_equality_case,
)
from .zoo import parse_channel_spec, zoo


class ConfigError(ValueError):
    """Malformed RunConfig or CLI arguments."""


@dataclass
class RunConfig:
    command: str
    channels: list = field(default_factory=list)
    seed: int = 0
    restarts: int = None
    tol: float = 1e-3
    max_dim: int = 16
    out: str = "report.json"

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known - {"blocks"}
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "command" not in obj:
            raise ConfigError("config is missing the 'command' field")
        kwargs = {k: v for k, v in obj.items() if k in known}
        return cls(**kwargs)


def _opts(config: RunConfig, op_name: str, index: int = 0, default_restarts: int = 6) -> OptimOptions:
    restarts = config.restarts if config.restarts is not None else default_restarts
    return OptimOptions(
        restarts=restarts,
        seed=derive_seed(config.seed, op_name, index),
    )


def _channels(config: RunConfig):
    if not config.channels:
        raise ConfigError("at least one --channel spec is required")
    out = []
    for spec in config.channels:
        try:
            out.append(zoo(spec))
        except CptpViolation:
            # a malformed channel payload (e.g. custom Kraus file) is an
            # invariant violation, not a config error
            raise
        except (InvariantViolation, ValueError, KeyError, OSError) as exc:
            raise ConfigError(f"bad channel spec {spec!r}: {exc}") from exc
    return out


def run_capacity(config: RunConfig) -> dict:
    results = []
    for i, ch in enumerate(_channels(config)):
        entry = {"channel": channel_to_json(ch), "reports": {}}
        entry["reports"]["chi"] = holevo_capacity(ch, _opts(config, "chi", i))
        entry["reports"]["q1"] = q1(ch, _opts(config, "q1", i))
        entry["reports"]["p1"] = p1(
            ch, _opts(config, "p1", i), warm_inputs=[entry["reports"]["q1"].diagnostics["best_input"]]
        )
        entry["reports"]["c_e"] = c_e(ch, _opts(config, "c_e", i, default_restarts=3))
        entry["reports"]["q_a"] = q_a(ch, _opts(config, "q_a", i, default_restarts=4))
        entry["reports"]["msw_chi"] = msw_chi(ch, _opts(config, "msw", i, default_restarts=2))
        results.append(entry)
    return {"results": results}


def run_potential(config: RunConfig) -> dict:
    results = []
    for i, ch in enumerate(_channels(config)):
        entry = {"channel": channel_to_json(ch)}
        entry["qa_p"] = q_a_potential(ch, _opts(config, "qa_p", i, default_restarts=3))
        entry["chi_p_upper"] = chi_p_upper(ch, _opts(config, "chi_p", i, default_restarts=2))
        eof = channel_eof(ch, _opts(config, "eof", i, default_restarts=4))
        entry["qp_upper"] = {"target": "qp_upper", "value": eof.value, "components": eof.components}
        entry["pp_upper"] = {"target": "pp_upper", "value": eof.value, "components": eof.components}
        entry["audit"] = perfection_audit(ch, _opts(config, "audit", i, default_restarts=4))
        results.append(entry)
    return {"results": results}


def run_lift(config: RunConfig) -> dict:
    results = []
    for i, ch in enumerate(_channels(config)):
        eof = channel_eof(ch, _opts(config, "eof", i, default_restarts=4))
        lifted = canonical_lift(ch, eof.components["best_rotation"])
        lifted_q1 = q1(lifted.lifted, _opts(config, "lifted_q1", i))
        entry = {
            "channel": channel_to_json(ch),
            "lifted": channel_to_json(lifted.lifted),
            "kraus_choice": lifted.kraus_choice,
            "lifted_q1": lifted_q1,
            "channel_eof": eof,
            "lifted_is_hadamard": is_hadamard(lifted.lifted),
        }
        results.append(entry)
    return {"results": results}


def run_classify(config: RunConfig) -> dict:
    results = []
    for i, ch in enumerate(_channels(config)):
        entry = {
            "channel": channel_to_json(ch),
            "hadamard": is_hadamard(ch),
            "entanglement_breaking": is_entanglement_breaking(ch),
            "degradable": is_degradable(ch, _opts(config, "degradable", i, default_restarts=12)),
        }
        results.append(entry)
    return {"results": results}


def run_additivity(config: RunConfig) -> dict:
    channels = _channels(config)
    records = []
    out = {}
    if len(channels) >= 2:
        for quantity in ("q1", "p1"):
            rec = additivity_gap(
                quantity,
                channels[0],
                channels[1],
                _opts(config, f"gap-{quantity}"),
                dim_cap=config.max_dim,
            )
            records.append(rec)
        out["gap_records"] = records
    else:
        ch = channels[0]
        out["chain"] = chain_check(ch, _opts(config, "chain", default_restarts=4))
        out["activation"] = activation_search(
            "q1", ch, opts=_opts(config, "activation", default_restarts=3), dim_cap=config.max_dim
        )
        records = [out["activation"]]
    if config.out.endswith(".json"):
        write_gap_records_csv(records, config.out[:-5] + ".csv")
    return out


def _blocks_from_config(obj, seed: int) -> BlockDecomposition:
    if obj is None:
        # seeded demo: two blocks with entangled pure parts on B_R (x) E
        rng = np.random.default_rng(derive_seed(seed, "structure-demo"))
        blocks = []
        probs = rng.dirichlet([2.0, 2.0])
        for i in range(2):
            v = rng.normal(size=4) + 1j * rng.normal(size=4)
            blocks.append(Block(float(probs[i]), np.array([[1.0 + 0j]]), v / np.linalg.norm(v), (1, 2)))
        return BlockDecomposition(blocks=blocks, d_e=2)
    from .serialize import matrix_from_json

    blocks = []
    for b in obj["blocks"]:
        blocks.append(
            Block(
                float(b["prob"]),
                matrix_from_json(b["left_state"]),
                matrix_from_json(b["pure_state"]).reshape(-1),
                tuple(b["dims"]),
            )
        )
    return BlockDecomposition(blocks=blocks, d_e=int(obj["d_e"]))


def run_structure(config: RunConfig, blocks_obj=None) -> dict:
    decomposition = _blocks_from_config(blocks_obj, config.seed)
    state = construct_block_state(decomposition)
    roundtrip = verify_block_form(state, decomposition)
    eof_report = verify_equality_case(state, "eof", opts=_opts(config, "structure-eof", default_restarts=8))
    discovered = discover_block_decomposition(state)
    return {
        "expected_entropy_gap": expected_entropy_gap(decomposition),
        "equality_eof": eof_report,
        "roundtrip": roundtrip,
        "discovery": {
            "found": discovered is not None,
            "n_blocks": len(discovered.blocks) if discovered else 0,
        },
        "ppt": ppt_check(state),
    }


RUNNERS = {
    "capacity": run_capacity,
    "potential": run_potential,
    "lift": run_lift,
    "classify": run_classify,
    "additivity": run_additivity,
    "structure": run_structure,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chancap", description=__doc__)
    parser.add_argument("command", choices=sorted(RUNNERS), help="report to generate")
    parser.add_argument("--channel", action="append", default=[], help="channel spec, e.g. dephasing(0.1); repeatable")
    parser.add_argument("--config", help="JSON RunConfig file")
    parser.add_argument("--out", default=None, help="output JSON path")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--restarts", type=int, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--max-dim", type=int, default=None)
    return parser


def _merge_config(args) -> tuple:
    blocks_obj = None
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        blocks_obj = raw.get("blocks")
        config = RunConfig.from_json(raw)
        if config.command != args.command:
            raise ConfigError(
                f"config command {config.command!r} does not match CLI command {args.command!r}"
            )
    else:
        config = RunConfig(command=args.command)
    if args.channel:
        config.channels = list(args.channel)
    for name in ("out", "seed", "restarts", "tol"):
        val = getattr(args, name)
        if val is not None:
            setattr(config, name, val)
    if args.max_dim is not None:
        config.max_dim = args.max_dim
    return config, blocks_obj


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 3 if exc.code not in (0, None) else 0
    try:
        config, blocks_obj = _merge_config(args)
        runner = RUNNERS[config.command]
        if config.command == "structure":
            body = runner(config, blocks_obj)
        else:
            body = runner(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "config": config.to_json(),
        **to_jsonable(body),
    }
    payload = json.dumps(report, indent=2, sort_keys=True)
    report_with_time = json.loads(payload)
    report_with_time["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    with open(config.out, "w") as fh:
        json.dump(report_with_time, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
