"""Command line interface: ingest, generate, train, simulate, sweep, score, serve.

Exit codes: 0 success, 1 usage error, 2 data error (missing/invalid files,
validation failures). A config file (JSON or TOML) can predefine any flag
default; explicit flags win.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .attributes import AttributeTrainingError, train_bank
from .catalog import CatalogValidationError, EngineConfig, UnknownItemError
from .datasets import (
    CatalogParseError,
    generate_synthetic,
    load_bank,
    load_catalog,
    load_usad,
    save_bank,
    save_catalog,
)
from .evaluation import (
    format_sweep_table,
    make_attribute_user,
    parameter_sweep,
    simulate_session,
    sweep_to_csv,
    sweep_to_json,
)
from .taste import score_test_items

USAGE_ERROR = 1
DATA_ERROR = 2

BENCHMARK_SPEC = {"n_items": 200, "dim": 16, "n_attribute_clusters": 8, "seed": 20240501}


class CliParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


class DataError(Exception):
    pass


def _parse_int_list(text: str) -> list[int]:
    """Accept '5', '5,10,15' and '1..5' range syntax."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part]


def _load_config_file(path: Optional[str]) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.exists():
        raise DataError(f"config file not found: {p}")
    text = p.read_text()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib  # py311+
        except ImportError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _engine_config(args, file_cfg: dict) -> EngineConfig:
    def pick(name: str, default):
        flag = getattr(args, name, None)
        if flag is not None:
            return flag
        return file_cfg.get(name, default)

    return EngineConfig(
        m=pick("m", 5),
        k=pick("k", 5),
        max_iterations=pick("iterations", 3),
        neighbors_per_favorite=pick("fanout", None),
        distance_metric=pick("metric", "euclidean"),
        tradeoff_c=pick("tradeoff_c", 1.0),
        solver_tolerance=pick("solver_tolerance", 1e-6),
        solver_max_epochs=pick("solver_max_epochs", 1000),
        rng_seed=pick("seed", 0),
    )


def _benchmark_catalog():
    return generate_synthetic(**BENCHMARK_SPEC)


def _resolve_catalog_and_bank(args, file_cfg: dict, cfg: EngineConfig):
    catalog_path = getattr(args, "catalog", None) or file_cfg.get("catalog")
    bank_path = getattr(args, "bank", None) or file_cfg.get("bank")
    catalog = load_catalog(catalog_path) if catalog_path else _benchmark_catalog()
    bank = load_bank(bank_path) if bank_path else train_bank(catalog, cfg)
    return catalog, bank


def cmd_ingest(args, file_cfg: dict) -> int:
    catalog = load_catalog(args.path, format=args.format)
    labeled = sum(1 for item in catalog.items if item.attribute_labels)
    summary = {
        "items": len(catalog),
        "dim": catalog.dim,
        "attributes": list(catalog.attribute_vocabulary),
        "labeled_items": labeled,
        "extractor": catalog.extractor,
    }
    if args.out:
        save_catalog(catalog, args.out)
        summary["out"] = args.out
    print(json.dumps(summary, indent=2))
    return 0


def cmd_gen_synthetic(args, file_cfg: dict) -> int:
    catalog = generate_synthetic(
        n_items=args.n,
        dim=args.dim,
        n_attribute_clusters=args.clusters,
        seed=args.seed if args.seed is not None else 0,
        separation=args.separation,
    )
    save_catalog(catalog, args.out)
    print(
        json.dumps(
            {"out": args.out, "items": len(catalog), "dim": catalog.dim,
             "clusters": args.clusters}
        )
    )
    return 0


def cmd_train_bank(args, file_cfg: dict) -> int:
    cfg = _engine_config(args, file_cfg)
    catalog_path = args.catalog or file_cfg.get("catalog")
    catalog = load_catalog(catalog_path) if catalog_path else _benchmark_catalog()
    bank = train_bank(catalog, cfg)
    save_bank(bank, args.out)
    print(
        json.dumps(
            {
                "out": args.out,
                "attributes": list(bank.attribute_names),
                "train_accuracy": [s.train_accuracy for s in bank.training_stats],
            },
            indent=2,
        )
    )
    return 0


def cmd_simulate(args, file_cfg: dict) -> int:
    cfg = _engine_config(args, file_cfg)
    catalog, bank = _resolve_catalog_and_bank(args, file_cfg, cfg)
    user = make_attribute_user(
        catalog, seed=cfg.rng_seed, noise_sigma=args.noise
    )
    report = simulate_session(catalog, bank, cfg, user)
    print(
        json.dumps(
            {
                "seed": cfg.rng_seed,
                "m": cfg.m,
                "k": cfg.k,
                "iterations": cfg.max_iterations,
                "noise_sigma": args.noise,
                "rho": report.rho,
                "n_test": report.n,
                "tie_adjusted": report.tie_adjusted,
            }
        )
    )
    return 0


def cmd_sweep(args, file_cfg: dict) -> int:
    cfg = _engine_config(args, file_cfg)
    catalog, bank = _resolve_catalog_and_bank(args, file_cfg, cfg)
    result = parameter_sweep(
        catalog,
        bank,
        cfg,
        m_values=_parse_int_list(args.m_values),
        interaction_values=_parse_int_list(args.interactions),
        repetitions=args.reps,
        noise_sigma=args.noise,
    )
    sys.stdout.write(sweep_to_csv(result))
    if args.json:
        Path(args.json).write_text(sweep_to_json(result) + "\n")
    if args.table:
        print(format_sweep_table(result), file=sys.stderr)
    return 0


def cmd_score(args, file_cfg: dict) -> int:
    catalog = load_catalog(args.catalog)
    usad = load_usad(args.usad)
    bank_path = args.bank or file_cfg.get("bank")
    if not bank_path:
        raise DataError("score requires --bank (or 'bank' in the config file)")
    bank = load_bank(bank_path)
    ids = args.ids.split(",") if args.ids else catalog.ids()
    scored = score_test_items(usad, bank, catalog, ids)
    ordered = sorted(scored, key=lambda s: (-s.score, s.id))
    print("id,score,undefined_correlation")
    for item in ordered:
        print(f"{item.id},{item.score:.6f},{str(item.undefined_correlation).lower()}")
    return 0


def cmd_serve(args, file_cfg: dict) -> int:
    import uvicorn

    from .service import create_app

    cfg = _engine_config(args, file_cfg)
    catalog, bank = _resolve_catalog_and_bank(args, file_cfg, cfg)
    app = create_app(
        catalog,
        bank,
        cfg,
        data_dir=args.data_dir or file_cfg.get("data_dir"),
    )
    host = args.host or file_cfg.get("host", "127.0.0.1")
    port = args.port if args.port is not None else int(file_cfg.get("port", 8000))
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def build_parser() -> CliParser:
    parser = CliParser(prog="tasterank", description=__doc__)
    parser.add_argument("--config", help="JSON or TOML file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a catalog file")
    p.add_argument("path")
    p.add_argument("--format", choices=["jsonl", "csv"], default=None)
    p.add_argument("--out", help="write the standardized catalog here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("gen-synthetic", help="generate a seeded synthetic catalog")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--clusters", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--separation", type=float, default=5.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("train-bank", help="train attribute classifiers")
    p.add_argument("--catalog")
    p.add_argument("--out", required=True)
    p.add_argument("--tradeoff-c", dest="tradeoff_c", type=float, default=None)
    p.set_defaults(func=cmd_train_bank)

    p = sub.add_parser("simulate", help="run one oracle-user session")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--catalog")
    p.add_argument("--bank")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="grid of simulated sessions over (m, interactions)")
    p.add_argument("--m", dest="m_values", default="5,10,15")
    p.add_argument("--interactions", default="1..5")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--catalog")
    p.add_argument("--bank")
    p.add_argument("--json", help="also write a JSON mirror here")
    p.add_argument("--table", action="store_true", help="print a grid to stderr")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("score", help="score catalog items against a taste profile")
    p.add_argument("catalog")
    p.add_argument("usad")
    p.add_argument("--bank")
    p.add_argument("--ids", help="comma-separated subset (default: whole catalog)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--catalog")
    p.add_argument("--bank")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--data-dir")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_cfg = _load_config_file(args.config)
        return args.func(args, file_cfg)
    except (
        DataError,
        FileNotFoundError,
        CatalogParseError,
        CatalogValidationError,
        AttributeTrainingError,
        UnknownItemError,
        json.JSONDecodeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
