"""Grid experiment: rank correlation across favorite counts and interaction budgets.

Writes sweep.csv / sweep.json next to this script unless --out-dir is given.

    python scripts/run_sweep.py --m 5,10,15 --interactions 1..5 --reps 5
"""

import argparse
import sys
from pathlib import Path

from tasterank import EngineConfig, generate_synthetic, parameter_sweep, train_bank
from tasterank.cli import BENCHMARK_SPEC, _parse_int_list
from tasterank.evaluation import format_sweep_table, sweep_to_csv, sweep_to_json


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--m", default="5,10,15")
    parser.add_argument("--interactions", default="1..5")
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--noise", type=float, default=0.0)
    parser.add_argument("--out-dir", default=str(Path(__file__).parent))
    args = parser.parse_args()

    catalog = generate_synthetic(**BENCHMARK_SPEC)
    cfg = EngineConfig(rng_seed=args.seed)
    bank = train_bank(catalog, cfg)
    result = parameter_sweep(
        catalog,
        bank,
        cfg,
        m_values=_parse_int_list(args.m),
        interaction_values=_parse_int_list(args.interactions),
        repetitions=args.reps,
        noise_sigma=args.noise,
    )
    out_dir = Path(args.out_dir)
    (out_dir / "sweep.csv").write_text(sweep_to_csv(result))
    (out_dir / "sweep.json").write_text(sweep_to_json(result) + "\n")
    print(format_sweep_table(result))
    print(f"\nwrote {out_dir / 'sweep.csv'} and {out_dir / 'sweep.json'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
