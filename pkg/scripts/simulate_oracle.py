"""Oracle-user study: recovery quality and the effect of interaction rounds.

For each seed, a fresh synthetic catalog and attribute bank are built, an
oracle user aligned with one planted attribute is sampled, and sessions run
at interaction budgets N=0 and N=3, noise-free and with one-sigma judgment
noise.

    python scripts/simulate_oracle.py --seeds 20
"""

import argparse
import sys

import numpy as np

from tasterank import (
    EngineConfig,
    SimulatedUser,
    generate_synthetic,
    make_attribute_user,
    simulate_session,
    train_bank,
)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--items", type=int, default=200)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--clusters", type=int, default=8)
    args = parser.parse_args()

    buckets = {"noise-free N=3": [], "noisy N=0": [], "noisy N=3": []}
    for s in range(args.seeds):
        catalog = generate_synthetic(args.items, args.dim, args.clusters, seed=1000 + s)
        bank = train_bank(catalog, EngineConfig())
        user = make_attribute_user(catalog, seed=2000 + s)
        sigma = float((catalog.feature_matrix() @ user.hidden_weights).std())
        noisy = SimulatedUser(user.hidden_weights, noise_sigma=sigma, seed=user.seed)
        cfg = EngineConfig(m=5, k=5, max_iterations=3, rng_seed=3000 + s)
        buckets["noise-free N=3"].append(simulate_session(catalog, bank, cfg, user).rho)
        buckets["noisy N=0"].append(
            simulate_session(catalog, bank, cfg.with_overrides(max_iterations=0), noisy).rho
        )
        buckets["noisy N=3"].append(simulate_session(catalog, bank, cfg, noisy).rho)

    print(f"{'setting':>16}  {'mean rho':>9}  {'std':>7}  {'min':>7}  {'max':>7}")
    for name, rhos in buckets.items():
        arr = np.array(rhos)
        print(
            f"{name:>16}  {arr.mean():>9.4f}  {arr.std():>7.4f}  "
            f"{arr.min():>7.4f}  {arr.max():>7.4f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
