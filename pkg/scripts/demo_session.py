"""Walk one scripted session end to end and print what the user would see.

    python scripts/demo_session.py --seed 3
"""

import argparse
import sys

from tasterank import (
    EngineConfig,
    RerankFeedback,
    finalize,
    generate_synthetic,
    make_attribute_user,
    rank_test_set,
    start_session,
    submit_feedback,
    train_bank,
)


def show_ranking(session, k=8):
    print(f"  generation {session.current_ranking.generation}, "
          f"pool of {len(session.current_ranking)}:")
    for item_id, score in session.current_ranking.entries[:k]:
        print(f"    {item_id}  {score:+.4f}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=3)
    args = parser.parse_args()

    catalog = generate_synthetic(200, 16, 8, seed=args.seed)
    cfg = EngineConfig(m=5, k=5, max_iterations=3, rng_seed=args.seed)
    bank = train_bank(catalog, cfg)
    oracle = make_attribute_user(catalog, seed=args.seed)
    truth = {i.id: float(i.features @ oracle.hidden_weights) for i in catalog.items}

    favorites = sorted(catalog.ids(), key=lambda i: -truth[i])[: cfg.m]
    print(f"favorites (oracle's top {cfg.m}): {favorites}")
    session = start_session(catalog, cfg, sorted(favorites))
    show_ranking(session)

    for round_no in range(cfg.max_iterations):
        shown = session.shown_prefix()
        reranked = tuple(sorted(shown, key=lambda i: -truth[i]))
        if list(reranked) == shown:
            print(f"round {round_no + 1}: shown order already matches taste, satisfied")
            submit_feedback(session, RerankFeedback(ordered_prefix=reranked))
            break
        print(f"round {round_no + 1}: reranking {shown} -> {list(reranked)}")
        submit_feedback(session, RerankFeedback(ordered_prefix=reranked))
        show_ranking(session)

    finalize(session, bank, catalog)
    print("\ntaste distribution:")
    for name, prob in zip(session.usad.dist.attributes, session.usad.dist.probs):
        bar = "#" * int(round(prob * 60))
        print(f"  {name:>22} {prob:.3f} {bar}")

    test_ids = [i for i in catalog.ids() if i not in set(session.current_ranking.ids())]
    scored = rank_test_set(session.usad, bank, catalog, test_ids[:40])
    print("\ntop test items by taste correlation:")
    for item_id, score in scored.entries[:8]:
        print(f"  {item_id}  {score:+.4f}   (oracle truth {truth[item_id]:+.3f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
