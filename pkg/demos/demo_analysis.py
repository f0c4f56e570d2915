#!/usr/bin/env python3
"""Analyze a base graph: assumptions, entropy rate, speed, predictions.

Usage:
    python3 demos/demo_analysis.py [--graph PATH] [--alpha A]
"""

import argparse
import math
import pathlib

from liftmix import (
    check_assumptions,
    entropy,
    is_cover_transient,
    parse_graph,
    predict_mixing_time,
)

HERE = pathlib.Path(__file__).parent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--graph", default=str(HERE / "graphs" / "theta3.g"))
    ap.add_argument("--alpha", type=float, default=None,
                    help="override the holding probability")
    args = ap.parse_args()

    g = parse_graph(pathlib.Path(args.graph).read_text())
    print(f"graph: {args.graph}")
    print(f"  vertices = {list(g.vertices)}, edges = {len(g.edges)}, "
          f"alpha = {g.alpha}")

    rep_a = check_assumptions(g)
    print(f"  irreducible = {rep_a.a1_irreducible}, "
          f"period = {rep_a.period}, "
          f"two escape routes everywhere = {rep_a.a2_two_cycles}")
    verdict = is_cover_transient(g)
    print(f"  tree walk transient = {verdict.transient} ({verdict.reason})")

    report = entropy(g, alpha=args.alpha)
    print("\nfirst-passage analysis (on the pruned 2-core):")
    if report.core.removed_vertices:
        print(f"  pruned vertices: {list(report.core.removed_vertices)} "
              f"(core step fraction {report.core_step_fraction:.6f})")
    for name, q in report.first_passage.as_dict(report.core.graph).items():
        print(f"  q[{name}] = {q:.12f}")
    print(f"  per-level entropy   h_W = {report.per_level_entropy:.12f}")
    print(f"  escape speed        s0  = {report.escape_speed:.12f}")
    print(f"  entropy rate        h   = {report.entropy_rate:.12f}  "
          f"(alpha = {report.holding_prob})")
    print(f"  walk speed              = {report.speed:.12f}")
    if report.degenerate:
        print("  NOTE: degenerate escape (zero entropy rate); "
              "mixing on lifts will not follow a log-n law")
        return

    print("\npredicted mixing times on n-lifts (threshold 0.25):")
    for n in (1_000, 10_000, 100_000):
        pred = predict_mixing_time(report, n, 0.25)
        print(f"  n = {n:>7}: about {pred.t_center:7.1f} steps "
              f"(= log(n)/h = {math.log(n):.2f}/{report.entropy_rate:.4f})")


if __name__ == "__main__":
    main()
