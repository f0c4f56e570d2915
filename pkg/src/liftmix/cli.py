"""Command-line interface: reproducible experiments behind subcommands.

Every subcommand prints a one-line JSON summary on standard output (all
progress goes to standard error), writes artifacts atomically, and derives
all randomness from a master seed plus fixed purpose strings, so re-running
a command with the same configuration reproduces every artifact byte for
byte.  Artifacts embed the configuration digest, library version, and
graph digest; commands that write files also write a ``manifest.json``
whose only non-reproducible content is isolated under its ``timing`` key.

Exit codes: 0 success; 1 validation or analysis error; 2 numerical
non-convergence; 3 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .analyzer import (
    FIRST_PASSAGE_MAX_ITER,
    FIRST_PASSAGE_TOL,
    entropy,
)
from .base_graph import check_assumptions, is_cover_transient, parse_graph, validate_graph
from .cover import (
    ExcursionStats,
    RayView,
    estimate_clt_params,
    estimate_speed,
    excursion_decomposition,
    make_ray_view,
    ray_localization_profile,
    simulate_walk,
)
from .errors import AnalysisError, GraphError, NonConvergenceError
from .lift import (
    generate_sequential_lift,
    generate_uniform_lift,
    lift_from_json,
    lift_to_json,
    spectrum_inheritance_check,
)
from .mixing import DEFAULT_EPS_LIST, cutoff_sweep, mixing_curve, _select_starts
from .rng import substream

ENV_OUT_DIR = "LIFTMIX_OUT_DIR"
ENV_WORKERS = "LIFTMIX_WORKERS"


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 3."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# plumbing helpers
# ---------------------------------------------------------------------------


def _progress(msg):
    print(msg, file=sys.stderr, flush=True)


def _load_graph(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise GraphError(f"cannot read graph file {path!r}: {exc}") from exc
    return parse_graph(text)


def _resolve_out_dir(args):
    out = getattr(args, "out", None)
    if out is None:
        out = os.environ.get(ENV_OUT_DIR) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _resolve_workers(args):
    flag = getattr(args, "workers", None)
    if flag is not None:
        return max(1, int(flag))
    env = os.environ.get(ENV_WORKERS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise AnalysisError(f"bad {ENV_WORKERS} value {env!r}") from None
    return 1


def _canonical_json(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _config_digest(config):
    return hashlib.sha256(_canonical_json(config).encode("utf-8")).hexdigest()


def _meta(config_digest, g):
    return {
        "config_digest": config_digest,
        "library_version": __version__,
        "graph_digest": g.digest(),
    }


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _csv_text(meta, header, rows):
    lines = [f"# {key}: {value}" for key, value in meta.items()]
    lines.append(",".join(header))
    lines.extend(",".join(str(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def _file_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir, command, config, config_digest, g, artifact_paths,
                    started, t0):
    manifest = {
        "command": command,
        "config": config,
        "config_digest": config_digest,
        "library_version": __version__,
        "graph_digest": g.digest(),
        "artifacts": {
            name: _file_sha256(path) for name, path in sorted(artifact_paths.items())
        },
        "timing": {
            "started_utc": started,
            "wall_seconds": round(time.monotonic() - t0, 6),
        },
    }
    path = os.path.join(out_dir, "manifest.json")
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=False) + "\n")
    return path


def _parse_eps_list(text):
    try:
        eps = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise AnalysisError(f"bad threshold list {text!r}") from None
    if not eps or not all(0.0 < e < 1.0 for e in eps):
        raise AnalysisError("thresholds must lie strictly between 0 and 1")
    return eps


def _parse_n_list(text):
    try:
        ns = tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise AnalysisError(f"bad degree list {text!r}") from None
    if not ns or any(n < 1 for n in ns):
        raise AnalysisError("lift degrees must be positive integers")
    return ns


def _fmt_eps(e):
    return repr(float(e))


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _cmd_validate(args):
    g = _load_graph(args.graph)
    validate_graph(g)
    report = check_assumptions(g)
    transient = None
    reason = None
    if report.a1_irreducible:
        verdict = is_cover_transient(g)
        transient = verdict.transient
        reason = verdict.reason
    config = {"command": "validate", "graph_digest": g.digest()}
    payload = {
        "valid": True,
        "vertices": g.n_vertices,
        "edges": len(g.edges),
        "alpha": g.alpha,
        "irreducible": report.a1_irreducible,
        "two_escape_routes": report.a2_two_cycles,
        "all_orientations_positive": report.a3_all_positive,
        "no_dead_orientations": report.a3_star,
        "every_edge_escapes": report.a4_every_edge_on_cycle,
        "period": report.period,
        "witness_cycles": [
            [g.oriented_name(k) for k in cyc] for cyc in report.witness_cycles
        ],
        "cover_transient": transient,
        "transience_reason": reason,
        "meta": _meta(_config_digest(config), g),
    }
    return payload


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _cmd_analyze(args):
    g = _load_graph(args.graph)
    report = entropy(g, alpha=args.alpha, tol=args.tol, max_iter=args.max_iter)
    gc = report.core.graph
    fps = report.first_passage
    rl = report.ray_law
    config = {
        "command": "analyze",
        "graph_digest": g.digest(),
        "alpha": report.holding_prob,
        "tol": args.tol,
        "max_iter": args.max_iter,
    }
    payload = {
        "q": fps.as_dict(gc),
        "w_hat": rl.exit_dict(),
        "pi_hat": rl.freq_dict(),
        "h_W": report.per_level_entropy,
        "s0": report.escape_speed,
        "h_alpha": report.entropy_rate,
        "a_frac": report.core_step_fraction,
        "degenerate": report.degenerate,
        "residuals": {
            "first_passage": fps.residual,
            "ray_stationarity": rl.stationarity_residual,
        },
        "iterations": fps.iterations,
        "alpha": report.holding_prob,
        "s_alpha": report.speed,
        "h_alpha_reciprocal_scaling": report.entropy_rate_reciprocal_scaling,
        "removed_vertices": list(report.core.removed_vertices),
        "meta": _meta(_config_digest(config), g),
    }
    return payload


# ---------------------------------------------------------------------------
# cover-sim
# ---------------------------------------------------------------------------


def _cover_trial(packed):
    (text, root, steps, alpha, master_seed, trial, margin, e_star, r_max,
     exit_prob, edge_freq) = packed
    g = parse_graph(text)
    view = RayView(graph=g, exit_prob=np.asarray(exit_prob),
                   edge_freq=np.asarray(edge_freq))
    rng = substream(master_seed, "cover-walk", trial)
    traj = simulate_walk(g, root, steps, alpha=alpha, rng=rng,
                         warn_recurrent=False)
    stats = excursion_decomposition(traj, view, e_star=e_star, margin=margin)
    profile = ray_localization_profile([traj], r_max, margin=margin)
    return {
        "trial": trial,
        "durations": stats.durations,
        "increments": stats.log_weight_increments,
        "levels": stats.level_increments,
        "n_excursions": stats.n,
        "final_height": int(traj.heights[-1]) if len(traj) else 0,
        "counts": np.asarray(profile.counts, dtype=np.int64),
        "n_samples": profile.n_samples,
    }


def _cmd_cover_sim(args):
    g = _load_graph(args.graph)
    alpha = g.alpha if args.alpha is None else float(args.alpha)
    report = entropy(g, alpha=alpha)
    view_full = make_ray_view(g, report.ray_law)
    root = args.root if args.root is not None else g.vertices[0]
    if root not in g.vertex_index:
        raise GraphError(f"unknown root vertex {root!r}")
    if args.e_star is not None:
        if args.e_star not in g.oriented_index_by_name:
            raise AnalysisError(f"unknown oriented edge {args.e_star!r}")
        e_star = g.oriented_index_by_name[args.e_star]
    else:
        e_star = int(np.argmax(view_full.edge_freq))
    workers = _resolve_workers(args)
    out_dir = _resolve_out_dir(args)
    config = {
        "command": "cover-sim",
        "graph_digest": g.digest(),
        "alpha": alpha,
        "steps": args.steps,
        "trials": args.trials,
        "seed": args.seed,
        "margin": args.margin,
        "root": root,
        "e_star": g.oriented_name(e_star),
        "r_max": args.r_max,
        "per_trial": bool(args.per_trial),
    }
    digest = _config_digest(config)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.monotonic()
    text = g.to_text()
    packed = [
        (text, root, args.steps, alpha, args.seed, trial, args.margin, e_star,
         args.r_max, view_full.exit_prob, view_full.edge_freq)
        for trial in range(args.trials)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = []
            for res in pool.map(_cover_trial, packed):
                results.append(res)
                _progress(f"trial {res['trial'] + 1}/{args.trials} done "
                          f"({res['n_excursions']} excursions)")
    else:
        results = []
        for item in packed:
            res = _cover_trial(item)
            results.append(res)
            _progress(f"trial {res['trial'] + 1}/{args.trials} done "
                      f"({res['n_excursions']} excursions)")

    durations = np.concatenate([r["durations"] for r in results])
    increments = np.concatenate([r["increments"] for r in results])
    levels = np.concatenate([r["levels"] for r in results])
    pooled = ExcursionStats(
        durations=durations,
        log_weight_increments=increments,
        level_increments=levels,
        e_star=e_star,
        degenerate=bool((increments <= 1e-9).all()),
    )
    est = estimate_clt_params(pooled)
    sp = estimate_speed(pooled)
    counts = np.sum([r["counts"] for r in results], axis=0)
    n_samples = int(sum(r["n_samples"] for r in results))
    tail = {str(r): float(counts[r]) / n_samples for r in range(args.r_max + 1)}

    artifacts = {}
    if args.per_trial:
        rows = [
            (
                r["trial"],
                r["n_excursions"],
                int(r["durations"].sum()),
                repr(float(r["increments"].sum())),
                int(r["levels"].sum()),
                r["final_height"],
            )
            for r in results
        ]
        csv_meta = {
            "config_digest": digest,
            "library_version": __version__,
            "graph_digest": g.digest(),
        }
        path = os.path.join(out_dir, "per_trial.csv")
        _atomic_write(path, _csv_text(
            csv_meta,
            ("trial", "n_excursions", "sum_duration", "sum_log_weight",
             "sum_levels", "final_height"),
            rows,
        ))
        artifacts["per_trial.csv"] = path
    manifest_path = None
    if artifacts:
        manifest_path = _write_manifest(out_dir, "cover-sim", config, digest,
                                        g, artifacts, started, t0)
    payload = {
        "h_est": est.h_est,
        "se_h": est.h_se,
        "sigma_est": est.sigma_est,
        "se_sigma": est.sigma_se,
        "speed_est": sp.value,
        "localization_profile": {"tail": tail, "n_samples": n_samples},
        "se_speed": sp.se,
        "n_excursions": pooled.n,
        "degenerate": est.degenerate,
        "cylindrical": est.cylindrical,
        "e_star": g.oriented_name(e_star),
        "root": root,
        "alpha": alpha,
        "steps": args.steps,
        "trials": args.trials,
        "h_analytic": report.entropy_rate,
        "speed_analytic": report.speed,
        "artifacts": sorted(artifacts),
        "manifest": manifest_path,
        "meta": _meta(digest, g),
    }
    return payload


# ---------------------------------------------------------------------------
# lift
# ---------------------------------------------------------------------------


def _cmd_lift(args):
    g = _load_graph(args.graph)
    if args.verify is not None:
        try:
            with open(args.verify, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise GraphError(f"cannot read lift file {args.verify!r}: {exc}") from exc
        lift = lift_from_json(g, text)
        config = {
            "command": "lift",
            "graph_digest": g.digest(),
            "verify": True,
            "n": lift.n,
        }
        return {
            "verified": True,
            "n": lift.n,
            "edges": len(g.edges),
            "base_hash": g.digest(),
            "meta": _meta(_config_digest(config), g),
        }
    if args.n is None:
        raise AnalysisError("--n is required unless --verify is given")
    out_dir = _resolve_out_dir(args)
    config = {
        "command": "lift",
        "graph_digest": g.digest(),
        "n": args.n,
        "seed": args.seed,
        "sequential": bool(args.sequential),
    }
    digest = _config_digest(config)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.monotonic()
    if args.sequential:
        rng = substream(args.seed, "lift-sequential", args.n, 0)
        lift = generate_sequential_lift(g, args.n, rng, seed=args.seed)
    else:
        rng = substream(args.seed, "lift", args.n, 0)
        lift = generate_uniform_lift(g, args.n, rng, seed=args.seed)
    payload_file = json.loads(lift_to_json(lift))
    payload_file["meta"] = _meta(digest, g)
    path = os.path.join(out_dir, args.file_name)
    _atomic_write(path, _canonical_json(payload_file) + "\n")
    manifest_path = _write_manifest(out_dir, "lift", config, digest, g,
                                    {args.file_name: path}, started, t0)
    return {
        "written": path,
        "n": lift.n,
        "sequential": bool(args.sequential),
        "base_hash": g.digest(),
        "manifest": manifest_path,
        "meta": _meta(digest, g),
    }


# ---------------------------------------------------------------------------
# mix
# ---------------------------------------------------------------------------


def _cmd_mix(args):
    g = _load_graph(args.graph)
    alpha = g.alpha if args.alpha is None else float(args.alpha)
    eps_list = _parse_eps_list(args.eps)
    eps_primary = eps_list[0]
    out_dir = _resolve_out_dir(args)
    config = {
        "command": "mix",
        "graph_digest": g.digest(),
        "n": args.n,
        "seed": args.seed,
        "alpha": alpha,
        "eps": list(eps_list),
        "starts": args.starts,
        "t_cap": args.t_cap,
    }
    digest = _config_digest(config)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.monotonic()
    lift = generate_uniform_lift(g, args.n, substream(args.seed, "lift", args.n, 0),
                                 seed=args.seed)
    rng = substream(args.seed, "start-sample", args.n, 0)
    states, exhaustive = _select_starts(lift, args.starts, rng)
    curves = {}
    for idx, s in enumerate(states):
        curves[s] = mixing_curve(lift, s, alpha=alpha, eps_list=eps_list,
                                 t_cap=args.t_cap)
        if (idx + 1) % 50 == 0 or idx + 1 == len(states):
            _progress(f"start {idx + 1}/{len(states)} done")

    def _rank(state):
        t = curves[state].crossings[eps_primary]
        return (math.inf if t is None else t, -state)

    worst_state = max(states, key=_rank)
    worst_curve = curves[worst_state]
    csv_meta = {
        "config_digest": digest,
        "library_version": __version__,
        "graph_digest": g.digest(),
        "start": worst_state,
    }
    artifacts = {}
    curve_path = os.path.join(out_dir, "curve.csv")
    _atomic_write(curve_path, _csv_text(
        csv_meta, ("t", "tv"),
        [(t, repr(float(v))) for t, v in enumerate(worst_curve.tv)],
    ))
    artifacts["curve.csv"] = curve_path
    if worst_curve.averaged is not None:
        avg_path = os.path.join(out_dir, "curve_averaged.csv")
        _atomic_write(avg_path, _csv_text(
            csv_meta, ("t", "tv"),
            [(t, repr(float(v))) for t, v in enumerate(worst_curve.averaged.tv)],
        ))
        artifacts["curve_averaged.csv"] = avg_path

    per_start = {
        str(s): {
            _fmt_eps(e): curves[s].crossings[e] for e in eps_list
        }
        for s in states
    }
    summary = {
        "n": args.n,
        "seed": args.seed,
        "alpha": alpha,
        "eps": list(eps_list),
        "eps_primary": eps_primary,
        "starts_policy": args.starts,
        "exhaustive": exhaustive,
        "worst_start": worst_state,
        "worst_crossings": {
            _fmt_eps(e): worst_curve.crossings[e] for e in eps_list
        },
        "periodic": worst_curve.periodic,
        "averaged_crossings": (
            {_fmt_eps(e): worst_curve.averaged.crossings[e] for e in eps_list}
            if worst_curve.averaged is not None else None
        ),
        "per_start": per_start,
        "t_cap": args.t_cap,
        "meta": _meta(digest, g),
    }
    summary_path = os.path.join(out_dir, "summary.json")
    _atomic_write(summary_path, json.dumps(summary, indent=2) + "\n")
    artifacts["summary.json"] = summary_path
    manifest_path = _write_manifest(out_dir, "mix", config, digest, g,
                                    artifacts, started, t0)
    return {
        "worst_start": worst_state,
        "worst_crossings": summary["worst_crossings"],
        "periodic": worst_curve.periodic,
        "n": args.n,
        "artifacts": sorted(artifacts),
        "manifest": manifest_path,
        "meta": _meta(digest, g),
    }


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _cmd_sweep(args):
    g = _load_graph(args.graph)
    alpha = g.alpha if args.alpha is None else float(args.alpha)
    eps_list = _parse_eps_list(args.eps)
    n_grid = _parse_n_list(args.n)
    eps_primary = 0.25 if 0.25 in eps_list else eps_list[0]
    workers = _resolve_workers(args)
    out_dir = _resolve_out_dir(args)
    config = {
        "command": "sweep",
        "graph_digest": g.digest(),
        "n_grid": list(n_grid),
        "alpha": alpha,
        "eps": list(eps_list),
        "seeds": args.seeds,
        "master_seed": args.master_seed,
        "starts": args.starts,
        "t_cap": args.t_cap,
        "eps_primary": eps_primary,
    }
    digest = _config_digest(config)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.monotonic()
    _progress(f"sweep over n={list(n_grid)}, {args.seeds} seeds, "
              f"{workers} worker(s)")
    result = cutoff_sweep(
        g, n_grid, alpha=alpha, eps_list=eps_list, n_seeds=args.seeds,
        master_seed=args.master_seed, starts=args.starts, workers=workers,
        t_cap=args.t_cap, eps_primary=eps_primary,
    )
    csv_meta = {
        "config_digest": digest,
        "library_version": __version__,
        "graph_digest": g.digest(),
    }
    rows = [
        (
            row.n, row.seed, row.start, _fmt_eps(row.eps),
            -1 if row.t_mix is None else row.t_mix,
            1 if row.reached else 0,
        )
        for row in result.rows
    ]
    results_path = os.path.join(out_dir, "results.csv")
    _atomic_write(results_path, _csv_text(
        csv_meta, ("n", "seed", "start", "eps", "t_mix", "reached"), rows,
    ))
    summary = {
        "slope": result.slope,
        "slope_se": result.slope_se,
        "slope_ci": list(result.slope_ci),
        "predicted": result.predicted_slope,
        "entropy_rate": result.entropy_rate,
        "verdict_slope": result.verdict_slope,
        "window": {
            "ratios": {str(seed): result.window_ratios[seed]
                       for seed in sorted(result.window_ratios)},
            "nonincreasing_seeds": result.window_nonincreasing_seeds,
            "verdict": result.verdict_window,
        },
        "verdict": result.verdict,
        "n_grid": list(result.n_grid),
        "eps": list(result.eps_list),
        "eps_primary": result.eps_primary,
        "alpha": result.alpha,
        "seeds": result.n_seeds,
        "starts": args.starts,
        "t_caps": {str(n): result.t_caps[n] for n in result.n_grid},
        "ci_note": "normal-approximation interval from the OLS slope SE",
        "meta": _meta(digest, g),
    }
    summary_path = os.path.join(out_dir, "summary.json")
    _atomic_write(summary_path, json.dumps(summary, indent=2) + "\n")
    artifacts = {"results.csv": results_path, "summary.json": summary_path}
    manifest_path = _write_manifest(out_dir, "sweep", config, digest, g,
                                    artifacts, started, t0)
    return {
        "slope": result.slope,
        "predicted": result.predicted_slope,
        "verdict_slope": result.verdict_slope,
        "verdict_window": result.verdict_window,
        "verdict": result.verdict,
        "artifacts": sorted(artifacts),
        "manifest": manifest_path,
        "meta": _meta(digest, g),
    }


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


def _cmd_spectrum(args):
    g = _load_graph(args.graph)
    alpha = g.alpha if args.alpha is None else float(args.alpha)
    lift = generate_uniform_lift(g, args.n, substream(args.seed, "lift", args.n, 0),
                                 seed=args.seed)
    chk = spectrum_inheritance_check(lift, alpha=alpha)
    config = {
        "command": "spectrum",
        "graph_digest": g.digest(),
        "n": args.n,
        "seed": args.seed,
        "alpha": alpha,
    }
    return {
        "eigenvalues": [[z.real, z.imag] for z in chk.eigenvalues],
        "max_residual": chk.max_residual,
        "inherited": chk.max_residual <= 1e-10,
        "n": args.n,
        "alpha": alpha,
        "meta": _meta(_config_digest(config), g),
    }


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    parser = _Parser(
        prog="liftmix",
        description=(
            "Entropy, speed, and cutoff analysis for random walks on "
            "random lifts of a weighted multigraph."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("validate", help="check a graph file and its assumptions")
    p.add_argument("--graph", required=True, help="path to a graph file")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("analyze", help="entropy and speed analysis of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--alpha", type=float, default=None,
                   help="holding probability (default: graph's own)")
    p.add_argument("--tol", type=float, default=FIRST_PASSAGE_TOL,
                   help="first-passage solver tolerance")
    p.add_argument("--max-iter", type=int, default=FIRST_PASSAGE_MAX_ITER,
                   help="first-passage solver iteration cap")
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("cover-sim",
                       help="Monte Carlo walk on the universal cover")
    p.add_argument("--graph", required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--steps", type=int, default=200_000,
                   help="steps per trajectory")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--margin", type=int, default=25,
                   help="top levels treated as unconfirmed")
    p.add_argument("--root", default=None, help="root vertex label")
    p.add_argument("--e-star", default=None,
                   help="renewal edge, e.g. e1+ (default: most frequent)")
    p.add_argument("--r-max", type=int, default=10,
                   help="largest localization radius reported")
    p.add_argument("--per-trial", action="store_true",
                   help="also write per_trial.csv")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_cover_sim)

    p = sub.add_parser("lift", help="generate or verify an explicit n-lift")
    p.add_argument("--graph", required=True)
    p.add_argument("--n", type=int, default=None, help="lift degree")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sequential", action="store_true",
                   help="use the sequential-matching generator")
    p.add_argument("--verify", default=None, metavar="PATH",
                   help="validate an existing lift file instead of generating")
    p.add_argument("--file-name", default="lift.json",
                   help="artifact file name (default lift.json)")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_lift)

    p = sub.add_parser("mix", help="exact TV mixing curve on one lift")
    p.add_argument("--graph", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--eps", default="0.25,0.1,0.5,0.9",
                   help="comma-separated TV thresholds; first is primary")
    p.add_argument("--starts", default="all",
                   help="'all' or 'sample:k' start states")
    p.add_argument("--t-cap", type=int, default=10_000)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_mix)

    p = sub.add_parser("sweep",
                       help="mixing-time growth over a grid of lift degrees")
    p.add_argument("--graph", required=True)
    p.add_argument("--n", required=True,
                   help="comma-separated lift degrees, increasing")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--eps", default="0.1,0.25,0.5,0.9")
    p.add_argument("--seeds", type=int, default=5, help="lifts per degree")
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--starts", default="sample:5")
    p.add_argument("--t-cap", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("spectrum",
                       help="base-spectrum inheritance check on one lift")
    p.add_argument("--graph", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=None)
    p.set_defaults(handler=_cmd_spectrum)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "handler"):
        parser.error("a subcommand is required")
    try:
        payload = args.handler(args)
    except NonConvergenceError as exc:
        print(f"liftmix: non-convergence: {exc}", file=sys.stderr)
        return 2
    except (GraphError, AnalysisError) as exc:
        print(f"liftmix: error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(payload, separators=(",", ":")))
    return 0


if __name__ == "__main__":
    sys.exit(main())
