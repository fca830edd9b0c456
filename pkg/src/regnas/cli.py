"""Command-line surface: reproducible experiments with per-run manifests.

Every run derives all randomness from one ``--seed`` through labelled
stream splitting, writes its primary outputs (CSV/JSON/JSONL, optionally
SVG), and drops a ``<out>.manifest.json`` capturing the resolved
configuration.  ``rerun <manifest>`` replays a manifest and must reproduce
the primary outputs byte for byte.

Exit codes: 0 ok, 1 user error (bad flags, unreadable files), 2 internal.
"""

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__, bench, cnn_space, metrics, presets, proxy, rng as rngmod
from . import rnn_space, signals, tasks
from .errors import RegNasError
from .evolution import EvolutionConfig, evolve


class UserError(Exception):
    pass


# --- small shared helpers ---------------------------------------------------


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(command, args, out_path, t0):
    manifest = {
        "command": command,
        "config": {k: v for k, v in sorted(args.items())},
        "seed": args.get("seed"),
        "version": __version__,
        "wall_time_s": round(time.time() - t0, 3),
    }
    _write_json(manifest, out_path + ".manifest.json")


def _load_task(spec):
    """``spec`` is a preset name or a path to a task JSON file."""
    if spec in presets.PRESETS:
        return presets.get_preset(spec)
    if os.path.exists(spec):
        return tasks.load_task(spec)
    raise UserError(f"unknown task {spec!r}: not a preset {sorted(presets.PRESETS)} or a file")


def _load_bench(path):
    if not os.path.exists(path):
        raise UserError(f"bench table not found: {path}")
    return bench.BenchTable.load(path)


def _bench_genotypes(table):
    ids = sorted(table.rows)
    return ids, [cnn_space.CnnGenotype.from_id(i) for i in ids]


def _fmt(x):
    return f"{x:.10g}"


# --- subcommand handlers (each takes the resolved-args dict) ----------------


def cmd_gen_bench(a):
    from dataclasses import replace

    def progress(gid, acc):
        print(f"{gid} {acc:.4f}", flush=True)

    dataset_cfg = bench.DatasetConfig()
    if a.get("n_train"):
        dataset_cfg = replace(dataset_cfg, n_train=a["n_train"])
    if a.get("n_test"):
        dataset_cfg = replace(dataset_cfg, n_test=a["n_test"])
    train_cfg = bench.TrainConfig()
    if a.get("epochs"):
        train_cfg = replace(train_cfg, epochs=a["epochs"])
    table = bench.build_bench_table(
        a["size"], a["seed"], a["out"], dataset_cfg, train_cfg, progress=progress
    )
    print(f"wrote {len(table.rows)} rows to {a['out']}")


def cmd_rank(a):
    table = _load_bench(a["bench"])
    task = _load_task(a["task"])
    ids, genotypes = _bench_genotypes(table)
    scores = proxy.score_population(
        genotypes, task, rngmod.spawn_seed(a["seed"], "proxy"), jobs=a["jobs"]
    )
    pred = np.array([-s.weighted for s in scores])  # higher is better
    gt = table.oriented(ids)
    rho = metrics.spearman_rho(pred, gt)
    tau = metrics.kendall_tau(pred, gt)
    rr = metrics.retrieving_rate(pred, gt, 0.10)
    with open(a["out"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "proxy_loss", "proxy_score", "groundtruth"])
        for gid, s, p in zip(ids, scores, pred):
            w.writerow([gid, _fmt(s.weighted), _fmt(p), _fmt(table.rows[gid])])
    summary = {"spearman_rho": rho, "kendall_tau": tau, "retrieving_rate_top10": rr}
    _write_json(summary, _stem(a["out"]) + "_summary.json")
    _scatter_svg(pred, np.array([table.rows[i] for i in ids]), _stem(a["out"]) + ".svg")
    print(f"rho={rho:.4f} tau={tau:.4f} retrieving@10%={rr:.4f}")


def _stem(path):
    return os.path.splitext(path)[0]


def _scatter_svg(pred, gt, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "fixed"
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(pred, gt, s=18)
    ax.set_xlabel("proxy score (higher is better)")
    ax.set_ylabel("groundtruth metric")
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def _probe_genotypes(table, n, seed):
    ids, genotypes = _bench_genotypes(table)
    if n > len(ids):
        raise UserError(f"{n} probes requested but bench table has {len(ids)} rows")
    sel = rngmod.stream(seed, "probes").choice(len(ids), size=n, replace=False)
    return [genotypes[i] for i in sorted(sel.tolist())]


def cmd_task_search(a):
    from dataclasses import replace

    table = _load_bench(a["bench"])
    probes = _probe_genotypes(table, a["probes"], a["seed"])
    eval_seed = rngmod.spawn_seed(a["seed"], "proxy")
    eval_batch = a.get("eval_batch") or 16
    batch = bench.proxy_batch(eval_batch, rngmod.spawn_seed(eval_seed, "batch"))

    def fitness(task):
        if a.get("eval_iterations"):
            task = replace(task, iterations=a["eval_iterations"], batch=eval_batch)
        return tasks.task_fitness(task, probes, table, eval_seed, input_batch=batch, jobs=a["jobs"])

    cfg = EvolutionConfig(a["population"], a["sample"], a["iterations"], maximize=True)
    trace = open(a["trace"], "w") if a["trace"] else None
    best_so_far = [-np.inf]

    def log(it, child, pop_size):
        best_so_far[0] = max(best_so_far[0], child.fitness)
        if trace is not None:
            rec = {"iteration": it, "fitness": child.fitness, "best": best_so_far[0]}
            trace.write(json.dumps(rec, sort_keys=True) + "\n")

    try:
        best, history = evolve(
            tasks.sample_task, tasks.mutate_task, fitness, cfg, rngmod.stream(a["seed"], "evolution"), log_fn=log
        )
    finally:
        if trace is not None:
            trace.close()
    tasks.save_task(best.genome, a["out"])
    print(f"best rho={best.fitness:.4f} over {len(history)} evaluations -> {a['out']}")


def cmd_nas_search(a):
    table = _load_bench(a["bench"])
    task = _load_task(a["task"])
    ids, _ = _bench_genotypes(table)
    id_set = set(ids)
    eval_seed = rngmod.spawn_seed(a["seed"], "proxy")
    batch = bench.proxy_batch(task.batch, rngmod.spawn_seed(eval_seed, "batch"))
    cache = {}

    def fitness(g):
        gid = g.canonical_id()
        if gid not in cache:
            cache[gid] = -proxy.train_regression_cnn(g, task, batch, eval_seed).weighted
        return cache[gid]

    def init(r):
        return cnn_space.CnnGenotype.from_id(ids[int(r.integers(len(ids)))])

    def mutate(g, r):
        # stay inside the benchmarked slice of the space so every visited
        # architecture has a groundtruth metric
        for _ in range(20):
            child = cnn_space.mutate_genotype(g, r)
            if child.canonical_id() in id_set:
                return child
        return cnn_space.CnnGenotype.from_id(ids[int(r.integers(len(ids)))])

    cfg = EvolutionConfig(a["population"], a["sample"], a["iterations"], maximize=True)
    best, history = evolve(init, mutate, fitness, cfg, rngmod.stream(a["seed"], "evolution"))

    gt = np.array([table.rows[ind.genome.canonical_id()] for ind in history])
    sign = 1.0 if table.higher_better else -1.0
    best_trace = np.maximum.accumulate(sign * gt) * sign
    l_star = max(table.rows.values()) if table.higher_better else min(table.rows.values())
    reg = metrics.regret(best_trace, l_star)
    with open(_stem(a["out"]) + "_trace.jsonl", "w") as fh:
        for t in range(len(history)):
            rec = {"t": t, "best_groundtruth": float(best_trace[t]), "regret": float(reg[t])}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    gid = best.genome.canonical_id()
    result = {
        "id": gid,
        "genotype": best.genome.to_json(),
        "proxy_score": best.fitness,
        "groundtruth": table.rows[gid],
        "final_regret": float(reg[-1]),
    }
    _write_json(result, a["out"])
    print(f"best {gid} groundtruth={table.rows[gid]:.4f} regret={reg[-1]:.4f}")


def cmd_eval_arch(a):
    task = _load_task(a["task"])
    g = cnn_space.CnnGenotype.from_id(a["id"])
    eval_seed = rngmod.spawn_seed(a["seed"], "proxy")
    batch = bench.proxy_batch(task.batch, rngmod.spawn_seed(eval_seed, "batch"))
    score = proxy.train_regression_cnn(g, task, batch, eval_seed)
    result = {
        "id": a["id"],
        "per_stage_loss": list(score.per_stage_loss),
        "weighted": score.weighted,
    }
    _write_json(result, a["out"])
    print(f"{a['id']} weighted={score.weighted:.6g}")


def cmd_signals(a):
    task = _load_task(a["task"])
    batch = bench.proxy_batch(a["batch"], rngmod.spawn_seed(a["seed"], "batch"))
    targets = proxy.realize_targets(task, batch, rngmod.spawn_seed(a["seed"], "target"), hw=a["hw"])
    os.makedirs(a["out"], exist_ok=True)
    written = []
    for si, t in enumerate(targets):
        if t is None:
            continue
        n_ch = min(t.shape[1], a["max_channels"])
        for c in range(n_ch):
            m = t[0, c]
            name = f"stage{si}_ch{c}.{a['format']}"
            path = os.path.join(a["out"], name)
            if a["format"] == "csv":
                with open(path, "w", newline="") as fh:
                    w = csv.writer(fh)
                    for row in m:
                        w.writerow([_fmt(v) for v in row])
            else:
                _write_pgm(m, path)
            written.append(name)
    print(f"wrote {len(written)} maps to {a['out']}")


def _write_pgm(m, path):
    lo, hi = float(m.min()), float(m.max())
    scale = (m - lo) / (hi - lo) if hi > lo else np.zeros_like(m)
    pix = np.rint(scale * 255).astype(int)
    with open(path, "w") as fh:
        fh.write(f"P2\n{m.shape[1]} {m.shape[0]}\n255\n")
        for row in pix:
            fh.write(" ".join(str(v) for v in row) + "\n")


def _default_rnn_task(seed):
    """Fixed sequence task: low-frequency sine input, mixed sine target."""
    freqs_in = presets._bank("rnn-in", *presets.FREQ_LOW)
    freqs_out = presets._bank("rnn-out", *presets.FREQ_HIGH)
    local = lambda fam: signals.BasisSpec(fam, "local")
    return proxy.RnnTaskConfig(
        input_spec=signals.RnnSignalSpec(
            bases=(local(signals.Sin1DBank(freqs_in)),),
            noise=signals.NoiseSpec("gaussian", 0.1),
        ),
        target_spec=signals.RnnSignalSpec(bases=(local(signals.Sin1DBank(freqs_out)),)),
    )


def cmd_rnn_rank(a):
    if not os.path.exists(a["bench"]):
        raise UserError(f"bench table not found: {a['bench']}")
    table = bench.BenchTable.load(a["bench"], validate_ids=False)
    ids = sorted(table.rows)
    genotypes = [rnn_space.RnnGenotype.from_canonical(i) for i in ids]
    task = _default_rnn_task(a["seed"])
    eval_seed = rngmod.spawn_seed(a["seed"], "proxy")
    losses = [proxy.train_regression_rnn(g, task, eval_seed) for g in genotypes]
    pred = np.array([-l for l in losses])
    gt = table.oriented(ids)
    rho = metrics.spearman_rho(pred, gt)
    tau = metrics.kendall_tau(pred, gt)
    with open(a["out"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "proxy_loss", "groundtruth"])
        for gid, l in zip(ids, losses):
            w.writerow([gid, _fmt(l), _fmt(table.rows[gid])])
    _write_json({"spearman_rho": rho, "kendall_tau": tau}, _stem(a["out"]) + "_summary.json")
    print(f"rho={rho:.4f} tau={tau:.4f}")


# --- argument parsing -------------------------------------------------------

_HANDLERS = {
    "gen-bench": cmd_gen_bench,
    "rank": cmd_rank,
    "task-search": cmd_task_search,
    "nas-search": cmd_nas_search,
    "eval-arch": cmd_eval_arch,
    "signals": cmd_signals,
    "rnn-rank": cmd_rnn_rank,
}


def _build_parser():
    p = argparse.ArgumentParser(prog="regnas", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("gen-bench", help="train sampled genotypes into a groundtruth table")
    sp.add_argument("--size", type=int, default=32)
    sp.add_argument("--out", required=True)
    sp.add_argument("--epochs", type=int, default=None)
    sp.add_argument("--n-train", type=int, default=None, dest="n_train")
    sp.add_argument("--n-test", type=int, default=None, dest="n_test")
    common(sp)

    sp = sub.add_parser("rank", help="proxy-score a bench table and report rank correlation")
    sp.add_argument("--task", required=True, help="preset name or task JSON path")
    sp.add_argument("--bench", required=True)
    sp.add_argument("--out", required=True)
    common(sp)

    sp = sub.add_parser("task-search", help="evolve proxy tasks against probe groundtruths")
    sp.add_argument("--bench", required=True)
    sp.add_argument("--probes", type=int, default=20)
    sp.add_argument("--population", "--P", type=int, default=50)
    sp.add_argument("--sample", "--S", type=int, default=10)
    sp.add_argument("--iterations", "--T", type=int, default=400)
    sp.add_argument("--out", required=True)
    sp.add_argument("--trace", default=None)
    sp.add_argument("--eval-iterations", type=int, default=None, dest="eval_iterations",
                    help="override sampled tasks' training iterations (cheap sweeps)")
    sp.add_argument("--eval-batch", type=int, default=None, dest="eval_batch")
    common(sp)

    sp = sub.add_parser("nas-search", help="evolve genotypes with the proxy as fitness")
    sp.add_argument("--task", required=True)
    sp.add_argument("--bench", required=True)
    sp.add_argument("--population", "--P", type=int, default=20)
    sp.add_argument("--sample", "--S", type=int, default=5)
    sp.add_argument("--iterations", "--T", type=int, default=30)
    sp.add_argument("--out", required=True)
    common(sp)

    sp = sub.add_parser("eval-arch", help="proxy-score a single genotype")
    sp.add_argument("--id", required=True)
    sp.add_argument("--task", required=True)
    sp.add_argument("--out", required=True)
    common(sp)

    sp = sub.add_parser("signals", help="dump realized target maps")
    sp.add_argument("--task", required=True)
    sp.add_argument("--dump", action="store_true")
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=("csv", "pgm"), default="pgm")
    sp.add_argument("--batch", type=int, default=2)
    sp.add_argument("--hw", type=int, default=32)
    sp.add_argument("--max-channels", type=int, default=4, dest="max_channels")
    common(sp)

    sp = sub.add_parser("rnn-rank", help="rank recurrent genotypes against an external table")
    sp.add_argument("--bench", required=True)
    sp.add_argument("--out", required=True)
    common(sp)

    sp = sub.add_parser("rerun", help="replay a previous run from its manifest")
    sp.add_argument("manifest")
    sp.add_argument("--jobs", type=int, default=None)

    return p


def _dispatch(command, args):
    t0 = time.time()
    _HANDLERS[command](args)
    _write_manifest(command, args, args["out"], t0)


def main(argv=None):
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.command == "rerun":
            try:
                with open(ns.manifest) as fh:
                    manifest = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise UserError(f"cannot read manifest: {exc}") from exc
            command, args = manifest.get("command"), manifest.get("config", {})
            if command not in _HANDLERS:
                raise UserError(f"manifest names unknown command {command!r}")
            if ns.jobs is not None:
                args = dict(args, jobs=ns.jobs)
            _dispatch(command, args)
        else:
            args = {k: v for k, v in vars(ns).items() if k != "command"}
            _dispatch(ns.command, args)
        return 0
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RegNasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - internal failure path
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
