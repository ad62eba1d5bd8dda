"""Batch CLI: augment image trees, build profiles, run simulations, serve.

Exit codes: 0 success, 1 usage error, 2 data error.  Set CURAUG_LOG to a
logging level name (DEBUG, INFO, ...) to control verbosity.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import tomli

from . import analysis, longtail
from .compose import apply_strength, sample_sequence, sequence_log_line
from .compose import apply_strength_ordered, ApplyOrder
from .curriculum import CurriculumConfig
from .image import load_png, save_png
from .levels import write_history_csv
from .longtail import read_profile_csv, write_profile_csv
from .rng import Stream
from .simlearner import SimLearnerParams, decile_means, run_dynamics

log = logging.getLogger("curaug.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="curaug", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_aug = sub.add_parser("augment", help="augment a directory of PNG files")
    p_aug.add_argument("in_dir", type=Path)
    p_aug.add_argument("out_dir", type=Path)
    group = p_aug.add_mutually_exclusive_group(required=True)
    group.add_argument("--strength", type=int, help="fixed strength for every file")
    group.add_argument(
        "--levels-csv",
        type=Path,
        help="per-class level CSV (class_id,level); needs --labels-csv",
    )
    p_aug.add_argument(
        "--labels-csv", type=Path, help="file-to-class CSV (filename,class_id)"
    )
    p_aug.add_argument("--seed", type=int, default=0)
    p_aug.add_argument("--threads", type=int, default=1)
    p_aug.add_argument("--manifest", type=Path, help="sequence-log output path")

    p_prof = sub.add_parser("profile", help="write a long-tailed class profile CSV")
    p_prof.add_argument("out_csv", type=Path)
    p_prof.add_argument("--kind", choices=["exp", "pareto"], default="exp")
    p_prof.add_argument("--classes", type=int, required=True)
    p_prof.add_argument("--n-max", type=int, required=True)
    p_prof.add_argument("--imbalance", type=float, help="exp profiles: N_max/N_min")
    p_prof.add_argument("--n-min", type=int, help="pareto profiles: tail count")
    p_prof.add_argument("--alpha", type=float, default=0.6)

    p_sub = sub.add_parser("subsample", help="select per-class sample ids for a profile")
    p_sub.add_argument("labels_csv", type=Path, help="CSV sample_id,class_id")
    p_sub.add_argument("profile_csv", type=Path)
    p_sub.add_argument("out_txt", type=Path)
    p_sub.add_argument("--seed", type=int, default=0)

    p_sim = sub.add_parser("simulate", help="run simulated level dynamics from a config")
    p_sim.add_argument("config", type=Path, help="TOML config file")
    p_sim.add_argument("out_csv", type=Path)
    p_sim.add_argument("--plot", type=Path, help="optional per-decile line chart PNG")
    p_sim.add_argument("--manifest", type=Path, help="optional run manifest JSON")

    p_ana = sub.add_parser("analyze", help="metrics over CSV inputs")
    ana_sub = p_ana.add_subparsers(dest="metric", required=True)
    a_w = ana_sub.add_parser("weight-variance")
    a_w.add_argument("weights_csv", type=Path)
    a_al = ana_sub.add_parser("alignment")
    a_al.add_argument("features_csv", type=Path)
    a_al.add_argument("out_csv", type=Path)
    a_gain = ana_sub.add_parser("alignment-gain")
    a_gain.add_argument("base_csv", type=Path)
    a_gain.add_argument("treated_csv", type=Path)
    a_gain.add_argument("out_csv", type=Path)
    a_acc = ana_sub.add_parser("accuracy")
    a_acc.add_argument("predictions_csv", type=Path, help="CSV prediction,label")
    a_acc.add_argument("profile_csv", type=Path)

    p_srv = sub.add_parser("serve", help="run the trainer sidecar protocol")
    mode = p_srv.add_mutually_exclusive_group(required=True)
    mode.add_argument("--stdio", action="store_true")
    mode.add_argument("--tcp", type=int, metavar="PORT")
    p_srv.add_argument("--host", default="127.0.0.1")
    return parser


# --- augment -------------------------------------------------------------------


def _load_levels(levels_csv: Path) -> dict[int, int]:
    with open(levels_csv, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["class_id", "level"]:
            raise DataError(f"{levels_csv}: expected header class_id,level")
        return {int(c): int(lv) for c, lv in reader}


def _load_file_labels(labels_csv: Path) -> dict[str, int]:
    with open(labels_csv, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["filename", "class_id"]:
            raise DataError(f"{labels_csv}: expected header filename,class_id")
        return {name: int(c) for name, c in reader}


def _augment_one(name: str, in_path: Path, out_path: Path, strength: int, master_seed: int):
    img = load_png(in_path)
    stream = Stream(master_seed, "file", name)
    seq = sample_sequence(strength, stream)
    out = apply_strength_ordered(img, seq, ApplyOrder.AS_DRAWN, stream)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_png(out, out_path)
    return sequence_log_line(name, seq)


def _cmd_augment(args) -> int:
    if not args.in_dir.is_dir():
        raise DataError(f"{args.in_dir} is not a directory")
    files = sorted(p.relative_to(args.in_dir) for p in args.in_dir.rglob("*.png"))
    if not files:
        raise DataError(f"no PNG files under {args.in_dir}")
    strengths: dict[str, int] = {}
    if args.levels_csv is not None:
        if args.labels_csv is None:
            raise DataError("--levels-csv requires --labels-csv")
        levels = _load_levels(args.levels_csv)
        file_labels = _load_file_labels(args.labels_csv)
        for rel in files:
            name = str(rel)
            if name not in file_labels:
                raise DataError(f"{name} missing from {args.labels_csv}")
            cls = file_labels[name]
            if cls not in levels:
                raise DataError(f"class {cls} missing from {args.levels_csv}")
            strengths[name] = levels[cls]
    else:
        if not 0 <= args.strength <= 30:
            raise DataError("--strength must lie in [0, 30]")
        strengths = {str(rel): args.strength for rel in files}

    args.out_dir.mkdir(parents=True, exist_ok=True)
    manifest_lines: list[str | None] = [None] * len(files)
    failures: list[tuple[str, str]] = []

    def work(i_rel):
        i, rel = i_rel
        name = str(rel)
        try:
            line = _augment_one(
                name, args.in_dir / rel, args.out_dir / rel, strengths[name], args.seed
            )
            manifest_lines[i] = line
        except Exception as exc:
            failures.append((name, f"{type(exc).__name__}: {exc}"))

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            list(pool.map(work, enumerate(files)))
    else:
        for pair in enumerate(files):
            work(pair)

    if args.manifest is not None:
        with open(args.manifest, "w") as fh:
            for line in manifest_lines:
                if line is not None:
                    fh.write(line + "\n")
    if failures:
        for name, why in sorted(failures):
            print(f"failed: {name}: {why}", file=sys.stderr)
        raise DataError(f"{len(failures)} of {len(files)} files failed")
    log.info("augmented %d files", len(files))
    return EXIT_OK


# --- profile / subsample --------------------------------------------------------


def _cmd_profile(args) -> int:
    try:
        if args.kind == "exp":
            if args.imbalance is None:
                raise DataError("exp profiles need --imbalance")
            profile = longtail.exp_profile(args.classes, args.n_max, args.imbalance)
        else:
            if args.n_min is None:
                raise DataError("pareto profiles need --n-min")
            profile = longtail.pareto_profile(
                args.classes, args.n_max, args.n_min, args.alpha
            )
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    write_profile_csv(profile, args.out_csv)
    return EXIT_OK


def _cmd_subsample(args) -> int:
    with open(args.labels_csv, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["sample_id", "class_id"]:
            raise DataError(f"{args.labels_csv}: expected header sample_id,class_id")
        rows = [(int(s), int(c)) for s, c in reader]
    rows.sort()
    if [s for s, _ in rows] != list(range(len(rows))):
        raise DataError("sample ids must cover 0..N-1")
    labels = [c for _, c in rows]
    profile = read_profile_csv(args.profile_csv)
    try:
        kept = longtail.subsample(labels, profile, Stream(args.seed, "subsample"))
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    with open(args.out_txt, "w") as fh:
        for sid in kept:
            fh.write(f"{sid}\n")
    return EXIT_OK


# --- simulate --------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    try:
        with open(args.config, "rb") as fh:
            conf = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise DataError(f"{args.config}: {exc}") from exc
    try:
        prof_conf = conf["profile"]
        if prof_conf.get("kind", "exp") == "exp":
            profile = longtail.exp_profile(
                prof_conf["classes"], prof_conf["n_max"], prof_conf["imbalance"]
            )
        else:
            profile = longtail.pareto_profile(
                prof_conf["classes"],
                prof_conf["n_max"],
                prof_conf["n_min"],
                prof_conf.get("alpha", 0.6),
            )
        cur = conf.get("curriculum", {})
        cfg = CurriculumConfig(
            augment_prob=cur.get("augment_prob", 0.5),
            threshold=cur.get("threshold", 0.6),
            probe_count=cur.get("probe_count", 10),
            epochs=cur.get("epochs", 100),
            seed=cur.get("seed", 0),
            auto_tune_threshold=cur.get("auto_tune_threshold", False),
        )
        lrn = conf.get("learner", {})
        params = SimLearnerParams.from_profile(
            profile,
            rate_scale=lrn.get("rate_scale", 0.004),
            difficulty=lrn.get("difficulty", 0.8),
            seed=cur.get("seed", 0),
        )
        cap = lrn.get("plan_samples_per_class", 4)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{args.config}: bad config: {exc}") from exc
    result = run_dynamics(profile, cfg, params, plan_samples_per_class=cap)
    write_history_csv(result.table, args.out_csv)
    if args.manifest is not None:
        with open(args.manifest, "w") as fh:
            json.dump(result.manifest, fh, indent=2)
    if args.plot is not None:
        _plot_deciles(result.history, args.plot)
    return EXIT_OK


def _plot_deciles(history, out_path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    epochs = range(1, len(history) + 1)
    series = list(zip(*[decile_means(snap) for snap in history]))
    fig, ax = plt.subplots(figsize=(7, 4))
    for d, ys in enumerate(series):
        ax.plot(epochs, ys, label=f"decile {d}", linewidth=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean level")
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


# --- analyze ---------------------------------------------------------------------


def _cmd_analyze(args) -> int:
    try:
        if args.metric == "weight-variance":
            w = analysis.read_weights_csv(args.weights_csv)
            print(f"{analysis.weight_norm_variance(w):.12g}")
        elif args.metric == "alignment":
            feats, labels = analysis.read_features_csv(args.features_csv)
            result = analysis.feature_alignment(feats, labels)
            with open(args.out_csv, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["class_id", "alignment"])
                for c in sorted(result.values):
                    writer.writerow([c, f"{result.values[c]:.12g}"])
            for c in result.skipped:
                print(f"warning: class {c} has < 2 samples, omitted", file=sys.stderr)
        elif args.metric == "alignment-gain":
            base = _read_alignment_csv(args.base_csv)
            treated = _read_alignment_csv(args.treated_csv)
            gains = analysis.alignment_gain(base, treated)
            with open(args.out_csv, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["class_id", "gain"])
                for c, g in gains.items():
                    writer.writerow([c, f"{g:.12g}"])
        else:  # accuracy
            with open(args.predictions_csv, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                if header != ["prediction", "label"]:
                    raise DataError("expected header prediction,label")
                rows = [(int(p), int(t)) for p, t in reader]
            profile = read_profile_csv(args.profile_csv)
            masks = longtail.categorize(profile)
            preds = [p for p, _ in rows]
            labels = [t for _, t in rows]
            out = analysis.accuracy_breakdown(preds, labels, masks)
            print(json.dumps(out, sort_keys=True))
    except (ValueError, OSError) as exc:
        raise DataError(str(exc)) from exc
    return EXIT_OK


def _read_alignment_csv(path: Path) -> dict[int, float]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["class_id", "alignment"]:
            raise DataError(f"{path}: expected header class_id,alignment")
        return {int(c): float(v) for c, v in reader}


# --- serve -----------------------------------------------------------------------


def _cmd_serve(args) -> int:
    from . import service

    if args.stdio:
        service.serve_stdio()
    else:
        service.serve_tcp(args.host, args.tcp)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CURAUG_LOG", "WARNING").upper())
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "augment": _cmd_augment,
        "profile": _cmd_profile,
        "subsample": _cmd_subsample,
        "simulate": _cmd_simulate,
        "analyze": _cmd_analyze,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
