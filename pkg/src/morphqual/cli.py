"""Command-line surface: batch scoring, analytics, and report emission.

Exit codes: 0 success, 1 usage error, 2 input error, 3 partial success
(lenient mode). All CSV outputs start with `#` comment lines carrying the
tool version, a config hash, and the polarity-registry hash; loaders skip
them, reruns with unchanged inputs are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .core import (
    DatasetManifest,
    EstimatorRegistry,
    ScoreTable,
    default_registry,
    summarize,
)
from .brisque import default_model, score as brisque_score
from .brisque.model import load_model
from .ingest import (
    CoverageBelowFloor,
    IngestError,
    dump_manifest,
    dump_scores,
    join,
    load_image,
    load_manifest,
    load_scores,
)
from .madeval import MEAN_ATTACK, cross_eval, intra_eval
from .stats import Tail, fdr, kde, overlap_matrix
from .svg import curve_panel, heatmap
from .synth import generate, load_spec, spec_estimators

USAGE_ERROR, INPUT_ERROR, PARTIAL = 1, 2, 3


class InputError(click.ClickException):
    exit_code = INPUT_ERROR


def _config_hash(**params) -> str:
    blob = json.dumps(params, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _write_csv(path: Path, header: list[str], rows: list[list[str]],
               registry: EstimatorRegistry, **config) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# morphqual {__version__}\n")
        fh.write(f"# config {_config_hash(**config)}\n")
        fh.write(f"# registry {registry.content_hash()}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _load_inputs(manifest_paths, score_paths, registry):
    manifests: list[DatasetManifest] = []
    image_paths: list[dict[str, Path]] = []
    try:
        for mp in manifest_paths:
            manifest, paths = load_manifest(mp)
            manifests.append(manifest)
            image_paths.append(paths)
        merged: dict[str, dict[str, float]] = {}
        for sp in score_paths:
            for table in load_scores(sp, registry):
                bucket = merged.setdefault(table.estimator.name, {})
                for sid, value in table.entries.items():
                    if sid in bucket and bucket[sid] != value:
                        raise InputError(f"conflicting scores for sample {sid!r} "
                                         f"({table.estimator.name})")
                    bucket[sid] = value
        tables = [ScoreTable(registry.get(name), entries)
                  for name, entries in sorted(merged.items())]
    except IngestError as exc:
        raise InputError(str(exc)) from exc
    return manifests, image_paths, tables


def _populations(manifest: DatasetManifest, table: ScoreTable, floor: float):
    matched = set(join(manifest, table, floor).matched)
    bona = [table.entries[s] for s in manifest.bona_fide_ids() if s in matched]
    attacks = {at: [table.entries[s] for s in manifest.attack_ids(at) if s in matched]
               for at in manifest.attack_types}
    return bona, attacks


manifest_opt = click.option("--manifest", "manifests", multiple=True, required=True,
                            type=click.Path(dir_okay=False))
scores_opt = click.option("--scores", "score_files", multiple=True, required=True,
                          type=click.Path(dir_okay=False))
out_opt = click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
strict_opt = click.option("--strict/--lenient", "strict", default=True,
                          help="Fail on any missing/undecodable input vs. continue.")


@click.group()
@click.version_option(__version__)
def cli() -> None:
    """Quality-measure based morphing attack detection evaluation."""


@cli.command("score")
@manifest_opt
@click.option("--model", "model_path", type=click.Path(dir_okay=False))
@out_opt
@strict_opt
@click.option("--threads", default=1, show_default=True)
def cmd_score(manifests, model_path, out_dir, strict, threads) -> int | None:
    """Score every manifest image with the built-in pixel-level estimator."""
    registry = default_registry()
    loaded, image_paths, _ = _load_inputs(manifests, [], registry)
    model = load_model(model_path) if model_path else default_model()

    work: list[tuple[str, Path]] = []
    for paths in image_paths:
        work.extend(paths.items())
    work.sort(key=lambda kv: kv[0])

    def score_one(item):
        sid, path = item
        try:
            return sid, brisque_score(load_image(path), model), None
        except (IngestError, ValueError) as exc:
            return sid, None, str(exc)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(score_one, work))

    failures = [(sid, err) for sid, _, err in results if err]
    if failures and strict:
        for sid, err in failures[:10]:
            click.echo(f"error: {sid}: {err}", err=True)
        raise InputError(f"{len(failures)} of {len(results)} images failed to score")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [[ "brisque", sid, repr(value)] for sid, value, err in results if err is None]
    _write_csv(out / "scores.csv", ["estimator", "sample_id", "score"], rows,
               registry, command="score", model=model_path or "builtin")
    if failures:
        for sid, err in failures:
            click.echo(f"warning: skipped {sid}: {err}", err=True)
        return PARTIAL
    return None


@cli.command("separability")
@manifest_opt
@scores_opt
@out_opt
@strict_opt
def cmd_separability(manifests, score_files, out_dir, strict) -> None:
    """Per (dataset, attack, estimator) separability between attack and bona
    fide score distributions."""
    registry = default_registry()
    loaded, _, tables = _load_inputs(manifests, score_files, registry)
    floor = 1.0 if strict else 0.0
    rows = []
    try:
        for manifest in loaded:
            for table in tables:
                bona, attacks = _populations(manifest, table, floor)
                bona_summary = summarize(bona)
                for attack_type in sorted(attacks):
                    value = fdr(summarize(attacks[attack_type]), bona_summary)
                    rows.append([manifest.dataset_name, attack_type,
                                 table.estimator.name, repr(value)])
    except (IngestError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    _write_csv(Path(out_dir) / "fdr.csv",
               ["dataset", "attack_type", "estimator", "fdr"], rows,
               registry, command="separability")


@cli.command("eer")
@manifest_opt
@scores_opt
@out_opt
@strict_opt
def cmd_eer(manifests, score_files, out_dir, strict) -> None:
    """Intra-dataset equal error rates plus the per-estimator mean row."""
    registry = default_registry()
    loaded, _, tables = _load_inputs(manifests, score_files, registry)
    try:
        report = intra_eval(loaded, tables, registry,
                            coverage_floor=1.0 if strict else 0.0)
    except (IngestError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    # mark, per (dataset, attack) cell, the estimator with the lowest EER
    best: dict[tuple[str, str], float] = {}
    for r in report.rows:
        if r.attack_type == MEAN_ATTACK:
            continue
        key = (r.eval_dataset, r.attack_type)
        best[key] = min(best.get(key, float("inf")), r.eer)
    rows = []
    for r in report.rows:
        marker = ""
        if r.attack_type != MEAN_ATTACK:
            marker = "1" if r.eer == best[(r.eval_dataset, r.attack_type)] else "0"
        rows.append([r.estimator, r.eval_dataset, r.attack_type,
                     "" if r.threshold is None else repr(r.threshold),
                     repr(r.eer), marker])
    _write_csv(Path(out_dir) / "eer.csv",
               ["estimator", "dataset", "attack_type", "threshold", "eer", "min_per_row"],
               rows, registry, command="eer")


@cli.command("crosseval")
@manifest_opt
@scores_opt
@out_opt
@strict_opt
@click.option("--target-bpcer", default=0.2, show_default=True)
def cmd_crosseval(manifests, score_files, out_dir, strict, target_bpcer) -> None:
    """Threshold-transfer matrices: BPCER, APCER, ACER plus mean ACER."""
    if not 0.0 < target_bpcer < 1.0:
        raise click.UsageError("--target-bpcer must be in (0, 1)")
    registry = default_registry()
    loaded, _, tables = _load_inputs(manifests, score_files, registry)
    try:
        report = cross_eval(loaded, tables, registry, target_bpcer,
                            coverage_floor=1.0 if strict else 0.0)
    except (IngestError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    out = Path(out_dir)
    csv_rows = report.to_csv_rows()
    _write_csv(out / "crosseval_long.csv", csv_rows[0], csv_rows[1:],
               registry, command="crosseval", target_bpcer=target_bpcer)

    cells = [r for r in report.rows if r.attack_type != MEAN_ATTACK]
    datasets = sorted({r.eval_dataset for r in cells})
    attacks = sorted({(r.eval_dataset, r.attack_type) for r in cells})
    estimators = sorted({r.estimator for r in cells})
    sources = sorted({r.source_dataset for r in cells})

    bp_rows, ap_rows, ac_rows = [], [], []
    for est in estimators:
        for src in sources:
            sel = {(r.eval_dataset, r.attack_type): r for r in cells
                   if r.estimator == est and r.source_dataset == src}
            by_ds = {r.eval_dataset: r for r in sel.values()}
            bp_rows.append([est, src] + [repr(by_ds[d].bpcer) for d in datasets])
            ap_rows.append([est, src] + [repr(sel[key].apcer) for key in attacks])
            mean_row = next(r for r in report.rows
                            if r.estimator == est and r.source_dataset == src
                            and r.attack_type == MEAN_ATTACK)
            ac_rows.append([est, src] + [repr(sel[key].acer) for key in attacks]
                           + [repr(mean_row.acer)])

    _write_csv(out / "bpcer_wide.csv", ["estimator", "source"] + datasets, bp_rows,
               registry, command="crosseval", target_bpcer=target_bpcer, matrix="bpcer")
    attack_cols = [f"{d}:{a}" for d, a in attacks]
    _write_csv(out / "apcer_wide.csv", ["estimator", "source"] + attack_cols, ap_rows,
               registry, command="crosseval", target_bpcer=target_bpcer, matrix="apcer")
    _write_csv(out / "acer_wide.csv", ["estimator", "source"] + attack_cols + ["mean"],
               ac_rows, registry, command="crosseval", target_bpcer=target_bpcer,
               matrix="acer")


@cli.command("distributions")
@manifest_opt
@scores_opt
@out_opt
@strict_opt
@click.option("--grid", "grid_points", default=512, show_default=True)
def cmd_distributions(manifests, score_files, out_dir, strict, grid_points) -> None:
    """Kernel density estimates of score populations: per-dataset attack vs
    bona fide panels and a cross-dataset bona-fide-only panel."""
    registry = default_registry()
    loaded, _, tables = _load_inputs(manifests, score_files, registry)
    floor = 1.0 if strict else 0.0
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        for table in tables:
            est = table.estimator.name
            bona_curves = []
            for manifest in loaded:
                bona, attacks = _populations(manifest, table, floor)
                curves = [("bonafide", kde(bona, grid_points))]
                curves += [(at, kde(attacks[at], grid_points)) for at in sorted(attacks)]
                for label, curve in curves:
                    rows = [[repr(float(g)), repr(float(d))]
                            for g, d in zip(curve.grid, curve.density)]
                    name = f"kde_{est}_{manifest.dataset_name}_{label}"
                    _write_csv(out / f"{name}.csv", ["grid", "density"], rows, registry,
                               command="distributions", grid=grid_points,
                               bandwidth=curve.bandwidth, rule=curve.bandwidth_rule)
                curve_panel(
                    [(lbl, list(c.grid), list(c.density)) for lbl, c in curves],
                    f"{est} / {manifest.dataset_name}",
                    out / f"kde_{est}_{manifest.dataset_name}.svg",
                )
                bona_curves.append((manifest.dataset_name, curves[0][1]))
            curve_panel(
                [(lbl, list(c.grid), list(c.density)) for lbl, c in bona_curves],
                f"{est} / bona fide across datasets",
                out / f"kde_{est}_bonafide_all.svg",
            )
    except (IngestError, ValueError) as exc:
        raise InputError(str(exc)) from exc


@cli.command("overlap")
@manifest_opt
@scores_opt
@out_opt
@strict_opt
@click.option("--fraction", default=0.1, show_default=True)
def cmd_overlap(manifests, score_files, out_dir, strict, fraction) -> None:
    """Top/bottom quality-tail overlap between estimators, per attack set."""
    if not 0.0 < fraction <= 0.5:
        raise click.UsageError("--fraction must be in (0, 0.5]")
    registry = default_registry()
    loaded, _, tables = _load_inputs(manifests, score_files, registry)
    floor = 1.0 if strict else 0.0
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        for manifest in loaded:
            for attack_type in manifest.attack_types:
                ids = manifest.attack_ids(attack_type)
                sub = []
                for table in tables:
                    matched = set(join(manifest, table, floor).matched)
                    keep = {s: table.entries[s] for s in ids if s in matched}
                    sub.append(ScoreTable(table.estimator, keep))
                for tail in (Tail.TOP, Tail.BOTTOM):
                    matrix = overlap_matrix(sub, fraction, tail)
                    rows = [[matrix.estimators[i]]
                            + [repr(float(v)) for v in matrix.ratios[i]]
                            for i in range(len(matrix.estimators))]
                    name = f"overlap_{manifest.dataset_name}_{attack_type}_{tail.value}"
                    _write_csv(out / f"{name}.csv",
                               ["estimator"] + list(matrix.estimators), rows,
                               registry, command="overlap", fraction=fraction,
                               tail=tail.value)
                    heatmap(list(matrix.estimators),
                            [[float(v) for v in row] for row in matrix.ratios],
                            f"{manifest.dataset_name} / {attack_type} / {tail.value}",
                            out / f"{name}.svg")
    except (IngestError, ValueError) as exc:
        raise InputError(str(exc)) from exc


@cli.command("synth")
@click.option("--spec", "spec_path", required=True,
              type=click.Path(dir_okay=False))
@out_opt
def cmd_synth(spec_path, out_dir) -> None:
    """Generate a synthetic fixture directory from a JSON spec."""
    registry = default_registry()
    try:
        specs = load_spec(spec_path)
        estimators = spec_estimators(spec_path, registry)
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"{spec_path}: {exc}") from exc
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    all_tables = []
    for spec in specs:
        manifest = None
        for desc in estimators:
            manifest, table = generate(spec, desc)
            all_tables.append(table)
        dump_manifest(manifest, {}, out / f"{spec.dataset_name}.manifest.csv")
    dump_scores(all_tables, out / "scores.csv")
    meta = {"rng": "numpy-pcg64", "spec": Path(spec_path).name,
            "estimators": [d.name for d in estimators]}
    (out / "fixture.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                      encoding="utf-8")


@cli.command("validate")
@manifest_opt
@scores_opt
@strict_opt
def cmd_validate(manifests, score_files, strict) -> None:
    """Check manifests and score files parse and cover each other."""
    registry = default_registry()
    loaded, _, tables = _load_inputs(manifests, score_files, registry)
    floor = 1.0 if strict else 0.0
    problems = 0
    for manifest in loaded:
        for table in tables:
            try:
                report = join(manifest, table, floor)
            except CoverageBelowFloor as exc:
                click.echo(f"FAIL {exc}")
                problems += 1
                continue
            click.echo(f"ok {manifest.dataset_name} x {table.estimator.name}: "
                       f"coverage {report.coverage:.4f} "
                       f"({len(report.matched)} matched, "
                       f"{len(report.manifest_only)} manifest-only, "
                       f"{len(report.score_only)} score-only)")
    if problems:
        raise InputError(f"{problems} dataset/estimator pairs below coverage floor")


def main(argv: list[str] | None = None) -> int:
    try:
        result = cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return USAGE_ERROR
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return USAGE_ERROR
    return int(result) if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
