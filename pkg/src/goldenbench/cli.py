"""Command-line front end.

Subcommands: validate, wer, secs, mos, dtw, correlate, fuse-check, report.
Exit codes: 0 success, 1 data or metric error, 2 usage error.  Outputs are
deterministic given identical inputs, flags, and seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analytics, corpus, fusion, intelligibility, reporting, similarity
from .alignment import DtwConfig, LocalMetric, batch_dtw, zscore_sequences
from .corpus import CorpusManifest, EmbeddingSequence, Role
from .errors import MetricError, ToolkitError

ROLE_ORDER = (Role.ORIGINAL, Role.L1, Role.GOLDEN)


def _default_workers() -> int:
    raw = os.environ.get("GOLDENBENCH_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_bytes(text.encode("utf-8"))


def _emit(args, headers: list[str], rows: list[list[str]], records: list[dict]) -> None:
    if args.format == "csv":
        text = reporting.render_csv(headers, rows)
    elif args.format == "records":
        text = reporting.render_records(records)
    else:
        text = reporting.render_table(headers, rows)
    _write_output(text, args.out)


def _load_manifest(args) -> tuple[CorpusManifest, Path]:
    path = Path(args.manifest)
    manifest = corpus.parse_manifest_file(path)
    if getattr(args, "scores", None):
        manifest = corpus.merge_scores(manifest, corpus.parse_manifest_file(args.scores))
    return manifest, path.parent


def _embedding_reader(base_dir: Path):
    cache: dict[str, EmbeddingSequence] = {}

    def read(relpath: str) -> EmbeddingSequence:
        if relpath not in cache:
            cache[relpath] = corpus.read_embedding_file(base_dir / relpath)
        return cache[relpath]

    return read


def _policy(args) -> intelligibility.NormalizationPolicy:
    return intelligibility.NormalizationPolicy(
        lowercase=not args.no_lowercase,
        strip_punctuation=not args.keep_punctuation,
        collapse_whitespace=not args.no_collapse_whitespace,
    )


def _add_norm_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-lowercase", action="store_true", help="keep original casing")
    p.add_argument("--keep-punctuation", action="store_true", help="keep punctuation characters")
    p.add_argument("--no-collapse-whitespace", action="store_true", help="keep whitespace runs")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("table", "csv", "records"), default="table")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    manifest, base = _load_manifest(args)
    report = corpus.validate_corpus(manifest, corpus.dir_asset_lookup(base))
    for locator, message in report.errors:
        print(f"ERROR {locator}: {message}")
    for locator, message in report.warnings:
        print(f"WARN {locator}: {message}")
    print(f"{len(report.errors)} errors, {len(report.warnings)} warnings")
    return 0 if report.ok else 1


def cmd_wer(args) -> int:
    manifest, _ = _load_manifest(args)
    policy = _policy(args)
    role = Role.parse(args.role)
    rate = intelligibility.corpus_wer(manifest, role, policy, macro=args.macro)
    wer_pct = 100.0 * rate
    record = {"metric": "wer", "role": role.value, "wer_percent": round(wer_pct, 6)}
    if args.werr_baseline:
        baseline_role = Role.parse(args.werr_baseline)
        baseline = 100.0 * intelligibility.corpus_wer(manifest, baseline_role, policy, macro=args.macro)
        reduction = intelligibility.werr(baseline, wer_pct)
        cell = f"{wer_pct:.2f} ({reduction:.2f})"
        record["werr_percent"] = round(reduction, 6)
        record["baseline_role"] = baseline_role.value
        record["baseline_wer_percent"] = round(baseline, 6)
    else:
        cell = f"{wer_pct:.2f}"
    _emit(args, ["role", "WER (WERR%)"], [[role.value, cell]], [record])
    return 0


def cmd_secs(args) -> int:
    manifest, base = _load_manifest(args)
    role = Role.parse(args.role)
    sets = similarity.collect_embedding_sets(manifest, _embedding_reader(base), role)
    report = similarity.secs_report(sets, exclude_diagonal=args.exclude_diagonal)
    headers = ["role", "SECS utt", "SECS spk"]
    rows = [[role.value, reporting.fmt(report.corpus_utt, 2), reporting.fmt(report.corpus_spk, 2)]]
    records = [
        {
            "metric": "secs",
            "role": role.value,
            "utt": round(report.corpus_utt, 6),
            "spk": round(report.corpus_spk, 6),
        }
    ]
    if args.per_speaker:
        headers = ["speaker", "SECS utt", "SECS spk"]
        rows = []
        records = []
        for sid in sorted(report.per_speaker_utt):
            utt, spk = report.per_speaker_utt[sid], report.per_speaker_spk[sid]
            rows.append([sid, reporting.fmt(utt, 2), reporting.fmt(spk, 2)])
            records.append(
                {"metric": "secs", "speaker": sid, "utt": round(utt, 6), "spk": round(spk, 6)}
            )
        rows.append(["(corpus)", reporting.fmt(report.corpus_utt, 2), reporting.fmt(report.corpus_spk, 2)])
        records.append(
            {
                "metric": "secs",
                "speaker": None,
                "utt": round(report.corpus_utt, 6),
                "spk": round(report.corpus_spk, 6),
            }
        )
    _emit(args, headers, rows, records)
    return 0


def cmd_mos(args) -> int:
    manifest, _ = _load_manifest(args)
    role = Role.parse(args.role)
    value = analytics.mos_mean(manifest, role)
    _emit(
        args,
        ["role", "MOS"],
        [[role.value, reporting.fmt(value, 2)]],
        [{"metric": "mos", "role": role.value, "value": round(value, 6)}],
    )
    return 0


def _dtw_config(args) -> DtwConfig:
    return DtwConfig(
        local_metric=LocalMetric(args.metric),
        normalize_by_path_length=not args.raw_cost,
        band_radius=args.band,
    )


def cmd_dtw(args) -> int:
    manifest, base = _load_manifest(args)
    role = Role.parse(args.role)
    if role is Role.ORIGINAL:
        raise MetricError("dtw compares a synthesized role against originals; pick golden or l1")
    read = _embedding_reader(base)
    pairs_meta = corpus.paired_utterances(manifest, role)
    if not pairs_meta:
        raise MetricError(f"no utterances with role {role.value!r}")

    sequences: dict[str, EmbeddingSequence] = {}
    for orig, synth in pairs_meta:
        for u in (orig, synth):
            if u.frame_embedding_path is None:
                raise MetricError(f"utterance {u.utterance_id!r} has no frame embedding")
            sequences.setdefault(u.frame_embedding_path, read(u.frame_embedding_path))
    if args.zscore:
        paths = list(sequences)
        transformed = zscore_sequences([sequences[p] for p in paths])
        sequences = dict(zip(paths, transformed))

    pairs = [
        (sequences[orig.frame_embedding_path], sequences[synth.frame_embedding_path])
        for orig, synth in pairs_meta
    ]
    results = batch_dtw(pairs, _dtw_config(args), workers=args.workers)
    rows = [
        analytics.DtwRow(
            utterance_id=synth.utterance_id,
            speaker_id=synth.speaker_id,
            pair_id=synth.pair_id,
            cost=res.cost,
            path_length=res.path_length,
            normalized_cost=res.normalized_cost,
        )
        for (orig, synth), res in zip(pairs_meta, results)
    ]
    text = analytics.write_dtw_rows(rows)
    if args.out:
        _write_output(text, args.out)
        print(f"{len(rows)} pairs written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_correlate(args) -> int:
    manifest, _ = _load_manifest(args)
    rows = analytics.read_dtw_rows(Path(args.dtw).read_text(encoding="utf-8"))
    series, pcc = analytics.correlate_corpus(
        manifest,
        rows,
        args.score,
        per_speaker=(args.mode == "speaker"),
        use_normalized=not args.raw_cost,
    )
    print(f"PCC: {pcc:.3f}")
    score_cost = list(zip(series.ys, series.xs))
    boxes = analytics.group_quartiles(score_cost, bucket_width=args.bucket_width)
    headers = ["group", "count", "min", "q1", "median", "q3", "max"]
    table_rows = []
    records = [{"metric": "pcc", "score": args.score, "mode": args.mode, "value": round(pcc, 6)}]
    for b in boxes:
        table_rows.append(
            [
                f"{b.group_key:g}",
                str(b.count),
                reporting.fmt(b.min, 4),
                reporting.fmt(b.q1, 4),
                reporting.fmt(b.median, 4),
                reporting.fmt(b.q3, 4),
                reporting.fmt(b.max, 4),
            ]
        )
        records.append(
            {
                "metric": "box",
                "group": b.group_key,
                "count": b.count,
                "min": round(b.min, 6),
                "q1": round(b.q1, 6),
                "median": round(b.median, 6),
                "q3": round(b.q3, 6),
                "max": round(b.max, 6),
            }
        )
    _emit(args, headers, table_rows, records)
    return 0


def cmd_fuse_check(args) -> int:
    mechanisms = (
        [fusion.Mechanism(args.mechanism)]
        if args.mechanism != "all"
        else [fusion.Mechanism.ADD, fusion.Mechanism.ATT, fusion.Mechanism.GATE, fusion.Mechanism.CAT]
    )
    frames_syn = args.frames_syn if args.frames_syn is not None else args.frames
    all_pass = True
    for mech in mechanisms:
        params = fusion.init_params(mech, args.dim, n_heads=args.heads, seed=args.seed)
        h_org, h_syn = fusion.random_inputs(args.frames, frames_syn, args.dim, seed=args.seed + 1)
        report = fusion.grad_check(params, h_org, h_syn, tolerance=args.tolerance, step=args.step)
        status = "PASS" if report.passed else "FAIL"
        print(
            f"{mech.value:<5} max_rel={report.max_rel_error:.3e} "
            f"max_abs={report.max_abs_error:.3e} worst={report.worst_coordinate or '-'} {status}"
        )
        all_pass = all_pass and report.passed
    return 0 if all_pass else 1


def cmd_report(args) -> int:
    manifest, base = _load_manifest(args)
    policy = _policy(args)
    read = _embedding_reader(base)
    baseline_role = Role.parse(args.baseline_role)
    present = [r for r in ROLE_ORDER if manifest.with_role(r)]
    if not present:
        raise MetricError("manifest contains no utterances")

    try:
        baseline_wer = 100.0 * intelligibility.corpus_wer(manifest, baseline_role, policy)
    except MetricError:
        baseline_wer = None

    headers = ["role", "WER (WERR%)", "SECS utt", "SECS spk", "MOS"]
    rows = []
    records = []
    for role in present:
        record: dict = {"metric": "report", "role": role.value}
        try:
            wer_pct = 100.0 * intelligibility.corpus_wer(manifest, role, policy)
        except MetricError:
            wer_cell = "-"
        else:
            record["wer_percent"] = round(wer_pct, 6)
            wer_cell = f"{wer_pct:.2f} (-)"
            if role is not baseline_role and baseline_wer is not None:
                try:
                    reduction = intelligibility.werr(baseline_wer, wer_pct)
                except MetricError:
                    pass  # zero baseline: WER stands, reduction undefined
                else:
                    wer_cell = f"{wer_pct:.2f} ({reduction:.2f})"
                    record["werr_percent"] = round(reduction, 6)
        try:
            sets = similarity.collect_embedding_sets(manifest, read, role)
            secs = similarity.secs_report(sets)
            utt_cell = reporting.fmt(secs.corpus_utt, 2)
            spk_cell = reporting.fmt(secs.corpus_spk, 2)
            record["secs_utt"] = round(secs.corpus_utt, 6)
            record["secs_spk"] = round(secs.corpus_spk, 6)
        except (MetricError, ToolkitError):
            utt_cell = spk_cell = "-"
        try:
            mos = analytics.mos_mean(manifest, role)
            mos_cell = reporting.fmt(mos, 2)
            record["mos"] = round(mos, 6)
        except MetricError:
            mos_cell = "-"
        rows.append([role.value, wer_cell, utt_cell, spk_cell, mos_cell])
        records.append(record)
    _emit(args, headers, rows, records)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goldenbench",
        description="Corpus evaluation for synthesized golden speech: intelligibility, "
        "speaker similarity, naturalness aggregation, warp-cost correlation, and "
        "fusion gradient checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def data_command(name: str, help_text: str, scores: bool = False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--manifest", required=True, help="corpus manifest (.manifest.jsonl)")
        if scores:
            p.add_argument("--scores", default=None, help="standalone speaker-scores file")
        return p

    p = data_command("validate", "check corpus consistency and referenced assets", scores=True)
    p.set_defaults(func=cmd_validate)

    p = data_command("wer", "pooled corpus WER for a role, optionally with WERR")
    p.add_argument("--role", required=True)
    p.add_argument("--werr-baseline", default=None, metavar="ROLE")
    p.add_argument("--macro", action="store_true", help="per-utterance mean instead of pooled")
    _add_norm_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_wer)

    p = data_command("secs", "speaker-embedding cosine similarity (utt and spk)")
    p.add_argument("--role", default=Role.GOLDEN.value, help="role compared against originals")
    p.add_argument(
        "--exclude-diagonal",
        action="store_true",
        help="drop same-index pairs from the spk metric (normalizer U*(U-1))",
    )
    p.add_argument("--per-speaker", action="store_true")
    _add_output_flags(p)
    p.set_defaults(func=cmd_secs)

    p = data_command("mos", "mean of ingested MOS values for a role")
    p.add_argument("--role", required=True)
    _add_output_flags(p)
    p.set_defaults(func=cmd_mos)

    p = data_command("dtw", "warp costs of a synthesized role against originals")
    p.add_argument("--role", default=Role.GOLDEN.value)
    p.add_argument("--out", default=None, help="records file for per-pair results")
    p.add_argument("--metric", choices=[m.value for m in LocalMetric], default="euclidean")
    p.add_argument("--band", type=int, default=None, help="warping band radius")
    p.add_argument("--raw-cost", action="store_true", help="skip path-length normalization downstream")
    p.add_argument("--zscore", action="store_true", help="standardize dims over the corpus first")
    p.add_argument("--workers", type=int, default=_default_workers())
    p.set_defaults(func=cmd_dtw)

    p = data_command("correlate", "correlate warp costs with proficiency scores", scores=True)
    p.add_argument("--dtw", required=True, help="records file produced by the dtw subcommand")
    p.add_argument("--score", required=True, help="score name, e.g. total or toefl")
    p.add_argument("--mode", choices=("speaker", "utterance"), default="speaker")
    p.add_argument("--raw-cost", action="store_true", help="use raw instead of normalized cost")
    p.add_argument("--bucket-width", type=float, default=None, help="bucket scores by width")
    _add_output_flags(p)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("fuse-check", help="gradient-check the fusion mechanisms")
    p.add_argument("--mechanism", choices=("add", "att", "gate", "cat", "all"), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--frames", type=int, default=4)
    p.add_argument("--frames-syn", type=int, default=None, help="synthesized frame count (default: --frames)")
    p.add_argument("--heads", type=int, default=2)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--step", type=float, default=1e-5)
    p.set_defaults(func=cmd_fuse_check)

    p = data_command("report", "full corpus report: WER (WERR%), SECS, MOS per role", scores=True)
    p.add_argument("--baseline-role", default=Role.ORIGINAL.value)
    _add_norm_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_report)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> int:
    return run()


if __name__ == "__main__":
    sys.exit(main())
