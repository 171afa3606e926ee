"""``ttseval`` batch commands.

Exit codes: 0 success, 1 per-utterance errors present, 2 configuration/IO abort.
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
import dataclasses
from functools import partial
import logging
import os
from pathlib import Path
import sys
from urllib.parse import quote

from . import __version__
from .corpus import Manifest, load_config, load_manifest, pair_utterances, save_manifest
from .errors import ConfigError, InvalidRating, IoFailure, TooFewRatings, TtsEvalError
from .metrics import mos_summary
from .pipeline import describe, dump_features, score_pair, score_text, vocode_dump
from .report import finish, metric_aggregate, new_report, pooled_cer, write_report

log = logging.getLogger("ttseval")

EXIT_OK, EXIT_ERRORS, EXIT_ABORT = 0, 1, 2


def default_workers():
    try:
        return max(1, int(os.environ.get("TTSEVAL_WORKERS", "1")))
    except ValueError:
        return 1


def run_jobs(fn, items, workers=1):
    """Map ``fn`` over ``items`` preserving input order, optionally in worker processes."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _file_stem(utt_id):
    return quote(utt_id, safe="-_.") or "_"


def exit_status(report):
    return EXIT_ERRORS if report["status"] != "ok" else EXIT_OK


def cmd_eval(ref_manifest, gen_manifest, config=None, out_dir=None, workers=1,
             ref_text=None, hyp_text=None, system=None):
    cfg = config if config is not None else load_config()
    ref = load_manifest(ref_manifest, "audio")
    gen = load_manifest(gen_manifest, "audio")
    pairing = pair_utterances(ref, gen)

    texts = {}
    if "cer" in cfg.metrics and (ref_text or hyp_text):
        if not (ref_text and hyp_text):
            raise ConfigError("CER needs both --ref-text and --hyp-text")
        rt, ht = load_manifest(ref_text, "text"), load_manifest(hyp_text, "text")
        for p in pairing.pairs:
            if p.utterance_id in rt and p.utterance_id in ht:
                texts[p.utterance_id] = (rt[p.utterance_id], ht[p.utterance_id])
            else:
                texts[p.utterance_id] = f"MissingTranscript: no reference/hypothesis text for {p.utterance_id!r}"
    elif "cer" in cfg.metrics:
        log.info("no transcripts given; CER stage skipped")

    stages = [s for s in cfg.stages if s != "cer" or texts]
    report = new_report(
        "eval",
        cfg.to_dict(),
        system=system or Path(gen_manifest).stem,
        stages=stages,
        missing_in_gen=pairing.missing_in_gen,
        missing_in_ref=pairing.missing_in_ref,
    )
    items = [(p, texts.get(p.utterance_id)) for p in pairing.pairs]
    records = run_jobs(partial(score_pair, cfg=cfg), items, workers)
    report["aggregates"] = {
        "mcd": metric_aggregate(records, "mcd", "dB") if "mcd" in cfg.metrics else None,
        "f0_rmse": metric_aggregate(records, "f0_rmse", "log Hz") if "f0_rmse" in cfg.metrics else None,
        "cer": pooled_cer(records) if "cer" in stages else None,
    }
    finish(report, records)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def cmd_cer(ref_text_manifest, hyp_text_manifest, out_dir=None, workers=1, system=None):
    ref = load_manifest(ref_text_manifest, "text")
    hyp = load_manifest(hyp_text_manifest, "text")
    pairing = pair_utterances(ref, hyp)
    report = new_report(
        "cer",
        system=system or Path(hyp_text_manifest).stem,
        missing_in_gen=pairing.missing_in_gen,
        missing_in_ref=pairing.missing_in_ref,
    )
    items = [(p.utterance_id, p.ref, p.gen) for p in pairing.pairs]
    records = run_jobs(score_text, items, workers)
    report["aggregates"] = {"cer": pooled_cer(records)}
    finish(report, records)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def cmd_feats(audio_manifest, config=None, out_dir="feats", workers=1):
    cfg = config if config is not None else load_config()
    manifest = load_manifest(audio_manifest, "audio")
    out = Path(out_dir).resolve()
    dump_dir = out / "dumps"
    try:
        dump_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailure(f"cannot create {dump_dir}: {e}") from e
    report = new_report("feats", cfg.to_dict())
    items = [(i, wav, dump_dir / f"{_file_stem(i)}.json") for i, wav in manifest.items]
    records = run_jobs(partial(dump_features, cfg=cfg), items, workers)
    done = tuple((r["id"], r["path"]) for r in records if r["path"])
    save_manifest(Manifest(done, "audio"), out / "feats.tsv")
    finish(report, records)
    write_report(report, out)
    return report


def cmd_vocode(mel_dump_manifest, config=None, out_dir="wav", workers=1, seed=None):
    cfg = config if config is not None else load_config()
    gl_cfg = cfg.griffin_lim if seed is None else dataclasses.replace(cfg.griffin_lim, seed=seed)
    manifest = load_manifest(mel_dump_manifest, "audio")
    out = Path(out_dir).resolve()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailure(f"cannot create {out}: {e}") from e
    report = new_report("vocode", {"griffin_lim": gl_cfg.to_dict()})
    items = [(i, dump, out / f"{_file_stem(i)}.wav") for i, dump in manifest.items]
    records = run_jobs(partial(vocode_dump, gl_cfg=gl_cfg), items, workers)
    done = tuple((r["id"], r["path"]) for r in records if r["path"])
    save_manifest(Manifest(done, "audio"), out / "wav.scp")
    finish(report, records)
    write_report(report, out)
    return report


def parse_ratings(utt_id, payload):
    ratings = []
    for tok in payload.split(","):
        tok = tok.strip()
        try:
            value = int(tok)
        except ValueError:
            raise InvalidRating(f"{utt_id}: rating {tok!r} is not an integer") from None
        if not 1 <= value <= 5:
            raise InvalidRating(f"{utt_id}: rating {value} outside 1..5")
        ratings.append(value)
    return ratings


def cmd_mos(ratings_manifest, out_dir=None):
    manifest = load_manifest(ratings_manifest, "ratings")
    report = new_report("mos")
    records = []
    for utt_id, payload in manifest.items:
        rec = {"id": utt_id, "mos": None, "errors": []}
        try:
            rec["mos"] = mos_summary(parse_ratings(utt_id, payload)).to_dict()
        except (InvalidRating, TooFewRatings) as e:
            rec["errors"].append(describe(e))
        records.append(rec)
    finish(report, records)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def build_parser():
    parser = argparse.ArgumentParser(prog="ttseval", description="Speech synthesis evaluation toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True, workers=True):
        p.add_argument("--out", required=True, help="output directory")
        if config:
            p.add_argument("--config", help="key = value config file (defaults if omitted)")
        if workers:
            p.add_argument("--workers", type=int, default=default_workers(),
                           help="parallel worker processes (default: $TTSEVAL_WORKERS or 1)")
        p.add_argument("--seed", type=int, default=None, help="seed for randomised stages")

    p = sub.add_parser("eval", help="MCD / F0 RMSE / CER of generated vs reference audio")
    p.add_argument("--ref", required=True, help="reference wav manifest (TSV)")
    p.add_argument("--gen", required=True, help="generated wav manifest (TSV)")
    p.add_argument("--ref-text", help="reference transcript manifest, enables CER")
    p.add_argument("--hyp-text", help="ASR hypothesis manifest for the generated audio")
    p.add_argument("--name", help="system name shown in the report")
    common(p)

    p = sub.add_parser("cer", help="character error rate between transcript manifests")
    p.add_argument("--ref", required=True, help="reference transcript manifest")
    p.add_argument("--hyp", required=True, help="hypothesis transcript manifest")
    p.add_argument("--name", help="system name shown in the report")
    common(p, config=False)

    p = sub.add_parser("feats", help="dump mel, mel-cepstrum, F0 and energy per utterance")
    p.add_argument("--audio", required=True, help="wav manifest (TSV)")
    common(p)

    p = sub.add_parser("vocode", help="Griffin-Lim synthesis from mel dumps")
    p.add_argument("--mels", required=True, help="manifest of feature dumps (e.g. feats.tsv)")
    common(p)

    p = sub.add_parser("mos", help="MOS with 95%% confidence intervals")
    p.add_argument("--ratings", required=True, help="manifest of comma-separated 1..5 ratings")
    common(p, config=False, workers=False)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "eval":
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg = dataclasses.replace(cfg, griffin_lim=dataclasses.replace(cfg.griffin_lim, seed=args.seed))
            report = cmd_eval(args.ref, args.gen, cfg, args.out, args.workers,
                              args.ref_text, args.hyp_text, args.name)
        elif args.command == "cer":
            report = cmd_cer(args.ref, args.hyp, args.out, args.workers, args.name)
        elif args.command == "feats":
            report = cmd_feats(args.audio, load_config(args.config), args.out, args.workers)
        elif args.command == "vocode":
            report = cmd_vocode(args.mels, load_config(args.config), args.out, args.workers, args.seed)
        else:
            report = cmd_mos(args.ratings, args.out)
    except TtsEvalError as e:
        print(f"ttseval {args.command}: {describe(e)}", file=sys.stderr)
        return EXIT_ABORT

    bad = [r["id"] for r in report["records"] if r["errors"]]
    if bad:
        print(f"ttseval {args.command}: {len(bad)} record(s) with errors: {', '.join(bad[:10])}", file=sys.stderr)
    if report.get("missing_in_gen"):
        print(f"ttseval {args.command}: {len(report['missing_in_gen'])} reference id(s) missing from generated set",
              file=sys.stderr)
    return exit_status(report)


if __name__ == "__main__":
    sys.exit(main())
