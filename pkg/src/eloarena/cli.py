"""Command-line driver: ``eloarena tournament | zeroshot | report``.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import (
    ArenaError,
    CheckpointError,
    CurveUndefinedError,
    JudgeSetupError,
    ParseError,
    TemplateError,
    ValidationError,
)
from .ingest import load_cola_tsv, load_jsonl, synthetic_dataset
from .judging import ChatClient, JudgeKind, JudgeSpec, classify_instance
from .metrics import classification_report, curve_report
from .prompts import PromptStyle, get_template
from .rating import EloConfig
from .scheduling import SchedulerKind
from .tournament import (
    CHECKPOINT_NAME,
    MATCH_LOG_NAME,
    ROUND_METRICS_NAME,
    TournamentConfig,
    load_checkpoint,
    run_tournament,
    scored_instances,
    write_ratings_csv,
)

logger = logging.getLogger("eloarena")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

_CONFIG_ERRORS = (ValidationError, JudgeSetupError, TemplateError)
_RUNTIME_ERRORS = (OSError, ParseError, CheckpointError, ArenaError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return value


def _add_data_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", type=Path, help="dataset file")
    src.add_argument("--synthetic", type=_positive_int, metavar="N",
                     help="generate N synthetic instances with hidden qualities (seeded by --seed)")
    g.add_argument("--format", choices=["cola", "jsonl"], default="jsonl")
    g.add_argument("--text-field", action="append", dest="text_fields",
                   help="JSONL text field; repeat for several (default: text)")
    g.add_argument("--label-field", default="label", help="JSONL label field; 'none' for unlabeled data")
    g.add_argument("--positive-value", default="1")
    g.add_argument("--render-template", default=None,
                   help="str.format template joining several text fields, e.g. 'Claim: {claim} Abstract: {abstract}'")
    g.add_argument("--quality-field", default=None,
                   help="JSONL numeric field with hidden qualities for the oracle and noisy-bt judges")


def _add_judge_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("judge")
    g.add_argument("--judge", choices=[k.value for k in JudgeKind], default="remote")
    g.add_argument("--endpoint", default=JudgeSpec.endpoint)
    g.add_argument("--model", default=JudgeSpec.model)
    g.add_argument("--temperature", type=float, default=0.0)
    g.add_argument("--max-tokens", type=_positive_int, default=256)
    g.add_argument("--timeout", type=float, default=60.0)
    g.add_argument("--retry-backoff", type=float, default=1.0, help="seconds before the first retry; doubles")
    g.add_argument("--epsilon", type=float, default=0.0, help="label-flip probability")
    g.add_argument("--max-attempts", type=_positive_int, default=3)
    g.add_argument("--parallelism", type=_positive_int, default=1)
    g.add_argument("--template", default=None, help="built-in template name or path to a text file")
    g.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eloarena", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("tournament", help="rank instances with an Elo tournament")
    _add_data_args(t)
    _add_judge_args(t)
    t.add_argument("--scheduler", choices=[k.value for k in SchedulerKind], default="random")
    t.add_argument("--rounds", type=int, required=True)
    t.add_argument("--k-factor", type=float, default=32.0)
    t.add_argument("--init-center", type=float, default=1000.0)
    t.add_argument("--init-spread", type=float, default=0.5)
    t.add_argument("--resume", action="store_true", help="continue from OUT/checkpoint.json if present")
    t.add_argument("--out", type=Path, required=True)

    z = sub.add_parser("zeroshot", help="single-instance zero-shot classification baseline")
    _add_data_args(z)
    _add_judge_args(z)
    z.add_argument("--style", choices=[s.value for s in PromptStyle], default="plain")
    z.add_argument("--positive-class", default=None, help="answer token for the positive class (file templates)")
    z.add_argument("--negative-class", default=None)
    z.add_argument("--out", type=Path, required=True)

    r = sub.add_parser("report", help="recompute curves and metrics from a checkpoint")
    r.add_argument("checkpoint", type=Path)
    r.add_argument("--out", type=Path, default=None, help="directory for report files (default: print only)")
    return parser


def load_instances(args):
    if args.synthetic is not None:
        instances, hidden = synthetic_dataset(args.synthetic, seed=args.seed)
        return instances, hidden
    if args.format == "cola":
        instances = load_cola_tsv(args.data)
    else:
        label_field = None if args.label_field.lower() == "none" else args.label_field
        extra = [args.quality_field] if args.quality_field else []
        instances = load_jsonl(args.data, args.text_fields or ["text"], label_field,
                               args.positive_value, args.render_template, extra)
    hidden = {}
    if args.quality_field:
        try:
            hidden = {x.id: float(x.fields[args.quality_field]) for x in instances}
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"--quality-field {args.quality_field!r} is not numeric for every row: {exc}")
    return instances, hidden


def judge_from_args(args, hidden) -> JudgeSpec:
    return JudgeSpec(
        kind=JudgeKind(args.judge), seed=args.seed, endpoint=args.endpoint, model=args.model,
        temperature=args.temperature, max_tokens=args.max_tokens, timeout=args.timeout,
        max_in_flight=args.parallelism, retry_backoff=args.retry_backoff,
        hidden=hidden if JudgeKind(args.judge) in (JudgeKind.ORACLE, JudgeKind.NOISY_BT) else {},
        epsilon=args.epsilon,
    )


def _config_echo(args) -> dict:
    skip = {"out", "verbose", "func"}
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k not in skip}


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_manifest(out: Path, args, artifacts: list[str]) -> None:
    _write_json(out / "manifest.json", {
        "command": args.command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config": _config_echo(args),
        "artifacts": sorted(artifacts),
    })


def cmd_tournament(args) -> int:
    if args.rounds < 1:
        raise UsageError(f"--rounds must be at least 1, got {args.rounds}")
    instances, hidden = load_instances(args)
    default_tpl = "clinifact_pairwise" if args.text_fields and len(args.text_fields) > 1 else "cola_pairwise"
    template = args.template or default_tpl
    get_template(template, "pairwise")
    config = TournamentConfig(
        scheduler=SchedulerKind(args.scheduler),
        elo=EloConfig(args.k_factor, args.init_center, args.init_spread, args.seed),
        judge=judge_from_args(args, hidden),
        rounds_target=args.rounds,
        template=template,
        max_attempts=args.max_attempts,
        parallelism=args.parallelism,
    )
    config.judge.check_covers(instances)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    resume = None
    if args.resume and (out / CHECKPOINT_NAME).exists():
        resume = load_checkpoint(out / CHECKPOINT_NAME)
        resume.config.rounds_target = args.rounds
    client = ChatClient.from_spec(config.judge) if config.judge.kind is JudgeKind.REMOTE else None
    try:
        state = run_tournament(instances, config, out, resume_from=resume, client=client)
    finally:
        if client is not None:
            client.close()
    artifacts = [CHECKPOINT_NAME, MATCH_LOG_NAME, ROUND_METRICS_NAME, "ratings.csv"]
    write_ratings_csv(state, out / "ratings.csv")
    scored = scored_instances(state)
    try:
        report = curve_report(scored)
    except CurveUndefinedError as exc:
        logger.warning("label-dependent metrics unavailable: %s", exc)
    else:
        artifacts += [p.name for p in report.write(out).values()]
        print(f"auroc={report.auroc:.4f} auprc={report.auprc:.4f} best_f1={report.best_f1:.4f}")
    _write_manifest(out, args, artifacts + ["manifest.json"])
    return EXIT_OK


def cmd_zeroshot(args) -> int:
    instances, hidden = load_instances(args)
    name = args.template or ("clinifact_single" if args.text_fields and len(args.text_fields) > 1 else "cola_single")
    tpl = get_template(name, "single", args.positive_class or "Yes", args.negative_class or "No")
    judge = judge_from_args(args, hidden)
    judge.check_covers(instances)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    client = ChatClient.from_spec(judge) if judge.kind is JudgeKind.REMOTE else None
    try:
        results = [classify_instance(judge, tpl, x, PromptStyle(args.style), args.max_attempts, client)
                   for x in instances]
    finally:
        if client is not None:
            client.close()
    with (out / "predictions.jsonl").open("w", encoding="utf-8") as fh:
        for x, c in zip(instances, results):
            fh.write(json.dumps({**c.to_json(), "gold": x.gold}, sort_keys=True) + "\n")
    artifacts = ["predictions.jsonl", "manifest.json"]
    labeled = [(c, x.gold) for c, x in zip(results, instances) if x.gold is not None]
    n_failed = sum(c.label is None for c in results)
    if labeled:
        preds = [None if c.label is None else int(c.label.value == "POS") for c, _ in labeled]
        rep = classification_report(preds, [g for _, g in labeled]).to_json()
        rep["n_failed"] = n_failed
        _write_json(out / "classification_report.json", rep)
        artifacts.append("classification_report.json")
        print(f"precision={rep['precision']:.4f} recall={rep['recall']:.4f} f1={rep['f1']:.4f} "
              f"accuracy={rep['accuracy']:.4f} failed={n_failed}")
    else:
        print(f"no gold labels; wrote predictions only (failed={n_failed})")
    _write_manifest(out, args, artifacts)
    return EXIT_OK


def cmd_report(args) -> int:
    state = load_checkpoint(args.checkpoint)
    out = args.out
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_ratings_csv(state, out / "ratings.csv")
    scores = state.scores()
    if not state.labeled():
        print("no gold labels in checkpoint: label-dependent metrics unavailable")
        print("id,elo,score")
        for i, e in sorted(state.ratings.items(), key=lambda kv: -kv[1]):
            print(f"{i},{e:.3f},{scores[i]:.6f}")
        return EXIT_OK
    try:
        report = curve_report(scored_instances(state))
    except CurveUndefinedError as exc:
        print(f"label-dependent metrics unavailable: {exc}")
        return EXIT_OK
    if out is not None:
        report.write(out)
    print(f"rounds={state.round_index} n={report.n} positives={report.n_positive}")
    print(f"auroc={report.auroc:.4f} auprc={report.auprc:.4f}")
    print(f"best_threshold={report.best_threshold:.6f} f1={report.best_f1:.4f} "
          f"precision={report.best_precision:.4f} recall={report.best_recall:.4f} "
          f"accuracy={report.best_accuracy:.4f}")
    for r, a, p in state.per_round_metrics:
        print(f"round {r}: auroc={a:.4f} auprc={p:.4f}")
    return EXIT_OK


COMMANDS = {"tournament": cmd_tournament, "zeroshot": cmd_zeroshot, "report": cmd_report}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _RUNTIME_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
