"""``empathic`` command line.

Subcommands: generate, train, replay, evaluate-alignment, serve.
Exit codes: 0 success, 1 validation, 2 I/O, 3 protocol.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from .config import load_config
from .emotion_model import load_model_dir, model_filename, save_model
from .engine import replay, write_event_log
from .errors import EmpathicError, ProtocolError, ValidationError
from .evaluation import evaluate_alignment, train_models
from .forest import Hyperparams
from .signals import load_trial
from .synth import SynthSpec, generate, load_dataset

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_PROTOCOL = 0, 1, 2, 3


def _common(suppress: bool) -> argparse.ArgumentParser:
    # the per-subcommand copy must not clobber values given before the subcommand
    def d(value):
        return argparse.SUPPRESS if suppress else value

    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=d(None), help="engine config JSON")
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--models", default=d(None), help="model directory")
    p.add_argument("--out", default=d(None), help="output path")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return p


def _speed(text: str):
    if text == "max":
        return "max"
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("speed must be > 0 or 'max'")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = _common(suppress=True)
    parser = argparse.ArgumentParser(prog="empathic", description=__doc__, parents=[_common(suppress=False)],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write a synthetic labeled dataset")
    g.add_argument("--preset", choices=SynthSpec.PRESETS, default="default")
    g.add_argument("--trials-per-quadrant", type=int, default=10)
    g.add_argument("--duration", type=float, default=60.0, help="trial length in seconds")
    g.add_argument("--holdout", type=float, default=0.25, help="fraction of trials marked 'test'")
    g.add_argument("--no-eeg", action="store_true", help="omit EEG streams")

    t = sub.add_parser("train", parents=[common], help="train the per-modality forests")
    t.add_argument("--data", required=True, help="dataset directory")
    t.add_argument("--split", choices=("train", "test", "all"), default="train")
    t.add_argument("--n-trees", type=int, default=100)
    t.add_argument("--max-depth", type=int, default=8)
    t.add_argument("--min-leaf", type=int, default=2)
    t.add_argument("--features-per-split", type=int)

    r = sub.add_parser("replay", parents=[common], help="stream one trial through the engine")
    r.add_argument("trial", help="trial directory")
    r.add_argument("--events-out", help="write newline-delimited event records here")
    r.add_argument("--speed", type=_speed, default="max")
    r.add_argument("--with-latency", action="store_true", help="include latency_ms in the event log")

    e = sub.add_parser("evaluate-alignment", parents=[common], help="score detections against self-reports")
    e.add_argument("--data", required=True)
    e.add_argument("--split", choices=("train", "test", "all"), default="test")
    e.add_argument("--per-window", action="store_true")
    e.add_argument("--method", choices=("stream", "batch"), default="stream")

    s = sub.add_parser("serve", parents=[common], help="run the orchestration server")
    s.add_argument("--listen", default="127.0.0.1:8765", help="host:port")
    s.add_argument("--mode", choices=("neutral", "empathetic"), default="empathetic")
    s.add_argument("--responses", help="response database file (default: bundled sample)")
    return parser


def cmd_generate(args) -> int:
    spec = SynthSpec.preset(
        args.preset,
        seed=args.seed,
        trials_per_quadrant=args.trials_per_quadrant,
        duration_s=args.duration,
        holdout=args.holdout,
        include_eeg=not args.no_eeg,
    )
    out = args.out or "dataset"
    trials = generate(spec, out)
    print(f"wrote {len(trials)} trials ({args.preset} preset, seed {args.seed}) to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = load_config(args.config)
    trials = load_dataset(args.data, args.split)
    params = Hyperparams(args.n_trees, args.max_depth, args.min_leaf, args.features_per_split)
    summary = train_models(trials, params, args.seed, config)
    out = Path(args.models or args.out or "models")
    out.mkdir(parents=True, exist_ok=True)
    for (kind, dim), model in summary.models.items():
        save_model(model, out / model_filename(kind, dim))
    report = {
        f"{k.value}/{d.value}": {"n": summary.n_examples[(k, d)], "train_accuracy": summary.accuracy[(k, d)]}
        for (k, d) in summary.models
    }
    (out / "training_summary.json").write_text(
        json.dumps({"models": report, "warnings": summary.warnings}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(f"trained {len(summary.models)} models on {len(trials)} trials -> {out}")
    print(summary.to_text())
    return EXIT_OK


def _models(args, required=False):
    config = load_config(args.config)
    directory = args.models or config.model_dir
    if directory is None:
        raise FileNotFoundError("no model directory given (--models or model_dir in config)")
    return config, load_model_dir(directory, required=required)


def cmd_replay(args) -> int:
    config, models = _models(args, required=True)
    trial = load_trial(args.trial)
    events = replay(trial, models, config, speed=args.speed)
    if args.events_out:
        write_event_log(events, args.events_out, include_latency=args.with_latency)
    hist = Counter(ev.state.quadrant.value for ev in events)
    print(f"{len(events)} events")
    for q in ("HAHV", "HALV", "LAHV", "LALV"):
        print(f"  {q}: {hist.get(q, 0)}")
    if events:
        mean_latency = sum(ev.latency_ms for ev in events) / len(events)
        print(f"mean latency_ms: {mean_latency:.2f}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config, models = _models(args)
    trials = load_dataset(args.data, args.split)
    if not trials:
        raise ValidationError(f"no trials in split {args.split!r} of {args.data}; alignment needs at least one trial")
    report = evaluate_alignment(trials, models, config, per_window=args.per_window, method=args.method)
    print(report.to_text())
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .orchestrator import ServerConfig, load_response_db, serve
    from .orchestrator.session import Mode

    config = load_config(args.config)
    models = None
    directory = args.models or config.model_dir
    if directory:
        models = load_model_dir(directory)
    host, _, port = args.listen.rpartition(":")
    server_config = ServerConfig(
        responses=load_response_db(args.responses),
        default_mode=Mode(args.mode),
        seed=args.seed,
        models=models,
        engine_config=config,
    )
    serve(server_config, host or "127.0.0.1", int(port))
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "replay": cmd_replay,
    "evaluate-alignment": cmd_evaluate,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except (OSError, FileNotFoundError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EmpathicError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
