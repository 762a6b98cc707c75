"""Command-line entry point: enumeration, training, experiments, fusion, serve."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import affordance, harness
from .advisor import ChannelNoise
from .fusion import CommandLexicon, audio_recognize, gesture_recognize, integrate
from .learner import LearnerConfig
from .scenario import ACTIONS, enumerate_states

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

OUTPUT_DIR_ENV = "CLEANTABLE_OUT"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _output_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUTPUT_DIR_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_learner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=0.3, help="SARSA learning rate (default 0.3)")
    p.add_argument("--gamma", type=float, default=0.9, help="discount factor (default 0.9)")
    p.add_argument("--epsilon", type=float, default=0.1, help="exploration rate (default 0.1)")
    p.add_argument(
        "--feedback-probability",
        type=float,
        default=0.3,
        help="per-step probability of trainer advice (default 0.3)",
    )
    p.add_argument("--theta", type=float, default=0.25, help="advice acceptance threshold")
    p.add_argument("--eta", type=float, default=1.0, help="affordance availability probability")
    p.add_argument("--max-steps", type=int, default=100, help="episode step cap (default 100)")


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    _add_learner_flags(p)
    p.add_argument("--agents", type=int, default=100)
    p.add_argument("--episodes", type=int, default=500)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--smoothing-window", type=int, default=10)
    p.add_argument("--audio-noise", type=float, default=0.05, help="per-character error rate")
    p.add_argument("--vision-noise", type=float, default=0.2, help="per-frame error rate")
    p.add_argument("--epochs", type=int, default=100, help="effect-network training epochs")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or cwd)")
    p.add_argument("--plot", action="store_true", help="also render a PNG of the curves")
    p.add_argument("--config", help="JSON file supplying any flag; flags override")


def build_parser() -> _Parser:
    parser = _Parser(prog="cleantable", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("enumerate", help="print the state table and counts")

    p = sub.add_parser("train-affordances", help="train the effect network and report accuracy")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")
    p.add_argument("--dataset-csv", action="store_true", help="also export the dataset as CSV")

    p = sub.add_parser("run", help="run one experiment condition")
    p.add_argument("--condition", choices=harness.CONDITIONS, default="rl")
    _add_experiment_flags(p)

    p = sub.add_parser("sweep", help="run the theta / eta parameter sweeps")
    p.add_argument("--parameter", choices=("theta", "eta"), required=True)
    p.add_argument("--condition", choices=harness.CONDITIONS, default="irl-aff")
    p.add_argument("--values", type=float, nargs="+", help="sweep values (defaults per parameter)")
    _add_experiment_flags(p)

    p = sub.add_parser("serve", help="start the live session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", help="directory of built trainer UI files to serve at /ui")

    p = sub.add_parser("fuse", help="fuse (audio sentence, gesture window) pairs from a file")
    p.add_argument("input", help="JSON lines: {\"audio\": str|[str], \"gestures\": [str x5]}")
    p.add_argument("--lexicon", help="lexicon file, one sentence per line in action order")
    return parser


def _apply_config_file(args: argparse.Namespace, argv: Sequence[str]) -> None:
    """JSON config supplies defaults; explicit flags keep priority."""
    if not getattr(args, "config", None):
        return
    doc = json.loads(Path(args.config).read_text())
    explicit = {a.lstrip("-").replace("-", "_").split("=")[0] for a in argv if a.startswith("--")}
    for key, value in doc.items():
        attr = key.replace("-", "_")
        if attr in explicit or not hasattr(args, attr):
            continue
        setattr(args, attr, value)


def _experiment_config(args, condition: str) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        condition=condition,
        agents=args.agents,
        episodes=args.episodes,
        learner=LearnerConfig(
            alpha=args.alpha,
            gamma=args.gamma,
            epsilon=args.epsilon,
            feedback_probability=args.feedback_probability,
            theta_min=args.theta,
            eta=args.eta,
            max_steps_per_episode=args.max_steps,
        ),
        noise=ChannelNoise(args.audio_noise, args.vision_noise),
        smoothing_window=args.smoothing_window,
        master_seed=args.seed,
        affordance_epochs=args.epochs,
    )


def cmd_enumerate(args) -> int:
    states = enumerate_states()
    for i, s in enumerate(states):
        print(f"{i:3d}  {s.token()}")
    print(f"states: {len(states)} (target 53)")
    print(f"dataset samples: {len(states) * len(ACTIONS)} (target 371)")
    return EXIT_OK


def cmd_train_affordances(args) -> int:
    out = _output_dir(args)
    dataset = affordance.generate_dataset()
    net = affordance.train(dataset, epochs=args.epochs, seed=args.seed)
    weights_path = out / "affordance_weights.json"
    net.to_json(weights_path)
    decode_acc, flag_acc = affordance.decode_accuracy(net)
    print(f"final mse: {net.final_mse:.3g}")
    print(f"decode accuracy: {decode_acc:.4f}")
    print(f"failed-flag accuracy: {flag_acc:.4f}")
    print(f"weights written to {weights_path}")
    if args.dataset_csv:
        csv_path = out / "affordance_dataset.csv"
        affordance.save_dataset_csv(dataset, csv_path)
        print(f"dataset written to {csv_path}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _experiment_config(args, args.condition)
    curve = harness.run_condition(cfg)
    out = _output_dir(args)
    csv_path = out / f"run_{args.condition}_seed{args.seed}.csv"
    harness.persist([curve], csv_path)
    print(f"mean cumulative reward: {curve.mean_cumulative:.3f}")
    print(f"results written to {csv_path}")
    if args.plot:
        png = csv_path.with_suffix(".png")
        harness.emit_plots([curve], png)
        print(f"plot written to {png}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    parameter = "theta_min" if args.parameter == "theta" else "eta"
    values = args.values or (
        harness.THETA_SWEEP if parameter == "theta_min" else harness.ETA_SWEEP
    )
    base = _experiment_config(args, args.condition)
    net = harness.trained_net(base) if base.resolved_learner().use_affordances else None
    results = harness.sweep(base, parameter, values, net=net)
    curves = [curve for _, curve in results]
    out = _output_dir(args)
    csv_path = out / f"sweep_{args.parameter}_{args.condition}_seed{args.seed}.csv"
    harness.persist(curves, csv_path)
    for value, curve in results:
        print(f"{args.parameter}={value:g}: mean cumulative reward {curve.mean_cumulative:.3f}")
    print(f"results written to {csv_path}")
    if args.plot:
        png = csv_path.with_suffix(".png")
        harness.emit_plots(curves, png)
        print(f"plot written to {png}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def cmd_fuse(args) -> int:
    lexicon = CommandLexicon.from_file(args.lexicon) if args.lexicon else CommandLexicon.default()
    by_sentence = {s: a for a, s in zip(ACTIONS, lexicon.sentences)}
    for line in Path(args.input).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        doc = json.loads(line)
        hypotheses = doc["audio"]
        if isinstance(hypotheses, str):
            hypotheses = [hypotheses]
        audio = audio_recognize(hypotheses, lexicon)
        window = [by_sentence[g] for g in doc["gestures"]]
        vision = gesture_recognize(window)
        fused = integrate(audio, vision)
        print(
            f"{fused.label.value}\t{fused.confidence:.6f}\t"
            f"audio={audio.label.value}:{audio.confidence:.4f}\t"
            f"vision={vision.label.value}:{vision.confidence:.4f}\t"
            f"congruent={fused.congruent}"
        )
    return EXIT_OK


_COMMANDS = {
    "enumerate": cmd_enumerate,
    "train-affordances": cmd_train_affordances,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "serve": cmd_serve,
    "fuse": cmd_fuse,
}


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        _apply_config_file(args, argv)
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
