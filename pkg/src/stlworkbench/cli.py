"""Batch command-line interface.

Exit codes: 0 success, 1 runtime error (bad file, unknown atom), 2 parse
or usage error, 3 pipeline completed without finding a formula.
"""

from __future__ import annotations

import argparse
import ast
import json
import sys

from . import experiments, qlearning
from .dialogue import OracleUser, SessionEngine, run_pipeline
from .formulas import (
    EvaluationError,
    FormulaSyntaxError,
    Trace,
    format_formula,
    parse_formula,
    robustness,
    satisfies,
)
from .language import load_lexicon
from .store import DATA_DIR_ENV
from .world import GridSpec, default_grid, initial_state, load_demo

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_NO_FORMULA = 3


def _load_grid(path):
    if not path:
        return default_grid()
    with open(path) as fh:
        return GridSpec.from_dict(json.load(fh))


def _load_trace(path):
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            records.append(json.loads(line))
    return Trace(records)


def _fmt(value):
    if value != value or value in (float("inf"), float("-inf")):
        return str(value)
    return f"{value:g}"


def cmd_check(args):
    phi = parse_formula(args.formula)
    trace = _load_trace(args.tracefile)
    sat = satisfies(phi, trace, args.at)
    rho = robustness(phi, trace, args.at)
    print(f"sat={str(sat).lower()} robustness={_fmt(rho)}")
    return EXIT_OK


def cmd_synthesize(args):
    grid = _load_grid(args.grid)
    lexicon = load_lexicon(args.lexicon) if args.lexicon else None
    engine = SessionEngine(grid, lexicon=lexicon, epsilon=args.epsilon)
    demos = [load_demo(path, grid, "positive") for path in args.demos or []]
    demos += [load_demo(path, grid, "negative") for path in args.neg_demos or []]
    oracle = OracleUser.for_formula(parse_formula(args.oracle), engine.lexicon)
    selected, session = run_pipeline(args.nl, demos, oracle, grid, engine)
    metrics = session.metrics
    print(f"formula={format_formula(selected) if selected else 'none'}")
    print(
        f"enumerated={metrics['enumeratedFormulas']} "
        f"interactions={metrics['userInteractions']} "
        f"runtime={metrics['runtimeSeconds']:.3f}s "
        f"success={metrics['success']}"
    )
    for question, answer in session.transcript:
        print(f"  Q: {question.prompt}")
        print(f"  A: {answer.payload}")
    return EXIT_OK if selected is not None else EXIT_NO_FORMULA


def cmd_experiment(args):
    grid = _load_grid(args.grid)
    suite = experiments.load_suite(None if args.suite == "default" else args.suite)
    paraphrases = experiments.load_paraphrases(args.paraphrases)
    results = experiments.run_experiment_suite(
        suite, paraphrases, grid, out_csv=args.out, demo_dir=args.demo_dir
    )
    for row in results:
        print(
            f"{row.row_type} {row.sentence!r}: SR={row.success_rate:.0%} "
            f"UIs={row.mean_uis:.1f} EFs={row.mean_efs:.1f} RT={row.mean_runtime:.2f}s"
        )
    print(f"overall={experiments.overall_success(results):.2%}")
    return EXIT_OK


def cmd_train(args):
    grid = _load_grid(args.grid)
    phi = parse_formula(args.formula)
    hp = qlearning.Hyperparams(episodes=args.episodes, seed=args.seed)
    policy, curve = qlearning.train(grid, initial_state(grid), phi, hp)
    sat, trace, actions = qlearning.evaluate(policy, grid, initial_state(grid), phi, hp.max_steps)
    if args.out:
        qlearning.save_policy(policy, args.out)
    if args.curve:
        qlearning.save_curve(curve, args.curve)
    print(f"episodes={len(curve)} tableSize={len(policy)} satisfied={str(sat).lower()}")
    print("rollout=" + " ".join(actions))
    return EXIT_OK


def cmd_rollout(args):
    grid = _load_grid(args.grid)
    phi = parse_formula(args.formula)
    policy = qlearning.QFunction()
    with open(args.policy) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key_text, action, value = line.split("\t")
            policy.set(ast.literal_eval(key_text), action, float(value))
    sat, trace, actions = qlearning.evaluate(policy, grid, initial_state(grid), phi, args.max_steps)
    print(f"satisfied={str(sat).lower()}")
    print("rollout=" + " ".join(actions))
    return EXIT_OK


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir, grid=_load_grid(args.grid))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stlwb",
        description="Natural language to STL formulas and grid-world policies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="monitor a formula over a trace file")
    p.add_argument("formula")
    p.add_argument("tracefile")
    p.add_argument("--at", type=int, default=0, help="time index to evaluate at")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synthesize", help="run the NL-to-STL pipeline with an oracle")
    p.add_argument("nl")
    p.add_argument("--demos", action="append", help="positive demonstration file")
    p.add_argument("--neg-demos", action="append", help="negative demonstration file")
    p.add_argument("--oracle", required=True, help="ground-truth formula for the oracle user")
    p.add_argument("--grid")
    p.add_argument("--lexicon")
    p.add_argument("--epsilon", type=float, default=0.3)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("experiment", help="run the experiment suite and emit CSV")
    p.add_argument("suite", help="suite JSON file, or 'default' for the shipped table")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--paraphrases", help="paraphrase corpus (default: shipped)")
    p.add_argument("--demo-dir", help="directory holding demo fixtures")
    p.add_argument("--grid")
    p.add_argument("--seed", type=int, default=0, help="accepted for parity; pipeline is deterministic")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("train", help="learn a policy for a formula")
    p.add_argument("formula")
    p.add_argument("--grid")
    p.add_argument("--out", help="policy output file")
    p.add_argument("--curve", help="learning-curve CSV output")
    p.add_argument("--episodes", type=int, default=qlearning.Hyperparams().episodes)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rollout", help="greedy rollout of a saved policy")
    p.add_argument("policy")
    p.add_argument("--formula", required=True)
    p.add_argument("--grid")
    p.add_argument("--max-steps", type=int, default=40)
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("serve", help="run the HTTP/JSON session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--grid")
    p.add_argument("--data-dir", help=f"session store directory (or ${DATA_DIR_ENV})")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormulaSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (EvaluationError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
