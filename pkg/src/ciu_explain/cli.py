"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 scenario or validation error,
3 model or transport error. Failures print a one-line diagnostic on
stderr. With a fixed seed, identical invocations print identical bytes
on stdout.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import narrative
from .core import validate_context
from .engine import contrast, contrast_to_json, explain, report_to_json
from .errors import CiuError, ModelError, ValidationError
from .estimator import sweep_feature, sweep_levels, sweep_to_csv
from .models import ExternalModel
from .scenario import Scenario, build_model, bundled_scenario_names, load_scenario

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_MODEL = 3

_STRATEGIES = {"grid": "grid", "mc": "montecarlo"}


class _UsageExit(Exception):
    def __init__(self, message: str):
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    """argparse, but usage problems follow this tool's exit-code contract."""

    def error(self, message: str):  # noqa: D102 (argparse hook)
        raise _UsageExit(message)


def parse_context_tokens(tokens: str, scenario: Scenario) -> list[object]:
    """Comma-separated values, positional and/or name=value; names win."""
    space = scenario.space
    positional: dict[int, str] = {}
    named: dict[int, str] = {}
    parts = [t.strip() for t in tokens.split(",")] if tokens else []
    for pos, part in enumerate(parts):
        if "=" in part:
            key, _, value = part.partition("=")
            named[space.index_of(key.strip())] = value.strip()
        else:
            if pos >= len(space):
                raise ValidationError(
                    f"context has more values than the {len(space)} declared features"
                )
            positional[pos] = part
    values: list[object] = []
    for i in range(len(space)):
        if i in named:
            values.append(named[i])
        elif i in positional:
            values.append(positional[i])
        else:
            raise ValidationError(
                f"context is missing a value for feature {space[i].name!r}"
            )
    return values


def _config_from_args(scenario: Scenario, args: argparse.Namespace):
    config = scenario.config
    if args.strategy is not None:
        config = replace(config, strategy=_STRATEGIES[args.strategy])
    if args.grid_levels is not None:
        config = replace(config, grid_levels=args.grid_levels)
    if args.mc_samples is not None:
        config = replace(config, mc_samples=args.mc_samples)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.refine is not None:
        config = replace(config, refinement=args.refine)
    return config


def _targets_from_args(scenario: Scenario, args: argparse.Namespace) -> list[str]:
    if args.targets is None:
        return list(scenario.default_targets)
    targets = [t.strip() for t in args.targets.split(",") if t.strip()]
    if not targets:
        raise ValidationError("--targets must name at least one feature or concept")
    return targets


def _add_common(parser: argparse.ArgumentParser, *, context_required: bool = True) -> None:
    parser.add_argument("scenario", help="scenario file path or bundled demo name")
    parser.add_argument("--context", required=context_required,
                        help="comma-separated values, positional or name=value")
    parser.add_argument("--strategy", choices=sorted(_STRATEGIES), default=None,
                        help="extrema estimation strategy")
    parser.add_argument("--grid-levels", type=int, default=None, metavar="N")
    parser.add_argument("--mc-samples", type=int, default=None, metavar="N")
    parser.add_argument("--seed", type=int, default=None, metavar="N")
    parser.add_argument("--refine", type=int, default=None, metavar="N",
                        help="grid refinement rounds (continuous sets only)")
    parser.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="parallel per-target estimation (built-in models only)")


def build_parser() -> _Parser:
    parser = _Parser(prog="ciu-explain",
                     description="Contextual importance/utility explanations "
                                 "for black-box models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_explain = sub.add_parser("explain", help="explain one output at a context")
    _add_common(p_explain)
    p_explain.add_argument("--output", required=True, help="output name to explain")
    p_explain.add_argument("--targets", default=None,
                           help="comma-separated feature/concept names "
                                "(default: all features and concepts)")
    p_explain.add_argument("--json", action="store_true",
                           help="print the canonical JSON report instead of text")

    p_contrast = sub.add_parser("contrast",
                                help="compare two outputs at the same context")
    _add_common(p_contrast)
    p_contrast.add_argument("--output-a", required=True, help="preferred output name")
    p_contrast.add_argument("--output-b", required=True, help="rejected output name")
    p_contrast.add_argument("--targets", default=None)
    p_contrast.add_argument("--top-k", type=int, default=3, metavar="N",
                            help="how many targets the narrative names")
    p_contrast.add_argument("--json", action="store_true")

    p_sweep = sub.add_parser("sweep", help="export one feature's response as CSV")
    _add_common(p_sweep)
    p_sweep.add_argument("--feature", required=True, help="feature name to sweep")
    p_sweep.add_argument("--resolution", type=int, default=21, metavar="N",
                         help="points for continuous sweeps (endpoints included)")
    p_sweep.add_argument("--out", required=True, metavar="PATH", help="CSV output path")

    p_validate = sub.add_parser("validate", help="statically check a scenario file")
    p_validate.add_argument("scenario")
    p_validate.add_argument("--probe-model", action="store_true",
                            help="also launch external adapters and handshake")

    p_list = sub.add_parser("scenarios", help="list bundled demo scenarios")
    p_list.set_defaults(command="scenarios")
    return parser


def _cmd_explain(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    context = validate_context(scenario.space, parse_context_tokens(args.context, scenario))
    spec = scenario.output_by_name(args.output)
    targets = _targets_from_args(scenario, args)
    config = _config_from_args(scenario, args)
    model = build_model(scenario)
    try:
        report = explain(model, scenario.space, context, spec, targets,
                         tree=scenario.tree, config=config, jobs=args.jobs)
    finally:
        if isinstance(model, ExternalModel):
            model.close()
    for note in report.warnings:
        print(f"warning: {note}", file=sys.stderr)
    if args.json:
        print(report_to_json(report, scenario.space))
    else:
        print(narrative.render_explanation(
            report, scenario.space, scenario.scale,
            template=scenario.templates.get("explanation"),
        ))
    return EXIT_OK


def _cmd_contrast(args: argparse.Namespace) -> int:
    if args.output_a == args.output_b:
        raise _UsageExit("--output-a and --output-b must name different outputs")
    scenario = load_scenario(args.scenario)
    context = validate_context(scenario.space, parse_context_tokens(args.context, scenario))
    spec_a = scenario.output_by_name(args.output_a)
    spec_b = scenario.output_by_name(args.output_b)
    if args.top_k < 1:
        raise _UsageExit("--top-k must be at least 1")
    targets = _targets_from_args(scenario, args)
    config = _config_from_args(scenario, args)
    model = build_model(scenario)
    try:
        report = contrast(model, scenario.space, context, spec_a, spec_b, targets,
                          tree=scenario.tree, config=config, jobs=args.jobs)
    finally:
        if isinstance(model, ExternalModel):
            model.close()
    for note in report.warnings:
        print(f"warning: {note}", file=sys.stderr)
    if args.json:
        print(contrast_to_json(report, scenario.space))
    else:
        print(narrative.render_contrast(
            report, scenario.space, scenario.scale, top_k=args.top_k,
            template=scenario.templates.get("contrast"),
        ))
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    context = validate_context(scenario.space, parse_context_tokens(args.context, scenario))
    index = scenario.space.index_of(args.feature)
    model = build_model(scenario)
    try:
        if scenario.space[index].is_categorical:
            series = sweep_levels(model, scenario.space, context, index)
        else:
            series = sweep_feature(model, scenario.space, context, index, args.resolution)
    finally:
        if isinstance(model, ExternalModel):
            model.close()
    csv_text = sweep_to_csv(series)
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    except OSError as exc:
        raise ValidationError(f"cannot write {args.out!r}: {exc}") from exc
    print(f"{len(series)} rows written to {args.out}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    checks = [f"features: {len(scenario.space)}", f"outputs: {len(scenario.outputs)}"]
    if scenario.tree is not None:
        checks.append(f"concepts: {len(scenario.tree.names)}")
    external = scenario.model_desc.get("kind") == "external"
    if not external:
        model = build_model(scenario)
        checks.append(f"model: {model.fingerprint}")
    elif args.probe_model:
        model = build_model(scenario)
        try:
            checks.append(f"model: {model.fingerprint} "
                          f"({model.n_inputs} in, {model.n_outputs} out)")
        finally:
            model.close()  # type: ignore[union-attr]
    else:
        checks.append("model: external (not probed; pass --probe-model to handshake)")
    print(f"OK {scenario.name}: " + "; ".join(checks))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "explain":
            return _cmd_explain(args)
        if args.command == "contrast":
            return _cmd_contrast(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "scenarios":
            for name in bundled_scenario_names():
                print(name)
            return EXIT_OK
        raise _UsageExit(f"unknown command {args.command!r}")
    except _UsageExit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CiuError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
