"""
orbit-forge command line: every analysis as a subcommand, text or JSON on stdout,
diagnostics on stderr.
"""
import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from . import canonical_forms, invariants, lie_action, orbit_classify, statespace
from .config import (DEFAULT_CASE_SAMPLES, DEFAULT_RESTARTS, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TRIALS, MODES,
                     RANK_REL_TOL, RunConfig)
from .errors import OrbitForgeError, ParameterError
from .serialization import dumps

logger = logging.getLogger("orbit_forge.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_MISMATCH = 3


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """Grammar errors become UsageError instead of exiting with argparse's status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Outcome:
    result: object
    text: str
    exit_code: int = EXIT_OK


# =============================================================================
# HELPERS
# =============================================================================

def _complex(value: str) -> complex:
    try:
        return complex(value.replace(" ", ""))
    except ValueError as e:
        raise ParameterError(f"not a complex number: {value!r}") from e


def _load(path: str) -> statespace.QubitState:
    return statespace.load_state(path)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _write_state(state: statespace.QubitState, output: Optional[str]) -> Outcome:
    if output:
        statespace.save_state(state, output)
        return Outcome({"path": output, "state": state}, f"wrote {output}")
    return Outcome({"state": state}, statespace.dump_state(state).rstrip("\n"))


# =============================================================================
# SUBCOMMANDS
# =============================================================================

def cmd_analyze(args, config: RunConfig) -> Outcome:
    state = _load(args.state)
    report = lie_action.orbit_report(state, config.mode, config.policy)
    stabilizer = orbit_classify.classify_stabilizer(state, config.policy, config.mode)
    lines = [
        f"orbit_dim: {report.orbit_dim}, invariant_count: {report.invariant_count}, "
        f"stabilizer_dim: {report.stabilizer_dim}",
        f"stabilizer: {stabilizer.label} (derived_dim {stabilizer.derived_dim}, "
        f"closure_residual {stabilizer.closure_residual:.3e})",
        f"flip_symmetric: {str(stabilizer.flip_symmetric).lower()}",
    ]
    return Outcome({"orbit": report, "stabilizer": stabilizer}, "\n".join(lines))


def cmd_invariants(args, config: RunConfig) -> Outcome:
    fp = invariants.fingerprint(_load(args.state), config.policy)
    lines = [f"norm_sq: {_fmt(fp.norm_sq)}"] + [f"{label}: {_fmt(value)}" for label, value in fp.values]
    lines.append(f"orbit_dim: {fp.orbit_dim}, stabilizer_dim: {fp.stabilizer_dim}")
    return Outcome(fp, "\n".join(lines))


def cmd_equiv(args, config: RunConfig) -> Outcome:
    first, second = _load(args.first), _load(args.second)
    verdict = canonical_forms.lu_equivalent(first, second, search=args.witness,
                                            config=config.optimizer, policy=config.policy)
    lines = [f"fingerprints_match: {str(verdict.fingerprints_match).lower()}",
             f"max_component_gap: {verdict.max_component_gap:.3e}"]
    if verdict.witness is not None:
        lines.append(f"witness_residual: {verdict.witness.residual:.3e}, phase: {verdict.witness.phase:.6f}")
    code = EXIT_OK if verdict.fingerprints_match else EXIT_MISMATCH
    return Outcome(verdict, "\n".join(lines), code)


def cmd_schmidt(args, config: RunConfig) -> Outcome:
    form = canonical_forms.schmidt_2q(_load(args.state))
    return Outcome(form, f"N: {_fmt(form.N)}, phi: {_fmt(form.phi)}")


def cmd_canonical3(args, config: RunConfig) -> Outcome:
    form = canonical_forms.canonical_3q(_load(args.state), config.optimizer)
    text = ", ".join(f"{name}: {_fmt(value)}" for name, value in
                     zip(("N", "alpha", "beta", "gamma", "delta", "eta"), form.params))
    text += f"\nresidual: {form.residual:.3e}, degenerate: {str(form.degenerate).lower()}"
    return Outcome(form, text)


def _classify_outcome(state: statespace.QubitState, config: RunConfig) -> Outcome:
    report = orbit_classify.classify_stabilizer(state, config.policy, config.mode)
    flip = str(report.flip_symmetric).lower()
    if report.flip_phase is not None:
        flip += f" (phase {report.flip_phase:.6f})"
    text = (f"label: {report.label}\ndim: {report.dim}, derived_dim: {report.derived_dim}, "
            f"closure_residual: {report.closure_residual:.3e}\nflip_symmetric: {flip}")
    return Outcome(report, text)


def cmd_classify(args, config: RunConfig) -> Outcome:
    return _classify_outcome(_load(args.state), config)


def cmd_family4(args, config: RunConfig) -> Outcome:
    params = [_complex(v) for v in (args.a, args.b, args.c, args.d)]
    return _classify_outcome(statespace.catalog_state("family4", params), config)


def cmd_case_table(args, config: RunConfig) -> Outcome:
    table = orbit_classify.family4_case_table(config.samples, config.seed, config.policy)
    return Outcome({"rows": table}, orbit_classify.render_case_table(table))


def cmd_catalog(args, config: RunConfig) -> Outcome:
    params = [_complex(v) for v in args.params]
    return _write_state(statespace.catalog_state(args.name, params, args.n), args.output)


def cmd_random(args, config: RunConfig) -> Outcome:
    return _write_state(statespace.random_state(args.n, config.seed), args.output)


def cmd_bounds(args, config: RunConfig) -> Outcome:
    naive, reduced = lie_action.count_bounds(args.n)
    return Outcome({"n": args.n, "naive": naive, "reduced": reduced}, f"naive: {naive}, reduced: {reduced}")


def cmd_evaluate(args, config: RunConfig) -> Outcome:
    state = _load(args.state)
    pattern = invariants.pattern_from_json(Path(args.pattern).read_text(encoding="utf-8"))
    value = invariants.evaluate_invariant(pattern, state)
    deviation = invariants.invariance_test(pattern, state, config.trials, config.seed)
    text = f"value: {value.real:.10g}{value.imag:+.10g}j\ninvariance_deviation: {deviation:.3e}"
    return Outcome({"pattern": pattern, "value": value, "invariance_deviation": deviation}, text)


def cmd_independence(args, config: RunConfig) -> Outcome:
    patterns = invariants.builtin_patterns(args.n)
    rank = invariants.functional_independence(patterns, args.n, config.samples, config.seed, config.policy)
    lower, upper = lie_action.count_bounds(args.n)
    result = {"n": args.n, "patterns": list(patterns), "rank": rank, "bounds": [lower, upper]}
    return Outcome(result, f"patterns: {len(patterns)}, rank: {rank}")


# =============================================================================
# PARSER
# =============================================================================

def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--mode", choices=MODES, default="reduced")
    common.add_argument("--json", action="store_true", help="emit one JSON document")
    common.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    common.add_argument("--rel-tol", type=float, default=RANK_REL_TOL)
    common.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])

    parser = ArgumentParser(prog="orbit-forge", description="Local-unitary orbit analysis of n-qubit states")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    def add(name: str, handler: Callable, help_text: str, states: Sequence[str] = ()):
        p = sub.add_parser(name, parents=[common], help=help_text)
        for state in states:
            p.add_argument(state)
        p.set_defaults(handler=handler)
        return p

    add("analyze", cmd_analyze, "orbit dimension, invariant count and stabilizer", ["state"])
    add("invariants", cmd_invariants, "invariant fingerprint", ["state"])
    equiv = add("equiv", cmd_equiv, "compare two states (exit 3 on mismatch)", ["first", "second"])
    equiv.add_argument("--witness", action="store_true", help="search for local unitaries when fingerprints match")
    add("schmidt", cmd_schmidt, "two-qubit Schmidt form", ["state"])
    add("canonical3", cmd_canonical3, "three-qubit canonical form", ["state"])
    add("classify", cmd_classify, "stabilizer classification", ["state"])

    family = add("family4", cmd_family4, "classify a e111 + b e222 + c e112 + d e211")
    for name in ("a", "b", "c", "d"):
        family.add_argument(f"--{name}", required=True, help="complex, e.g. 0.5+0.1j")

    add("case-table", cmd_case_table, "stabilizer dimensions over the family case list")

    catalog = add("catalog", cmd_catalog, "write a named state", ["name"])
    catalog.add_argument("params", nargs="*")
    catalog.add_argument("--n", type=int, default=None)
    catalog.add_argument("-o", "--output")

    random = add("random", cmd_random, "write a seeded random state")
    random.add_argument("--n", type=int, required=True)
    random.add_argument("-o", "--output")

    bounds = add("bounds", cmd_bounds, "invariant count bounds")
    bounds.add_argument("--n", type=int, required=True)

    evaluate = add("evaluate", cmd_evaluate, "evaluate a contraction pattern file", ["state"])
    evaluate.add_argument("--pattern", required=True)

    independence = add("independence", cmd_independence, "rank of the built-in invariant set")
    independence.add_argument("--n", type=int, required=True)
    return parser


def _run_config(args) -> RunConfig:
    inputs = [getattr(args, name) for name in ("state", "first", "second") if getattr(args, name, None)]
    samples = args.samples
    if samples is None:
        samples = DEFAULT_CASE_SAMPLES if args.command == "case-table" else DEFAULT_SAMPLES
    return RunConfig(
        command=args.command,
        inputs=inputs,
        seed=args.seed,
        mode=args.mode,
        rel_tol=args.rel_tol,
        output="json" if args.json else "text",
        trials=args.trials,
        witness=getattr(args, "witness", False),
        restarts=args.restarts,
        samples=samples,
        n=getattr(args, "n", None),
    )


# =============================================================================
# ENTRY POINTS
# =============================================================================

def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)

    logging.basicConfig(stream=sys.stderr, level=getattr(logging, args.log_level),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _run_config(args)
        logger.debug(f"Running {config.command} with {config.to_dict()}")
        outcome = args.handler(args, config)
    except (OrbitForgeError, OSError, json.JSONDecodeError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        # config validation (e.g. restarts < 1)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE

    if config.output == "json":
        document: Dict = {"command": config.command, "config": config, "result": outcome.result}
        print(dumps(document))
    else:
        print(outcome.text)
    return outcome.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
