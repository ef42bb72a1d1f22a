"""``cutbench`` command line: run the experiments or cut/simulate a circuit file.

Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from .bench import ExperimentConfig, load_config, run_experiment
from .distributions import counts_from_indices
from .metrics import hellinger
from .noise import PRESETS, get_noise
from .program import ProgramError, read_program
from .qaoa import QaoaError
from .simulator import exact_distribution, sample_indices
from .wirecut import (
    FragmentationError,
    clip_and_normalize,
    exact_config_results,
    fragment,
    reconstruct_pauli,
    run_pauli_cut,
    run_randomized_cut,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _noise(text: str) -> str | None:
    if text.lower() == "none":
        return "none"
    if text not in PRESETS:
        raise argparse.ArgumentTypeError(f"unknown noise preset {text!r}; choose from none, {', '.join(PRESETS)}")
    return text


def _limit(text: str) -> int | None:
    return None if text.lower() == "none" else int(text)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (drawn and printed if omitted)")
    common.add_argument("--out", help="output file (CSV for experiments)")
    common.add_argument("--noise", type=_noise, help="noise preset name or 'none'")
    common.add_argument("--reps", type=int, help="repetitions per cell")
    common.add_argument("--budgets", type=_int_list, help="comma-separated shot budgets")
    common.add_argument("--device-limit", type=_limit, help="largest fragment in qubits, or 'none'")
    common.add_argument("--config", help="key = value file; command-line flags take precedence")
    common.add_argument("--workers", type=int, help="parallel worker processes")

    parser = _Parser(prog="cutbench", description="Wire-cutting benchmarks.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ghz", parents=[common], help="compare cutting methods on the GHZ benchmark")
    p.add_argument("--methods", type=_str_list, help="subset of pauli,clifford,rotation")
    p.add_argument("--qubits", type=int, dest="num_qubits", help="benchmark width (default 5)")

    p = sub.add_parser("qaoa", parents=[common], help="cut vs uncut QAOA MaxCut")
    p.add_argument("--graph", type=_str_list, dest="graphs", help="A, B, C or a comma list")
    p.add_argument("--methods", type=_str_list, help="subset of uncut,clifford_cut,pauli_cut")
    p.add_argument("--cut-reps", type=int, help="repetitions for cut methods")
    p.add_argument("--max-iter", type=int, help="SPSA iterations")
    p.add_argument("--layers", type=int, help="QAOA depth p")

    p = sub.add_parser("cut", parents=[common], help="fragment a .qcut file and reconstruct its distribution")
    p.add_argument("file")
    p.add_argument("--method", choices=("pauli", "clifford", "rotation"), default="clifford")
    p.add_argument("--shots", type=int, help="shot budget; omit for exact Pauli reconstruction")

    p = sub.add_parser("simulate", parents=[common], help="exact or sampled run of a .qcut file")
    p.add_argument("file")
    p.add_argument("--shots", type=int, help="number of shots; omit for the exact distribution")
    return parser


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = int(np.random.SeedSequence().generate_state(1)[0])
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _experiment(args) -> int:
    values = load_config(args.config) if args.config else {}
    values["experiment"] = args.command
    for key in ("out", "reps", "budgets", "workers", "methods", "num_qubits", "graphs", "cut_reps", "layers"):
        if getattr(args, key, None) is not None:
            values[key] = getattr(args, key)
    if args.noise is not None:
        values["noise"] = args.noise
    if args.device_limit is not None:
        values["device_limit"] = args.device_limit
    if getattr(args, "max_iter", None) is not None:
        values["spsa"] = {**values.get("spsa", {}), "max_iter": args.max_iter}
    values["seed"] = _resolve_seed(args.seed if args.seed is not None else values.get("seed"))
    config = ExperimentConfig(**values)
    result = run_experiment(config)
    for method, graph, budget, name, value in result.summary:
        print(f"{graph}\t{method}\t{budget}\t{name}\t{value:.6g}")
    if config.out:
        print(f"wrote {len(result.rows())} rows to {config.out}", file=sys.stderr)
    return 0


def _print_distribution(dist, out=None):
    lines = [f"{k} {v:.10g}" for k, v in sorted(dist.items())]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cut(args) -> int:
    circuit = read_program(args.file)
    fs = fragment(circuit, args.device_limit)
    print(f"fragments: {len(fs.fragments)} sizes: {fs.sizes} cuts: {fs.num_cuts}", file=sys.stderr)
    noise = get_noise(args.noise)
    if args.shots is None:
        quasi = reconstruct_pauli(exact_config_results(fs), fs)
    else:
        seed = _resolve_seed(args.seed)
        if args.method == "pauli":
            quasi = run_pauli_cut(fs, args.shots, seed, noise)
        else:
            quasi = run_randomized_cut(fs, args.shots, seed, args.method, noise)
    dist = clip_and_normalize(quasi)
    if circuit.num_qubits <= 24:
        print(f"hellinger to exact: {hellinger(dist, exact_distribution(circuit.without_cuts())):.6f}", file=sys.stderr)
    _print_distribution(dist, args.out)
    return 0


def _simulate(args) -> int:
    circuit = read_program(args.file).without_cuts()
    if args.shots is None:
        _print_distribution(exact_distribution(circuit), args.out)
        return 0
    seed = _resolve_seed(args.seed)
    idx, m = sample_indices(circuit, args.shots, seed, get_noise(args.noise))
    counts = counts_from_indices(idx, m)
    text = "".join(f"{k} {v}\n" for k, v in sorted(counts.items()))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {"ghz": _experiment, "qaoa": _experiment, "cut": _cut, "simulate": _simulate}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, ProgramError, QaoaError, FragmentationError, IndexError) as exc:
        print(f"cutbench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
