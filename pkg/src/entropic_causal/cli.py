"""Command-line interface.

Subcommands bind the library operations to plain-text inputs and outputs:

* ``couple``                 greedy coupling of marginals read from a file
* ``infer``                  direction verdict for a joint matrix file
* ``greedy-bench``           excess-bits benchmark CSV
* ``synth-identifiability``  direction-recovery experiment CSV
* ``eval-pairs``             accuracy/decision-rate curve CSV for a pair directory

Every run emits a JSON manifest (command, parameters, seed, version, output
paths, duration) next to the output file, or on stderr when writing to
stdout. Exit codes: 0 ok, 2 validation error, 3 I/O error, 4 starvation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .coupling import greedy_coupling, write_coupling
from .distributions import Distribution, JointMatrix
from .inference import infer_direction
from .pairs import PairsError, evaluate_dataset, curve_csv, load_pairs
from .synth import (
    SynthConfig,
    benchmark_csv,
    identifiability_csv,
    run_greedy_benchmark,
    run_identifiability_experiment,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_STARVED = 4

ALPHA_ENV = "ENTROPIC_CI_ALPHA"


def _parse_int_list(spec: str) -> list[int]:
    """Parse "a:b" (inclusive range), "a,b,c", or a single integer."""
    if ":" in spec:
        lo, hi = spec.split(":", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise ValueError(f"empty range {spec!r}")
        return list(range(lo, hi + 1))
    return [int(tok) for tok in spec.split(",")]


def _parse_float_grid(spec: str) -> list[float]:
    """Parse "a:b:step" (inclusive grid), "a,b,c", or a single value."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) == 2:  # integer-style inclusive range
            lo, hi = float(parts[0]), float(parts[1])
            step = 1.0
        elif len(parts) == 3:
            lo, hi, step = (float(p) for p in parts)
        else:
            raise ValueError(f"bad grid spec {spec!r}")
        if step <= 0 or hi < lo:
            raise ValueError(f"bad grid spec {spec!r}")
        count = int(round((hi - lo) / step))
        return [lo + k * step for k in range(count + 1)]
    return [float(tok) for tok in spec.split(",")]


def _read_marginals_file(path: Path) -> list[Distribution]:
    marginals = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            values = [float(tok) for tok in line.split()]
            marginals.append(Distribution(values))
        except ValueError as exc:
            raise ValueError(f"{path.name} line {lineno}: {exc}") from exc
    if len(marginals) < 2:
        raise ValueError(f"{path.name}: need at least 2 marginal lines")
    return marginals


def _read_joint_file(path: Path) -> JointMatrix:
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise ValueError(f"{path.name} line {lineno}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path.name}: empty joint file")
    return JointMatrix(rows)


@dataclass(frozen=True)
class RunManifest:
    """Record of one CLI run, emitted as JSON alongside its outputs.

    Re-running the listed command with the listed parameters reproduces
    the outputs bit-exactly for seeded commands.
    """

    command: str
    parameters: dict
    seed: int | None
    version: str
    outputs: list[str] = field(default_factory=list)
    duration_seconds: float = 0.0


def _emit_manifest(args: argparse.Namespace, outputs: list[str], started: float) -> None:
    params = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k != "func" and v is not None
    }
    manifest = RunManifest(
        command=args.command,
        parameters=params,
        seed=getattr(args, "seed", None),
        version=__version__,
        outputs=outputs,
        duration_seconds=time.monotonic() - started,
    )
    text = json.dumps(asdict(manifest), sort_keys=True)
    if outputs:
        Path(outputs[0] + ".manifest.json").write_text(text + "\n")
    else:
        print(text, file=sys.stderr)


def _write_or_print(text: str, out: str | None) -> list[str]:
    if out:
        Path(out).write_text(text)
        return [out]
    sys.stdout.write(text)
    return []


def _cmd_couple(args) -> int:
    marginals = _read_marginals_file(Path(args.marginals_file))
    result = greedy_coupling(marginals)
    import io

    buf = io.StringIO()
    write_coupling(result, buf)
    outputs = _write_or_print(buf.getvalue(), args.out)
    print(
        f"entropy_bits={result.entropy_bits!r} "
        f"lower_bound_bits={result.lower_bound_bits!r} "
        f"excess_bits={result.excess_bits!r} "
        f"atoms={len(result.coupling.atoms)}"
    )
    return EXIT_OK, outputs


def _cmd_infer(args) -> int:
    joint = _read_joint_file(Path(args.joint_file))
    verdict = infer_direction(joint, t=args.t)
    text = json.dumps(verdict.to_record(), sort_keys=True) + "\n"
    outputs = _write_or_print(text, args.out)
    if outputs:
        print(f"decision={verdict.decision} gap_bits={verdict.gap_bits!r}")
    return EXIT_OK, outputs


def _cmd_greedy_bench(args) -> int:
    rows = run_greedy_benchmark(
        _parse_int_list(args.n),
        trials=args.trials,
        seed=args.seed,
        jobs=args.jobs or os.cpu_count(),
    )
    outputs = _write_or_print(benchmark_csv(rows), args.out)
    return EXIT_OK, outputs


def _cmd_synth_identifiability(args) -> int:
    sigmas = _parse_float_grid(args.sigma)
    csv_parts: list[str] = []
    starved = False
    for idx, n in enumerate(_parse_int_list(args.n)):
        cfg = SynthConfig(
            n=n,
            theta=args.theta if args.theta is not None else n * (n - 1),
            sigma=sigmas,
            trials=args.trials,
            # distinct deterministic sub-seed per n
            seed=args.seed + idx,
            entropy_cap_bits=args.entropy_cap,
        )
        summary = run_identifiability_experiment(cfg, jobs=args.jobs or os.cpu_count())
        csv = identifiability_csv(summary)
        csv_parts.append(csv if not csv_parts else csv.split("\n", 1)[1])
        if summary.starved_sigmas:
            starved = True
            print(
                f"warning: n={n}: starved at sigma "
                + ",".join(str(s) for s in summary.starved_sigmas),
                file=sys.stderr,
            )
    outputs = _write_or_print("".join(csv_parts), args.out)
    return (EXIT_STARVED if starved else EXIT_OK), outputs


def _cmd_eval_pairs(args) -> int:
    dataset = load_pairs(args.path)
    alpha = args.alpha
    if alpha is None:
        alpha = float(os.environ.get(ALPHA_ENV, "0.05"))
    curve = evaluate_dataset(
        dataset, _parse_float_grid(args.t), alpha=alpha, jobs=args.jobs or os.cpu_count()
    )
    outputs = _write_or_print(curve_csv(curve), args.out)
    return EXIT_OK, outputs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entropic",
        description="Entropy-minimization direction test for discrete variable pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("couple", help="greedy minimum-entropy coupling of marginals")
    p.add_argument("marginals_file", help="one marginal per line, whitespace-separated")
    p.add_argument("--out", help="atom file path (default: stdout)")
    p.set_defaults(func=_cmd_couple)

    p = sub.add_parser("infer", help="direction verdict for a joint matrix file")
    p.add_argument("joint_file", help="rows of the joint matrix (rows=Y, cols=X)")
    p.add_argument("--t", type=float, default=0.0, help="abstention threshold")
    p.add_argument("--out", help="verdict JSON path (default: stdout)")
    p.set_defaults(func=_cmd_infer)

    p = sub.add_parser("greedy-bench", help="excess-bits benchmark CSV")
    p.add_argument("--n", default="2:20", help="state counts, e.g. 2:20 or 4,8,16")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_greedy_bench)

    p = sub.add_parser(
        "synth-identifiability", help="direction-recovery experiment CSV"
    )
    p.add_argument("--n", default="16", help="state counts, e.g. 16 or 4,8,16")
    p.add_argument("--theta", type=int, default=None, help="default n*(n-1)")
    p.add_argument("--sigma", default="2:8", help="log-normal sweep, e.g. 2:8")
    p.add_argument("--trials", type=int, default=100, help="kept trials per sigma")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--entropy-cap", type=float, default=None, help="default log2(n) bits"
    )
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_synth_identifiability)

    p = sub.add_parser("eval-pairs", help="evaluate a cause-effect pair directory")
    p.add_argument("--path", required=True, help="pair directory")
    p.add_argument("--t", default="0:0.5:0.05", help="threshold grid")
    p.add_argument(
        "--alpha",
        type=float,
        default=None,
        help=f"CI level (default 0.05; env {ALPHA_ENV} overrides)",
    )
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=_cmd_eval_pairs)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        code, outputs = args.func(args)
    except PairsError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    _emit_manifest(args, outputs, started)
    return code


if __name__ == "__main__":
    sys.exit(main())
