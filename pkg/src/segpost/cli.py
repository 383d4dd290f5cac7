"""Command-line interface.

Subcommands: posterior (confidence intervals and tracks), viterbi (MAP
segmentation), sample (joint posterior draws), select (BIC sweep over K),
simulate (the replicated loss study), bench (wall-time of the recursions).

Exit codes: 0 success, 2 input problem, 3 numerical degeneracy. All floats
print with 12 significant digits so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .core import ChangePointVector, ObservationSequence
from .emissions import (
    EXTERNAL,
    FAMILIES,
    GAUSSIAN_HOM,
    POISSON,
    EmissionModel,
    fit_mle,
    log_density_table,
    read_log_density_tsv,
)
from .engine import ChangePointReport, analyze
from .decode import viterbi
from .errors import DataError, DegeneracyError
from .model_select import select_k
from .prior import TransitionPrior, homogeneous, read_prior_tsv
from .sampler import sample_segmentations
from .simulate import run_study
from . import engine


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def read_values(path: str | Path) -> ObservationSequence:
    """One value per line, CSV/TSV/whitespace, optional header and label column."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read data file {path}: {exc}") from exc
    values: list[float] = []
    labels: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        for sep in ("\t", ",", ";"):
            if sep in line:
                fields = [f.strip() for f in line.split(sep)]
                break
        else:
            fields = line.split()
        try:
            values.append(float(fields[0]))
        except ValueError:
            if lineno == 1 and not values:
                continue  # header row
            raise DataError(
                f"non-numeric value {fields[0]!r} at {path}:{lineno}"
            ) from None
        if len(fields) > 1:
            labels.append(fields[1])
    if not values:
        raise DataError(f"no numeric data found in {path}")
    seq_labels = tuple(labels) if len(labels) == len(values) else None
    return ObservationSequence(np.asarray(values), seq_labels)


def _parse_seg(text: str) -> ChangePointVector:
    try:
        positions = tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise DataError(f"--seg expects comma-separated integers, got {text!r}")
    return ChangePointVector(positions)


def _parse_levels(text: str) -> tuple[float, ...]:
    try:
        levels = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise DataError(f"--ci expects comma-separated levels, got {text!r}")
    for level in levels:
        if not 0.0 < level < 1.0:
            raise DataError(f"confidence level {level} outside (0,1)")
    return levels


def _json_ready(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    return obj


def _report_dict(
    report: ChangePointReport, family: str, model: EmissionModel | None
) -> dict:
    out = {
        "n": report.n,
        "k": report.k,
        "family": family,
        "log_evidence": report.log_evidence,
        "changepoints": [
            {
                "rank": s.rank,
                "mode": s.mode,
                "prob_at_mode": s.prob_at_mode,
                "reference": s.reference,
                "prob_at_reference": s.prob_at_reference,
                "intervals": [
                    {
                        "level": ci.level,
                        "lower": ci.lower,
                        "upper": ci.upper,
                        "achieved": ci.achieved,
                    }
                    for ci in s.intervals
                ],
            }
            for s in report.changepoints
        ],
    }
    if model is not None and model.family != EXTERNAL:
        out["segment_locations"] = [p.location for p in model.params]
        if model.shared_scale is not None:
            out["shared_scale"] = model.shared_scale
    return _json_ready(out)


def _write_tracks(path: Path, report: ChangePointReport) -> None:
    with open(path, "w") as fh:
        cols = ["position"] + [f"p_state_{k + 1}" for k in range(report.k)]
        if report.posterior_mean is not None:
            cols.append("posterior_mean")
        fh.write("\t".join(cols) + "\n")
        for i in range(report.n):
            row = [str(i + 1)] + [_fmt(v) for v in report.state_posterior[i]]
            if report.posterior_mean is not None:
                row.append(_fmt(report.posterior_mean[i]))
            fh.write("\t".join(row) + "\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _build_prior(args, k: int, n: int) -> TransitionPrior:
    if getattr(args, "prior", None):
        prior = read_prior_tsv(args.prior)
        if (prior.k, prior.n) != (k, n):
            raise DataError(
                f"prior file is {prior.k} x {prior.n}, expected {k} x {n}"
            )
        return prior
    return homogeneous(k, n, args.eta)


def _build_inputs(args):
    """Shared ingestion for posterior/viterbi/sample: data, table, prior."""
    data = read_values(args.data) if args.data else None
    seg = _parse_seg(args.seg) if args.seg else None
    if getattr(args, "logdens", None):
        table = read_log_density_tsv(args.logdens, header=args.logdens_header)
        if data is not None and table.n != len(data):
            raise DataError(
                f"log-density table has {table.n} rows, data has {len(data)}"
            )
        if seg is not None and seg.k != table.k:
            raise DataError(
                f"--seg defines {seg.k} segments, table has {table.k} columns"
            )
        model = None
    else:
        if data is None:
            raise DataError("--data is required unless --logdens is given")
        if seg is None:
            raise DataError("--seg is required to fit emission parameters")
        model = fit_mle(data, seg, args.family)
        table = log_density_table(data, model)
    prior = _build_prior(args, table.k, table.n)
    return data, seg, model, table, prior


def _cmd_posterior(args) -> int:
    paths = args.data_paths if args.data_paths else [None]
    if len(paths) > 1:
        if args.tracks:
            raise DataError("--tracks applies to a single input; use --out-dir")
        if not args.out_dir:
            raise DataError("multiple --data files need --out-dir")
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        def one(path: str) -> None:
            sub = argparse.Namespace(**vars(args))
            sub.data = path
            _, seg, model, table, prior = _build_inputs(sub)
            report = analyze(table, prior, model, seg, args.levels)
            payload = _report_dict(report, args.family, model)
            (out_dir / (Path(path).stem + ".json")).write_text(
                json.dumps(payload, indent=2) + "\n"
            )

        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            list(pool.map(one, paths))
        return 0

    args.data = paths[0]
    _, seg, model, table, prior = _build_inputs(args)
    report = analyze(table, prior, model, seg, args.levels)
    if args.tracks:
        _write_tracks(Path(args.tracks), report)
    payload = _report_dict(report, args.family, model)
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_viterbi(args) -> int:
    args.data = args.data_paths[0] if args.data_paths else None
    _, _, _, table, prior = _build_inputs(args)
    cps, log_post = viterbi(table, prior)
    payload = _json_ready(
        {"changepoints": list(cps.positions), "log_posterior": log_post}
    )
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def _cmd_sample(args) -> int:
    args.data = args.data_paths[0] if args.data_paths else None
    _, _, _, table, prior = _build_inputs(args)
    state = engine.forward_backward(table, prior)
    samples = sample_segmentations(state, table, prior, args.nsamples, args.seed)
    lines = [",".join(str(p) for p in s.positions) for s in samples]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_select(args) -> int:
    data = read_values(args.data)
    best_k, best_cps, scored = select_k(data, args.kmax, args.family, args.eta)
    lines = ["k\tn_params\tlog_lik\tbic\tselected\tchangepoints"]
    for score, cps in scored:
        lines.append(
            "\t".join(
                [
                    str(score.k),
                    str(score.n_params),
                    _fmt(score.log_lik),
                    _fmt(score.bic),
                    "1" if score.k == best_k else "0",
                    ",".join(str(p) for p in cps.positions) or "-",
                ]
            )
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_simulate(args) -> int:
    family = GAUSSIAN_HOM if args.family in ("normal", "gaussian") else POISSON
    rows = run_study(
        family=family,
        theta1_values=tuple(args.theta1),
        n_replicates=args.replicates,
        seed=args.seed,
        n=args.n,
        k_max=args.kmax,
    )
    lines = ["theta1\tmetric\treplicates\tgreedy_post\ttruth_post\tk_mode"]
    for row in rows:
        k_mode = int(np.bincount(row.selected_k).argmax())
        lines.append(
            "\t".join(
                [
                    _fmt(row.theta1),
                    row.metric,
                    str(row.n_replicates),
                    _fmt(row.greedy_post),
                    _fmt(row.truth_post),
                    str(k_mode),
                ]
            )
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def synthetic_instance(n: int, k: int, seed: int = 0):
    """Evenly segmented gaussian sequence and its fitted table, for timing."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    bounds = np.linspace(0, n, k + 1).astype(int)
    values = rng.normal(0.0, 1.0, n)
    for idx in range(1, k, 2):
        values[bounds[idx] : bounds[idx + 1]] += 1.0
    data = ObservationSequence(values)
    seg = ChangePointVector(tuple(int(b) for b in bounds[1:-1]))
    model = fit_mle(data, seg, GAUSSIAN_HOM)
    return data, seg, model, log_density_table(data, model)


def bench_once(n: int, k: int, repeats: int, seed: int = 0) -> float:
    """Median wall-time of both passes plus every posterior quantity."""
    _, seg, model, table = synthetic_instance(n, k, seed)
    prior = homogeneous(k, n, 0.5)
    analyze(table, prior, model, seg)  # warm the JIT cache before timing
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        analyze(table, prior, model, seg)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def _cmd_bench(args) -> int:
    lines = ["n\tk\tseconds"]
    for n in args.n:
        seconds = bench_once(n, args.k, args.repeats)
        lines.append(f"{n}\t{args.k}\t{_fmt(seconds)}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",")]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segpost",
        description="Exact change-point location uncertainty via a "
        "constrained hidden Markov model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_args(p):
        p.add_argument("--data", dest="data_paths", nargs="+", metavar="FILE",
                       help="input values, one per line (CSV/TSV)")
        p.add_argument("--seg", help="1-based last index of each segment, "
                       "comma-separated", required=False)
        p.add_argument("--family", default=GAUSSIAN_HOM,
                       choices=[f for f in FAMILIES if f != EXTERNAL])
        p.add_argument("--eta", type=float, default=0.5,
                       help="homogeneous jump probability (default 0.5)")
        p.add_argument("--prior", metavar="FILE",
                       help="K x n TSV of jump probabilities")
        p.add_argument("--logdens", metavar="FILE",
                       help="external n x K TSV of log-densities")
        p.add_argument("--logdens-header", action="store_true",
                       help="external table has a header row")
        p.add_argument("--out", metavar="FILE", help="write output here "
                       "instead of stdout")

    p = sub.add_parser("posterior", help="change-point report and tracks")
    add_model_args(p)
    p.add_argument("--ci", dest="levels", type=_parse_levels, default=(0.95,),
                   help="confidence levels, e.g. 0.95,0.9")
    p.add_argument("--tracks", metavar="FILE",
                   help="also write per-position posterior TSV")
    p.add_argument("--out-dir", help="output directory for multi-file input")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for multi-file input")
    p.set_defaults(func=_cmd_posterior)

    p = sub.add_parser("viterbi", help="most probable change-point set")
    add_model_args(p)
    p.set_defaults(func=_cmd_viterbi)

    p = sub.add_parser("sample", help="joint samples of change-point sets")
    add_model_args(p)
    p.add_argument("--nsamples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("select", help="BIC sweep over the number of segments")
    p.add_argument("--data", required=True, metavar="FILE")
    p.add_argument("--kmax", type=int, default=20)
    p.add_argument("--family", default=GAUSSIAN_HOM,
                   choices=[f for f in FAMILIES if f != EXTERNAL])
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("simulate", help="replicated posterior-mean loss study")
    p.add_argument("--family", default="normal",
                   choices=["normal", "gaussian", "poisson"])
    p.add_argument("--theta1", type=_float_list, default=[2.0],
                   help="elevated segment means, comma-separated")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--kmax", type=int, default=15)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("bench", help="time the recursions on synthetic data")
    p.add_argument("--n", type=_int_list, default=[14241],
                   help="sequence lengths, comma-separated")
    p.add_argument("--k", type=int, default=11)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--out", metavar="FILE")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegeneracyError as exc:
        print(f"segpost: degenerate model: {exc}", file=sys.stderr)
        return 3
    except (DataError, ValueError, OSError) as exc:
        print(f"segpost: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
