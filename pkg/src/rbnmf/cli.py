"""Command-line front end.

Subcommands: ``synth`` (write a synthetic factorizable target),
``factorize`` (run a solver on an RBM1 file), ``train`` / ``evaluate``
(the recognition pipeline), and ``gradcheck`` (finite-difference
verification of the analytic gradients).

Exit codes: 0 success, 1 usage/config error, 2 I/O error, 3 solver
failure.  All outputs are deterministic for a fixed ``--seed``; no
timestamps are embedded.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import dataset, io, recognition, solver
from .matrix import RBMatrix, ShapeMismatchError, SingularComponentError
from .recognition import DEFAULT_COND_THRESHOLD, EncodingFailedError
from .solver import ConfigError, FeasibilityError, IterationRecord, SolverConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_SOLVER = 3


class CLIUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIUsageError(message)


_CONFIG_FIELDS = {
    "rank": int, "tol": float, "max_iters": int, "mu": float, "sigma": float,
    "delta": float, "seed": int, "armijo_cap": int, "step_floor": float,
    "variant": str, "representation": str,
}


def _read_config_file(path: Path) -> dict:
    values = {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise CLIUsageError(f"cannot read config file: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CLIUsageError(f"{path}:{lineno}: expected key=value")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_FIELDS:
            raise CLIUsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_FIELDS[key](raw.strip())
        except ValueError as exc:
            raise CLIUsageError(f"{path}:{lineno}: {exc}") from exc
    return values


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rank", "-l", type=int, default=None,
                   help="factorization rank")
    p.add_argument("--tol", type=float, default=None,
                   help="relative-change stopping tolerance")
    p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    p.add_argument("--mu", type=float, default=None,
                   help="backtracking shrink factor")
    p.add_argument("--sigma", type=float, default=None,
                   help="sufficient-decrease slope")
    p.add_argument("--delta", type=float, default=None,
                   help="adaptive step scaling factor")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--armijo-cap", dest="armijo_cap", type=int, default=None)
    p.add_argument("--step-floor", dest="step_floor", type=float, default=None)
    p.add_argument("--variant", choices=("rbpg", "rbipg", "real-nmf"),
                   default=None)
    p.add_argument("--mode", choices=("full", "pure"), default=None,
                   help="face representation (real block: channel average or zero)")
    p.add_argument("--config", type=Path, default=None,
                   help="key=value file; flags override it")


def _resolve_config(args) -> tuple[SolverConfig, str]:
    """Merge defaults, config file, and flags; returns (config, variant)."""
    values = {f.name: f.default for f in dataclasses.fields(SolverConfig)
              if f.default is not dataclasses.MISSING}
    if args.config is not None:
        values.update(_read_config_file(args.config))
    flag_attrs = {key: key for key in _CONFIG_FIELDS}
    flag_attrs["representation"] = "mode"
    for key, attr in flag_attrs.items():
        flag = getattr(args, attr, None)
        if flag is not None:
            values[key] = flag
    variant = values.pop("variant", "rbipg")
    if values.get("rank") is None:
        raise CLIUsageError("--rank is required (or rank= in the config file)")
    config = SolverConfig(variant="rbipg" if variant == "real-nmf" else variant,
                          **values)
    return config, variant


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- synth ---------------------------------------------------------------------

def cmd_synth(args) -> int:
    out = _out_dir(args)
    rank = args.rank if args.rank is not None else 4
    seed = args.seed if args.seed is not None else 0
    X, W_true, H_true = solver.make_synthetic_instance(args.M, args.N, rank, seed)
    io.save_rbm(out / "X.rbm", X)
    io.save_rbm(out / "W_true.rbm", W_true)
    io.save_rbm(out / "H_true.rbm", H_true)
    print(f"wrote {out / 'X.rbm'} ({args.M}x{args.N}, planted rank {rank}, "
          f"seed {seed})")
    return EXIT_OK


# -- factorize ------------------------------------------------------------------

def _merge_real_histories(histories: list[list[IterationRecord]]
                          ) -> list[IterationRecord]:
    """Iteration-aligned aggregate of per-channel runs.

    Finished channels hold their final objective/res; alpha and beta
    average over channels still running at that iteration.
    """
    length = max(len(h) for h in histories)
    merged = []
    for i in range(length):
        rows = [h[min(i, len(h) - 1)] for h in histories]
        active = [h[i] for h in histories if i < len(h)]
        objective = sum(r.objective for r in rows)
        res = float(np.sqrt(sum(r.res ** 2 for r in rows)))
        alpha = float(np.mean([r.alpha for r in active]))
        beta = float(np.mean([r.beta for r in active]))
        rel = max(r.rel_change for r in active)
        evals = sum(r.armijo_evals for r in active)
        merged.append(IterationRecord(i, objective, res, alpha, beta, rel, evals))
    return merged


def _factorize_real(X: RBMatrix, config: SolverConfig, variant_mode: str,
                    out: Path) -> int:
    blocks = X.blocks() if variant_mode == "full" else X.blocks()[1:]
    results = []
    for idx, channel in enumerate(blocks):
        cfg = dataclasses.replace(config, seed=config.seed + idx)
        results.append(solver.solve_real_nmf(channel, cfg))

    w_blocks = [r.W for r in results]
    h_blocks = [r.H for r in results]
    if variant_mode == "pure":
        w_blocks.insert(0, np.zeros_like(w_blocks[0]))
        h_blocks.insert(0, np.zeros_like(h_blocks[0]))
    io.save_rbm(out / "W.rbm", RBMatrix(*w_blocks))
    io.save_rbm(out / "H.rbm", RBMatrix(*h_blocks))
    history = _merge_real_histories([r.history for r in results])
    io.write_history_csv(out / "history.csv", history)

    kkt = max(solver.real_kkt_residual(c, r.W, r.H)
              for c, r in zip(blocks, results))
    statuses = {r.status for r in results}
    if "stagnated" in statuses:
        status = "stagnated"
    elif statuses == {"converged"}:
        status = "converged"
    else:
        status = "max_iters"
    final = history[-1]
    print(f"objective: {final.objective!r}")
    print(f"res: {final.res!r}")
    print(f"kkt_residual: {kkt!r}")
    print(f"status: {status}")
    return EXIT_OK


def cmd_factorize(args) -> int:
    config, variant = _resolve_config(args)
    X = io.load_rbm(args.input)
    out = _out_dir(args)
    if variant == "real-nmf":
        return _factorize_real(X, config, config.representation, out)

    result = solver.solve(X, config)
    io.save_rbm(out / "W.rbm", result.W)
    io.save_rbm(out / "H.rbm", result.H)
    io.write_history_csv(out / "history.csv", result.history)
    final = result.history[-1]
    kkt = solver.kkt_residual(X, result.W, result.H)
    print(f"objective: {final.objective!r}")
    print(f"res: {final.res!r}")
    print(f"kkt_residual: {kkt!r}")
    print(f"status: {result.status}")
    return EXIT_OK


# -- train / evaluate ---------------------------------------------------------------

def _image_size(args) -> tuple[int, int] | None:
    if (args.width is None) != (args.height is None):
        raise CLIUsageError("--width and --height must be given together")
    if args.width is None:
        return None
    return (args.width, args.height)


def cmd_train(args) -> int:
    config, variant = _resolve_config(args)
    if variant == "real-nmf":
        raise CLIUsageError("train supports the rbpg/rbipg variants only")
    samples = dataset.load_split(args.manifest, "train", _image_size(args))
    if not samples:
        raise CLIUsageError("manifest has no train rows")
    gallery = recognition.build_gallery(samples, config,
                                        cond_threshold=args.cond_threshold)
    out = _out_dir(args)
    io.save_rbm(out / "W.rbm", gallery.W)
    io.save_rbm(out / "encodings.rbm", gallery.h_train)
    io.save_rbm(out / "hfactor.rbm", gallery.h_factor)
    meta = {
        "mode": gallery.mode,
        "rows": gallery.image_shape[0],
        "cols": gallery.image_shape[1],
        "rank": config.rank,
        "labels": gallery.labels,
        "sec": recognition.compute_sec(gallery.h_factor),
        "basis_sparsity": recognition.compute_basis_sparsity(gallery.W),
        "res": recognition.compute_res(gallery.x, gallery.W, gallery.h_factor),
    }
    (out / "gallery.json").write_text(json.dumps(meta, sort_keys=True, indent=2)
                                      + "\n")
    print(f"trained gallery: {gallery.size} samples, rank {config.rank}, "
          f"mode {gallery.mode}")
    print(f"sec: {meta['sec']!r}")
    print(f"basis_sparsity: {meta['basis_sparsity']!r}")
    print(f"res: {meta['res']!r}")
    return EXIT_OK


def _load_gallery(path: Path) -> tuple[recognition.Gallery, dict]:
    meta = json.loads((path / "gallery.json").read_text())
    gallery = recognition.Gallery(
        labels=list(meta["labels"]),
        W=io.load_rbm(path / "W.rbm"),
        h_train=io.load_rbm(path / "encodings.rbm"),
        mode=meta["mode"],
        image_shape=(meta["rows"], meta["cols"]),
        h_factor=io.load_rbm(path / "hfactor.rbm"),
    )
    return gallery, meta


def cmd_evaluate(args) -> int:
    gallery, meta = _load_gallery(Path(args.gallery))
    if args.mode is not None and args.mode != gallery.mode:
        raise ConfigError(
            f"gallery was trained in {gallery.mode!r} mode; refusing to "
            f"evaluate in {args.mode!r} (mixed modes are not supported)")
    size = _image_size(args)
    samples = dataset.load_split(args.manifest, "test", size)
    if not samples:
        raise CLIUsageError("manifest has no test rows")
    report = recognition.evaluate_gallery(gallery, samples,
                                          cond_threshold=args.cond_threshold)
    out = _out_dir(args)
    payload = {
        "accuracy": report.accuracy,
        "per_sample": [{"path": r.path, "true": r.true_label,
                        "pred": r.predicted, "score": r.score}
                       for r in report.samples],
        "sec": meta["sec"],
        "basis_sparsity": meta["basis_sparsity"],
        "res": meta["res"],
    }
    (out / "report.json").write_text(json.dumps(payload, sort_keys=True,
                                                indent=2) + "\n")
    lines = ["path,true,pred,score"]
    for r in report.samples:
        lines.append(f"{r.path},{r.true_label},{r.predicted},{r.score!r}")
    (out / "report.csv").write_text("\n".join(lines) + "\n")
    print(f"accuracy: {report.accuracy!r}")
    return EXIT_OK


# -- gradcheck -----------------------------------------------------------------------

def cmd_gradcheck(args) -> int:
    results = solver.gradient_check(n_seeds=args.seeds, base_seed=args.seed,
                                    eps=args.eps)
    print("seed,max_rel_error")
    for seed, err in results:
        print(f"{seed},{err!r}")
    worst = max(err for _, err in results)
    print(f"max: {worst!r} (threshold {args.threshold!r})")
    return EXIT_OK if worst <= args.threshold else EXIT_SOLVER


# -- wiring ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="rbnmf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic factorizable target")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--rank", "-l", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("factorize", help="factorize an RBM1 matrix file")
    p.add_argument("input", help="path to an RBM1 container")
    p.add_argument("--out", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("train", help="build a recognition gallery")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--cond-threshold", dest="cond_threshold", type=float,
                   default=DEFAULT_COND_THRESHOLD)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="classify the test split of a manifest")
    p.add_argument("--gallery", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("full", "pure"), default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--cond-threshold", dest="cond_threshold", type=float,
                   default=DEFAULT_COND_THRESHOLD)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--threshold", type=float, default=1e-5)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (CLIUsageError, ConfigError, ShapeMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FeasibilityError, SingularComponentError, EncodingFailedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
