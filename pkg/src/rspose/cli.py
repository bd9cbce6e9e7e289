"""Command line interface: ``rspose {synth,solve,ransac,sweep,rectify}``.

Exit codes: 0 success, 1 usage or I/O error, 2 no feasible model,
3 degenerate configuration. ``RSPOSE_THREADS`` caps worker threads.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict


from . import __version__
from .driver import IterConfig, run
from .errors import DEGENERACY_ERRORS, RsPoseError
from .experiments import AXES, SweepSpec, sweep, write_csv
from .io import DatasetFile, gt_block, model_from_dict, read_result, result_dict, write_result
from .rectify import read_pgm, rectify_image, write_pgm
from .robust import RansacConfig, ransac, refine
from .synth import SynthConfig, config_dict, generate

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_DEGENERATE = 0, 1, 2, 3
SOLVER_NAMES = {"r7pf": "R7Pf", "r7pfr": "R7Pfr"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def threads():
    try:
        return max(1, int(os.environ.get("RSPOSE_THREADS", "1")))
    except ValueError:
        return 1


def _iter_config(args):
    return IterConfig(
        k_max=args.k_max,
        eps_err=args.eps_err,
        solver_kind=SOLVER_NAMES[args.solver],
        init=args.init,
    )


def _add_iter_flags(p):
    p.add_argument("--solver", choices=sorted(SOLVER_NAMES), default="r7pf")
    p.add_argument("--k-max", type=int, default=5)
    p.add_argument("--eps-err", type=float, default=1e-10)
    p.add_argument("--init", choices=("dlt", "identity"), default="dlt")


def _add_scene_flags(p):
    p.add_argument("--n-points", type=int, default=7)
    p.add_argument("--rot-velocity", type=float, default=0.0, help="max deg/frame")
    p.add_argument("--trans-velocity", type=float, default=0.0, help="max fraction of distance/frame")
    p.add_argument("--exact-motion", action="store_true", help="use the maxima as magnitudes")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="normalized units")
    p.add_argument("--noise", type=float, default=0.0, help="RMS pixel noise")
    p.add_argument("--outliers", type=float, default=0.0, help="outlier fraction")
    p.add_argument("--orientation", choices=("identity", "random"), default="random")
    p.add_argument("--fixed-center", action="store_true")
    p.add_argument("--width", type=int, default=2000)
    p.add_argument("--height", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)


def _scene_config(args):
    return SynthConfig(
        n_points=args.n_points,
        rot_velocity_max=args.rot_velocity,
        trans_velocity_max=args.trans_velocity,
        exact_motion=args.exact_motion,
        lambda_true=args.lam,
        noise_px=args.noise,
        outlier_fraction=args.outliers,
        orientation_mode=args.orientation,
        fixed_center=args.fixed_center,
        seed=args.seed,
        width=args.width,
        height=args.height,
    )


def cmd_synth(args):
    cfg = _scene_config(args)
    ds = generate(cfg)
    gt = gt_block(ds.model, ds.R0, cfg.scale, cfg.seed, config_dict(cfg))
    out = DatasetFile.from_correspondences(
        ds.corrs, cfg.width, cfg.height, labels=~ds.is_outlier, gt=gt
    )
    out.write(args.out)
    print(f"seed {cfg.seed}")
    return EXIT_OK


def _load_dataset(path, minimum):
    data = DatasetFile.read(path)
    if len(data) < minimum:
        raise UsageError(f"{path}: need at least {minimum} records, got {len(data)}")
    return data


def _parse_indices(text, n):
    idx = [int(t) for t in text.split(",") if t.strip()]
    if len(idx) != 7 or len(set(idx)) != 7:
        raise UsageError("--indices needs 7 distinct record indices")
    if min(idx) < 0 or max(idx) >= n:
        raise UsageError("--indices out of range")
    return idx


def cmd_solve(args):
    data = _load_dataset(args.dataset, 7)
    idx = _parse_indices(args.indices, len(data)) if args.indices else list(range(7))
    corrs = data.correspondences().subset(idx)
    cfg = _iter_config(args)
    try:
        est = run(corrs, cfg)
    except RsPoseError as e:
        return _fail(args, "solve", e, {"indices": idx})
    extra = {
        "residual": est.final_residual,
        "residual_history": list(est.residual_history),
        "iterations": est.iterations,
        "converged": est.converged,
        "indices": idx,
        "solver": cfg.solver_kind,
    }
    res = result_dict(
        "solve", model=est.model, scale=data.scale, r_gs=est.r_gs, extra=extra,
        config=asdict(cfg),
    )
    write_result(args.out, res)
    return EXIT_OK


def cmd_ransac(args):
    data = _load_dataset(args.dataset, 7)
    corrs = data.correspondences()
    cfg = RansacConfig(
        max_iterations=args.max_iterations,
        inlier_threshold_px=args.threshold,
        confidence=args.confidence,
        seed=args.seed,
        solver_kind=SOLVER_NAMES[args.solver],
        iter_config=_iter_config(args),
    )
    try:
        res = ransac(corrs, cfg, workers=threads())
    except RsPoseError as e:
        return _fail(args, "ransac", e)
    extra = {
        "inlier_count_before_lo": res.inlier_count,
        "iterations_run": res.iterations_run,
        "solver": cfg.solver_kind,
        "lo": bool(args.lo),
    }
    if args.lo:
        res = refine(corrs, res, cfg)
    extra["inlier_count"] = res.inlier_count
    extra["inlier_mask"] = [int(b) for b in res.inlier_mask]
    extra["mean_inlier_residual_px"] = res.mean_inlier_residual
    conf = {
        "max_iterations": cfg.max_iterations,
        "inlier_threshold_px": cfg.inlier_threshold_px,
        "confidence": cfg.confidence,
        "solver_kind": cfg.solver_kind,
        "iter_config": asdict(cfg.iter_config),
    }
    out = result_dict(
        "ransac", model=res.model, scale=data.scale, r_gs=res.r_gs, extra=extra,
        config=conf, seed=cfg.seed,
    )
    write_result(args.out, out)
    return EXIT_OK


def cmd_sweep(args):
    solvers = tuple(SOLVER_NAMES[s.strip()] for s in args.solvers.split(","))
    base = _scene_config(args)
    icfg = IterConfig(k_max=args.k_max, eps_err=args.eps_err, init=args.init)
    spec = SweepSpec(
        axis=args.axis,
        max_value=args.max,
        trials=args.trials,
        solvers=solvers,
        base=base,
        iter_config=icfg,
        joint_trans_max=args.joint_trans,
    )
    rows = sweep(spec, workers=threads())
    write_csv(args.out, rows)
    return EXIT_OK


def cmd_rectify(args):
    img = read_pgm(args.image)
    res = read_result(args.result)
    if res.get("error") or "model" not in res:
        raise UsageError(f"{args.result}: result file holds no model")
    write_pgm(args.out, rectify_image(img, model_from_dict(res["model"])))
    return EXIT_OK


def _fail(args, command, err, extra=None):
    code = EXIT_DEGENERATE if isinstance(err, DEGENERACY_ERRORS) else EXIT_INFEASIBLE
    res = result_dict(command, extra=extra, error={"type": type(err).__name__, "message": str(err)})
    write_result(args.out, res)
    print(f"rspose {command}: {type(err).__name__}: {err}", file=sys.stderr)
    return code


def build_parser():
    p = _Parser(prog="rspose", description="Rolling-shutter absolute pose with unknown focal length and distortion.")
    p.add_argument("--version", action="version", version=f"rspose {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="write a synthetic dataset")
    _add_scene_flags(s)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("solve", help="minimal 7-point solve")
    s.add_argument("dataset")
    _add_iter_flags(s)
    s.add_argument("--indices", help="comma separated record indices (default: first 7)")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("ransac", help="robust estimation over all records")
    s.add_argument("dataset")
    _add_iter_flags(s)
    s.set_defaults(solver="r7pfr")
    s.add_argument("--threshold", type=float, default=2.0, help="inlier threshold in pixels")
    s.add_argument("--confidence", type=float, default=0.99)
    s.add_argument("--max-iterations", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--lo", action="store_true", help="local optimization on the inliers")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_ransac)

    s = sub.add_parser("sweep", help="synthetic accuracy sweep written as CSV")
    s.add_argument("--axis", choices=AXES, required=True)
    s.add_argument("--max", type=float, required=True, help="value of the last increment")
    s.add_argument("--joint-trans", type=float, default=0.0,
                   help="with --axis rot_velocity, sweep translation to this value as well")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--solvers", default="r7pf,r7pfr")
    _add_scene_flags(s)
    s.set_defaults(noise=1.0, orientation="identity", init="identity")
    s.add_argument("--k-max", type=int, default=5)
    s.add_argument("--eps-err", type=float, default=1e-10)
    s.add_argument("--init", choices=("dlt", "identity"))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("rectify", help="remove radial and RS rotation distortion from a PGM image")
    s.add_argument("image")
    s.add_argument("result")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_rectify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as e:
        print(f"rspose {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        name = e.filename or ""
        print(f"rspose {args.command}: {name}: {e.strerror or e}", file=sys.stderr)
        return EXIT_USAGE
    except RsPoseError as e:
        code = EXIT_DEGENERATE if isinstance(e, DEGENERACY_ERRORS) else EXIT_INFEASIBLE
        print(f"rspose {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
