"""Command-line entry point.

Exit codes: 0 success, 2 invalid flags, 3 solver or pipeline failure,
4 missing calibration.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cache import ResonanceCache, resonances_to_json
from .errors import BallresError, CalibrationMissing
from .geometry import GeometricInvariants
from .heat import (CalibrationConstants, calibrate_alphas, default_t_grid,
                   fit_heat_coefficients, heat_samples_resonance, required_l_max)
from .radial import check_dimension
from .rigidity import TOL_PIPELINE, identify
from .scattering import CanonicalProductParams, det_S_direct, det_S_product, fit_constant_c
from .wave import singular_support_scan

EXIT_FLAGS = 2
EXIT_SOLVER = 3
EXIT_CALIBRATION = 4


class StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


def _fmt(x):
    return "%.17g" % x


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(r if isinstance(r, str) else _fmt(r) for r in row) + "\n")


def _odd_dimension(text):
    try:
        return check_dimension(int(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _floats(text):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (BallresError, ArithmeticError) as exc:
        if isinstance(exc, CalibrationMissing):
            raise
        raise StageError(name, exc) from exc


def cmd_resonances(args):
    cache = ResonanceCache(args.cache_dir)
    if args.no_cache:
        from .radial import ball_resonances
        rset = _stage("resonances", ball_resonances, args.d, args.rho, args.lmax, args.bc)
    else:
        rset = _stage("resonances", cache.get, args.d, args.rho, args.lmax, args.bc)
    text = resonances_to_json(rset)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _calibration(args, cache):
    path = Path(args.calibration) if args.calibration else cache.calibration_path(args.d)
    if args.calibrate:
        rho_c = args.calibration_rho
        t_grid = default_t_grid(args.tmin, args.tmax, args.nt)
        rset = _stage("resonances", cache.get, args.d, rho_c,
                      required_l_max(rho_c, args.tmin), "neumann")
        cal = _stage("calibration", calibrate_alphas, args.d, rho_c, t_grid,
                     args.n_max, resonances=rset)
        path.parent.mkdir(parents=True, exist_ok=True)
        cal.save(path)
        return cal
    if not path.exists():
        raise CalibrationMissing(
            f"no calibration for d={args.d} at {path}; rerun with --calibrate")
    cal = CalibrationConstants.load(path)
    if cal.d != args.d:
        raise CalibrationMissing(f"calibration at {path} is for d={cal.d}; rerun with --calibrate")
    return cal


def cmd_pipeline(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cache = ResonanceCache(args.cache_dir)
    summary = {"d": args.d, "tolerance": args.tol}
    if args.invariants:
        if len(args.invariants) != 3:
            print("error: --invariants needs three values A1,A2,A3", file=sys.stderr)
            return EXIT_FLAGS
        inv = GeometricInvariants(*args.invariants, args.d)
        summary["source"] = "invariants"
    else:
        cal = _calibration(args, cache)
        t_grid = default_t_grid(args.tmin, args.tmax, args.nt)
        l_max = args.lmax if args.lmax is not None else required_l_max(args.rho, args.tmin)
        rset = _stage("resonances", cache.get, args.d, args.rho, l_max, "neumann")
        params = CanonicalProductParams(args.d, 0.0, rset)
        samples = _stage("heat_trace", heat_samples_resonance, params, t_grid)
        _write_csv(out / "heat_samples.csv", ["t", "trace"], zip(samples.t, samples.values))
        fit = _stage("fit", fit_heat_coefficients, samples, args.d, cal.n_max)
        err = np.sqrt(np.diag(fit.covariance))
        _write_csv(out / "coefficients.csv", ["n", "a", "stderr", "c_entangled"],
                   [(str(n), a, e, "true" if n in fit.c_entangled else "false")
                    for n, (a, e) in enumerate(zip(fit.a, err))])
        inv = GeometricInvariants(*(fit.a[k + 1] / cal.alpha[k] for k in range(3)), args.d)
        summary.update(source="resonances", rho=args.rho, l_max=l_max,
                       calibration={"alpha": list(cal.alpha), "rho": cal.rho},
                       fit_residual=fit.residual)
    _write_csv(out / "invariants.csv", ["A1", "A2", "A3"], [inv.as_tuple()])
    res = _stage("identify", identify, inv, args.tol)
    summary["invariants"] = list(inv.as_tuple())
    summary["identify"] = {
        "union_of_equal_balls": res.is_union_of_equal_balls, "m": res.m, "rho": res.rho,
        "cs_defect": res.cs_defect, "af_defect": res.af_defect,
        "m_hat": res.m_hat, "rho_hat": res.rho_hat, "tolerance": res.tolerance,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    line = res.summary()
    (out / "summary.txt").write_text(line + "\n")
    print(line)
    return 0


def cmd_scatdet(args):
    lo, hi, n = args.grid
    grid = np.linspace(lo, hi, int(n))
    cache = ResonanceCache(args.cache_dir)
    header = ["lambda"]
    cols = [grid]
    direct = None
    if args.mode in ("direct", "both"):
        direct = np.array([_stage("direct", det_S_direct, args.d, args.rho, x, args.modes)
                           for x in grid])
        header += ["abs_direct", "arg_direct"]
        cols += [np.abs(direct), np.angle(direct)]
    c = resid = None
    if args.mode in ("product", "both"):
        rset = _stage("resonances", cache.get, args.d, args.rho, args.modes, "neumann")
        if args.mode == "both":
            c, resid = _stage("fit", fit_constant_c, rset,
                              lambda x: det_S_direct(args.d, args.rho, x, args.modes),
                              grid[grid > 0], return_residual=True)
        else:
            c = args.c
        prod = _stage("product", det_S_product, CanonicalProductParams(args.d, c, rset), grid)
        header += ["abs_product", "arg_product"]
        cols += [np.abs(prod), np.angle(prod)]
    rows = list(zip(*cols))
    if args.out:
        _write_csv(args.out, header, rows)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(_fmt(v) for v in row))
    if args.mode == "both":
        print(f"c = {_fmt(c)} residual = {resid:.3e}")
    return 0


def cmd_wavescan(args):
    cache = ResonanceCache(args.cache_dir)
    rset = _stage("resonances", cache.get, args.d, args.rho, args.lmax, "neumann")
    t = np.linspace(args.tmin, args.tmax, args.nt)
    table = singular_support_scan(rset, t, args.eps, args.convention)
    if args.out:
        table.to_csv(args.out)
    else:
        print("t,exponent")
        for ti, e in zip(table.t, table.exponents):
            print(f"{_fmt(ti)},{_fmt(e)}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ballres", description=__doc__.splitlines()[0])
    p.add_argument("--cache-dir", default=None, help="resonance cache directory")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("resonances", help="list ball resonances as JSON")
    r.add_argument("--d", type=_odd_dimension, default=3)
    r.add_argument("--rho", type=_positive, default=1.0)
    r.add_argument("--lmax", type=int, default=60)
    r.add_argument("--bc", choices=["neumann", "dirichlet"], default="neumann")
    r.add_argument("--out", help="output path (default stdout)")
    r.add_argument("--no-cache", action="store_true")
    r.set_defaults(func=cmd_resonances)

    q = sub.add_parser("pipeline", help="resonances -> heat fit -> invariants -> verdict")
    q.add_argument("--d", type=_odd_dimension, default=3)
    q.add_argument("--rho", type=_positive, default=1.0)
    q.add_argument("--lmax", type=int, default=None, help="default: enough for --tmin")
    q.add_argument("--tmin", type=_positive, default=1e-3)
    q.add_argument("--tmax", type=_positive, default=1e-1)
    q.add_argument("--nt", type=int, default=24)
    q.add_argument("--n-max", type=int, default=6)
    q.add_argument("--tol", type=_positive, default=TOL_PIPELINE)
    q.add_argument("--out", default="pipeline_out")
    q.add_argument("--calibrate", action="store_true", help="(re)compute the constants")
    q.add_argument("--calibration", help="calibration JSON path")
    q.add_argument("--calibration-rho", type=_positive, default=2.0)
    q.add_argument("--invariants", type=_floats, help="A1,A2,A3: skip the heat stage")
    q.set_defaults(func=cmd_pipeline)

    s = sub.add_parser("scatdet", help="scattering determinant on a real grid")
    s.add_argument("--d", type=_odd_dimension, default=3)
    s.add_argument("--rho", type=_positive, default=1.0)
    s.add_argument("--grid", type=_floats, default=[0.1, 3.0, 50], help="start,stop,count")
    s.add_argument("--mode", choices=["direct", "product", "both"], default="both")
    s.add_argument("--modes", type=int, default=60, help="highest angular mode")
    s.add_argument("--c", type=float, default=0.0, help="constant for --mode product")
    s.add_argument("--out")
    s.set_defaults(func=cmd_scatdet)

    w = sub.add_parser("wavescan", help="growth exponents of the smoothed wave trace")
    w.add_argument("--d", type=_odd_dimension, default=3)
    w.add_argument("--rho", type=_positive, default=1.0)
    w.add_argument("--lmax", type=int, default=60)
    w.add_argument("--tmin", type=_positive, default=0.5)
    w.add_argument("--tmax", type=_positive, default=4.0)
    w.add_argument("--nt", type=int, default=8)
    w.add_argument("--eps", type=_floats, default=[0.2, 0.1, 0.05])
    w.add_argument("--convention", choices=["decaying", "literal"], default="decaying")
    w.add_argument("--out")
    w.set_defaults(func=cmd_wavescan)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "lmax", None) is not None and args.lmax < 0:
        parser.error("--lmax must be nonnegative")
    if args.command == "scatdet" and (len(args.grid) != 3 or args.grid[2] < 2):
        parser.error("--grid needs start,stop,count with count >= 2")
    try:
        return args.func(args)
    except CalibrationMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except StageError as exc:
        print(f"error in stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FLAGS


if __name__ == "__main__":
    sys.exit(main())
