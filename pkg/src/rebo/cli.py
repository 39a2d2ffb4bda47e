"""Command-line entry point: ``rebo <group> <command> ...``.

Exit status is 0 on success, 1 on a domain error and 2 on a usage error.
Files are written under the output directory (``--outdir``, else
``$REBO_OUTPUT_DIR``, else the working directory), each with a
``<name>.manifest.json`` beside it.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import warnings
from dataclasses import asdict, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import juggle as jg
from . import stiffness as st
from .config import default_operating_point, double_layer_table, load_rig, stiffness_points
from .errors import ReboError
from .kinematics import cartesian_to_lengths, lengths_to_cartesian, lengths_to_motor, lengths_to_spherical
from .pattern import ReboParams, generate_pattern, export_svg, inner_layer_params
from .plot import PlotStyle, Series, plot_xy
from .workspace import (REFERENCE_VOLUME_MM3, boundary_trajectories, calibrate_d, volume_hull,
                        volume_jacobian)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


class Context:
    def __init__(self, argv, outdir):
        self.argv = list(argv)
        self.outdir = Path(outdir).resolve()
        self.written: list[Path] = []

    def path(self, name) -> Path:
        p = (self.outdir / name).resolve()
        if self.outdir != p and self.outdir not in p.parents:
            raise ReboError(f"output {name} lies outside the output directory {self.outdir}")
        return p

    def write(self, name, data: bytes, params: dict, seed=None) -> Path:
        p = self.path(name)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(data)
        canon = json.dumps(params, sort_keys=True, default=str)
        manifest = {
            "command": ["rebo", *self.argv],
            "config_hash": hashlib.sha256(canon.encode()).hexdigest(),
            "parameters": json.loads(canon),
            "seed": seed,
            "tool_version": __version__,
            "timestamp": _timestamp(),
        }
        p.with_name(p.name + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        self.written.append(p)
        print(f"wrote {p}")
        return p


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return now.isoformat(timespec="seconds")


def _triple(text):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return vals


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _range_spec(text):
    """``start:step:stop`` inclusive, or a comma list."""
    if ":" not in text:
        return _floats(text)
    try:
        a, s, b = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:step:stop, got {text!r}")
    if s <= 0 or b < a:
        raise argparse.ArgumentTypeError(f"bad range {text!r}")
    n = int(round((b - a) / s))
    return [a + i * s for i in range(n + 1)]


def _csv_bytes(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.10g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue().encode()


# -- pattern ---------------------------------------------------------------

def cmd_pattern_gen(a, ctx):
    params = ReboParams(a.ao, a.bo, a.dz, a.nr, a.nl, a.beta)
    if a.inner_clearance is not None:
        params = inner_layer_params(params, a.inner_clearance, beta=a.inner_beta)
    pat = generate_pattern(params, invert=a.invert)
    ctx.write(a.output, export_svg(pat), asdict(params))
    g = pat.geometry
    print(f"theta_deg={np.degrees(g.theta):.6f} alpha_deg={np.degrees(g.alpha):.6f} "
          f"h_mm={g.h:.6f} rest_length_mm={g.rest_length:.6f} creases={len(pat.creases)}")


# -- stiffness -------------------------------------------------------------

def cmd_stiffness_predict(a, ctx):
    print(f"k_npm={st.predict_stiffness(a.beta):.4f}")


def cmd_stiffness_fit(a, ctx):
    pts = []
    for path in a.csv:
        with open(path, newline="") as fh:
            rows = csv.DictReader(ln for ln in fh if not ln.startswith("#"))
            pts += [(float(r["beta_deg"]), float(r["k_npm"])) for r in rows]
    m = st.fit_affine(pts)
    print(f"slope_npm_per_deg={m.slope:.6f} intercept_npm={m.intercept:.6f} r_squared={m.r_squared:.6f}")


def cmd_stiffness_estimate(a, ctx):
    for tr in st.read_traces(a.csv):
        est = st.estimate_stiffness(tr, a.fraction)
        label = f"trial={tr.trial_id} " if tr.trial_id else ""
        print(f"{label}k_npm={est.k:.4f} fit_range_mm={est.fit_range[0]:.4g}:{est.fit_range[1]:.4g} "
              f"r_squared={est.r_squared:.6f}")


def cmd_stiffness_stack(a, ctx):
    print(f"k_npm={st.stack_stiffness(a.k):.4f}")


def cmd_stiffness_hysteresis(a, ctx):
    load = st.read_traces(a.loading)[0]
    unload = st.read_traces(a.unloading)[0]
    res = st.hysteresis_loss(load, unload)
    print(f"energy_j={res.energy:.6g}" + (" WARNING negative loop area" if res.negative else ""))


# -- kinematics ------------------------------------------------------------

def cmd_kin_fk(a, ctx):
    cfg = load_rig(a.config)
    r, th, ph = lengths_to_spherical(a.l, cfg)
    p = lengths_to_cartesian(a.l, cfg)
    print(f"r_mm={float(r):.9g} theta_rad={float(th):.9g} phi_rad={float(ph):.9g}")
    print(f"p_mm={p[0]:.9g},{p[1]:.9g},{p[2]:.9g}")


def cmd_kin_ik(a, ctx):
    cfg = load_rig(a.config)
    l = cartesian_to_lengths(a.p, cfg)
    q = lengths_to_motor(l, cfg)
    print(f"l_mm={l[0]:.9g},{l[1]:.9g},{l[2]:.9g}")
    print(f"q_m_rad={q[0]:.9g},{q[1]:.9g},{q[2]:.9g}")


# -- workspace -------------------------------------------------------------

def cmd_workspace_volume(a, ctx):
    cfg = load_rig(a.config)
    if a.method == "jacobian":
        res = volume_jacobian(cfg, a.grid)
    else:
        res = volume_hull(cfg, a.samples, a.seed)
    print(f"method={res.method} volume_mm3={res.volume:.4f} samples={res.samples} stderr_mm3={res.stderr:.4g}")


def cmd_workspace_boundary(a, ctx):
    cfg = load_rig(a.config)
    rows = [(i, *map(float, p)) for i, edge in enumerate(boundary_trajectories(cfg, a.density)) for p in edge]
    ctx.write(a.output, _csv_bytes(["edge_id", "x_mm", "y_mm", "z_mm"], rows),
              {"rig": cfg.to_mapping(), "density": a.density})


def cmd_workspace_calibrate(a, ctx):
    cfg = load_rig(a.config)
    d = calibrate_d(a.target, cfg, grid_density=a.grid)
    vol = volume_jacobian(replace(cfg, d=d), a.grid).volume
    print(f"d_mm={d:.9g} volume_mm3={vol:.4f}")


# -- juggling --------------------------------------------------------------

def _juggle_specs(a, p_com_mm=None):
    ball = jg.BallSpec(a.mass, a.e)
    p_mm = a.precompress_mm if p_com_mm is None else p_com_mm
    return ball, jg.JugglerSpec(a.kes, a.bs, p_mm * 1e-3)


def cmd_juggle_sim(a, ctx):
    ball, spec = _juggle_specs(a)
    tr = jg.simulate(ball, spec, a.h0_mm * 1e-3, a.cycles, seed=a.seed, sigma_e=a.sigma_e,
                     method=a.method)
    params = {"ball": asdict(ball), "spec": asdict(spec), "h0_mm": a.h0_mm, "cycles": a.cycles,
              "sigma_e": a.sigma_e, "method": a.method}
    ctx.write(a.output, tr.to_jsonl().encode(), params, seed=a.seed)
    tail = tr.apex_sequence[-min(10, len(tr.apex_sequence)):]
    print(f"died={tr.died} final_apex_mm={tail[-1] * 1e3:.4f}")


def cmd_juggle_fixed_point(a, ctx):
    ball, spec = _juggle_specs(a)
    fp = jg.find_fixed_point(ball, spec, bracket=(a.bracket_mm[0] * 1e-3, a.bracket_mm[1] * 1e-3),
                             method=a.method)
    print(f"h_star_mm={fp.h * 1e3:.6f} multiplier={fp.multiplier:.6f} stable={fp.stable} "
          f"degenerate={fp.degenerate}")


def cmd_juggle_calibrate(a, ctx):
    ball, spec = _juggle_specs(a)
    free = {"e": "restitution", "bs": "damping"}[a.free]
    b2, s2 = jg.calibrate_losses(a.target_apex_mm * 1e-3, ball, spec, free=free, method=a.method)
    fp = jg.find_fixed_point(b2, s2, method=a.method)
    print(f"e={b2.restitution:.10g} b_s_nspm={s2.b_s:.10g} h_star_mm={fp.h * 1e3:.6f} "
          f"multiplier={fp.multiplier:.6f}")


def sweep_rows(ball, spec, p_values_mm, method="analytic"):
    rows = []
    for p_mm in sorted(p_values_mm):
        s = replace(spec, p_com=p_mm * 1e-3)
        try:
            fp = jg.find_fixed_point(ball, s, method=method)
        except ReboError:
            rows.append((p_mm, float("nan"), float("nan"), jg.preload_energy(s), float("nan")))
            continue
        t_hit = jg.hit(jg.flight(fp.h, s)[0], ball, s, method).t_hit
        e = jg.preload_energy(s)
        rows.append((p_mm, fp.h * 1e3, fp.multiplier, e, e / t_hit))
    return rows


SWEEP_HEADER = ["p_com_mm", "h_star_mm", "multiplier", "energy_j", "power_w"]


def cmd_juggle_sweep(a, ctx):
    ball, spec = _juggle_specs(a, p_com_mm=0.0)
    rows = sweep_rows(ball, spec, a.precompress_mm, a.method)
    ctx.write(a.output, _csv_bytes(SWEEP_HEADER, rows),
              {"ball": asdict(ball), "spec": asdict(spec), "p_com_mm": a.precompress_mm})


# -- figure reproduction ---------------------------------------------------

def repro_fig2d(a, ctx):
    pts = np.array(stiffness_points())
    fit = st.fit_affine(pts)
    betas = np.linspace(15, 45, 31)
    law = st.REFERENCE_MODEL
    svg = plot_xy([
        Series("fixture points", pts[:, 0], pts[:, 1], "markers"),
        Series(f"fit k={fit.slope:.2f}b{fit.intercept:+.1f} (R2={fit.r_squared:.3f})",
               betas, fit.slope * betas + fit.intercept),
        Series("published law", betas, law.slope * betas + law.intercept),
    ], PlotStyle("Stiffness vs cone angle", "cone angle beta (deg)", "stiffness (N/m)"))
    ctx.write("fig2d.svg", svg, {"points": pts.tolist()})
    for row in double_layer_table():
        s = st.stack_stiffness([row["inner_k_npm"], row["outer_k_npm"]])
        print(f"row {int(row['row'])}: sum={s:.0f} measured={row['double_k_npm']:.0f} "
              f"deviation={abs(s - row['double_k_npm']) / row['double_k_npm'] * 100:.2f}%")


def repro_fig5a(a, ctx):
    cfg = load_rig(a.config)
    edges = boundary_trajectories(cfg, 100)
    series = [Series(f"edge {i}", e[:, 0], e[:, 2]) for i, e in enumerate(edges)]
    ctx.write("fig5a.svg", plot_xy(series, PlotStyle("Workspace boundary (x-z projection)",
                                                     "x (mm)", "z (mm)")), {"rig": cfg.to_mapping()})
    jac = volume_jacobian(cfg)
    hull = volume_hull(cfg, 100_000, a.seed)
    print(f"jacobian_volume_mm3={jac.volume:.2f} hull_volume_mm3={hull.volume:.2f} "
          f"published={REFERENCE_VOLUME_MM3}")


def repro_fig6c(a, ctx):
    ball, spec, target = default_operating_point()
    series = []
    for p_mm in (5.0, 10.0, 12.5, 15.0, 17.5):
        t, chi = jg.sample_path(ball, replace(spec, p_com=p_mm * 1e-3), target, 6, dt=1e-3)
        series.append(Series(f"p_com {p_mm} mm", t, chi * 1e3))
    ctx.write("fig6c.svg", plot_xy(series, PlotStyle("1 kg shot trajectories", "time (s)",
                                                     "ball height (mm)")), {"ball": asdict(ball)})


def repro_fig6d(a, ctx):
    ball, spec, _ = default_operating_point()
    grid = _range_spec("5:1.25:17.5")
    series, rows_all = [], []
    for mass in (1.0, 1.4):
        b = replace(ball, mass=mass, label=f"{mass} kg shot")
        rows = sweep_rows(b, spec, grid)
        rows = [r for r in rows if np.isfinite(r[1])]
        rows_all += [(mass, *r) for r in rows]
        series.append(Series(b.label, [r[0] for r in rows], [r[1] for r in rows], "both"))
    ctx.write("fig6d.svg", plot_xy(series, PlotStyle("Apex fixed point vs pre-compression",
                                                     "pre-compression (mm)", "apex height (mm)")),
              {"ball": asdict(ball), "spec": asdict(spec)})
    ctx.write("fig6d.csv", _csv_bytes(["mass_kg", *SWEEP_HEADER], rows_all), {"grid": grid})


def repro_fig6e(a, ctx):
    ball, spec, _ = default_operating_point()
    series = []
    for h0 in a.h0_mm:
        tr = jg.simulate(ball, spec, h0 * 1e-3, 10)
        apex = np.array(tr.apex_sequence) * 1e3
        series.append(Series(f"h0 {h0:g} mm", np.arange(len(apex)), apex, "both"))
    ctx.write("fig6e.svg", plot_xy(series, PlotStyle("Apex vs iteration (1 kg, 12.5 mm)",
                                                     "iteration", "apex height (mm)")),
              {"h0_mm": a.h0_mm, "ball": asdict(ball), "spec": asdict(spec)})
    fp = jg.find_fixed_point(ball, spec)
    print(f"h_star_mm={fp.h * 1e3:.4f} multiplier={fp.multiplier:.4f}")


REPRO = {"fig2d": repro_fig2d, "fig5a": repro_fig5a, "fig6c": repro_fig6c,
         "fig6d": repro_fig6d, "fig6e": repro_fig6e}


def cmd_repro(a, ctx):
    REPRO[a.target](a, ctx)


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rebo", description="Origami bellows spring design and juggling simulation")
    p.add_argument("--outdir", help="output directory (default $REBO_OUTPUT_DIR or cwd)")
    p.add_argument("--version", action="version", version=f"rebo {__version__}")
    groups = p.add_subparsers(dest="group", parser_class=_Parser)

    g = groups.add_parser("pattern").add_subparsers(dest="cmd", parser_class=_Parser, required=True)
    c = g.add_parser("gen", help="generate a crease pattern SVG")
    c.add_argument("--beta", type=float, required=True, help="cone angle (deg)")
    c.add_argument("--ao", type=float, required=True)
    c.add_argument("--bo", type=float, required=True)
    c.add_argument("--dz", type=float, required=True)
    c.add_argument("--nr", type=int, required=True)
    c.add_argument("--nl", type=int, required=True)
    c.add_argument("--inner-clearance", type=float, help="emit the nested inner layer instead (mm)")
    c.add_argument("--inner-beta", type=float, help="cone angle of the inner layer (deg)")
    c.add_argument("--invert", action="store_true", help="swap mountain and valley")
    c.add_argument("-o", "--output", required=True)
    c.set_defaults(func=cmd_pattern_gen)

    g = groups.add_parser("stiffness").add_subparsers(dest="cmd", parser_class=_Parser, required=True)
    c = g.add_parser("predict")
    c.add_argument("--beta", type=float, required=True)
    c.set_defaults(func=cmd_stiffness_predict)
    c = g.add_parser("fit", help="affine fit of beta_deg,k_npm CSV files")
    c.add_argument("csv", nargs="+")
    c.set_defaults(func=cmd_stiffness_fit)
    c = g.add_parser("estimate")
    c.add_argument("csv")
    c.add_argument("--fraction", type=float, default=2.0 / 3.0)
    c.set_defaults(func=cmd_stiffness_estimate)
    c = g.add_parser("stack")
    c.add_argument("k", type=float, nargs="+")
    c.set_defaults(func=cmd_stiffness_stack)
    c = g.add_parser("hysteresis")
    c.add_argument("loading")
    c.add_argument("unloading")
    c.set_defaults(func=cmd_stiffness_hysteresis)

    g = groups.add_parser("kin").add_subparsers(dest="cmd", parser_class=_Parser, required=True)
    c = g.add_parser("fk")
    c.add_argument("--l", type=_triple, required=True, help="l1,l2,l3 (mm)")
    c.add_argument("--config")
    c.set_defaults(func=cmd_kin_fk)
    c = g.add_parser("ik")
    c.add_argument("--p", type=_triple, required=True, help="x,y,z (mm)")
    c.add_argument("--config")
    c.set_defaults(func=cmd_kin_ik)

    g = groups.add_parser("workspace").add_subparsers(dest="cmd", parser_class=_Parser, required=True)
    c = g.add_parser("volume")
    c.add_argument("--method", choices=("jacobian", "hull"), default="jacobian")
    c.add_argument("--samples", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--grid", type=int, default=64)
    c.add_argument("--config")
    c.set_defaults(func=cmd_workspace_volume)
    c = g.add_parser("boundary")
    c.add_argument("-o", "--output", required=True)
    c.add_argument("--density", type=int, default=50)
    c.add_argument("--config")
    c.set_defaults(func=cmd_workspace_boundary)
    c = g.add_parser("calibrate-d")
    c.add_argument("--target", type=float, default=REFERENCE_VOLUME_MM3)
    c.add_argument("--grid", type=int, default=64)
    c.add_argument("--config")
    c.set_defaults(func=cmd_workspace_calibrate)

    g = groups.add_parser("juggle").add_subparsers(dest="cmd", parser_class=_Parser, required=True)

    def spec_args(c):
        c.add_argument("--mass", type=float, default=1.0, help="kg")
        c.add_argument("--kes", type=float, default=3105.0, help="N/m")
        c.add_argument("--bs", type=float, default=0.0, help="N*s/m")
        c.add_argument("--e", type=float, default=1.0, help="restitution")
        c.add_argument("--method", choices=("analytic", "rk4"), default="analytic")

    c = g.add_parser("sim")
    spec_args(c)
    c.add_argument("--precompress-mm", type=float, default=12.5)
    c.add_argument("--h0-mm", type=float, default=100.0)
    c.add_argument("--cycles", type=int, default=100)
    c.add_argument("--seed", type=int)
    c.add_argument("--sigma-e", type=float, default=0.0)
    c.add_argument("-o", "--output", default="trace.jsonl")
    c.set_defaults(func=cmd_juggle_sim)
    c = g.add_parser("fixed-point")
    spec_args(c)
    c.add_argument("--precompress-mm", type=float, default=12.5)
    c.add_argument("--bracket-mm", type=_floats, default=[0.0, 2000.0])
    c.set_defaults(func=cmd_juggle_fixed_point)
    c = g.add_parser("calibrate")
    spec_args(c)
    c.add_argument("--precompress-mm", type=float, default=12.5)
    c.add_argument("--target-apex-mm", type=float, required=True)
    c.add_argument("--free", choices=("e", "bs"), default="e")
    c.set_defaults(func=cmd_juggle_calibrate)
    c = g.add_parser("sweep")
    spec_args(c)
    c.add_argument("--precompress-mm", type=_range_spec, default=_range_spec("5:2.5:17.5"),
                   help="start:step:stop or comma list (mm)")
    c.add_argument("-o", "--output", default="sweep.csv")
    c.set_defaults(func=cmd_juggle_sweep)

    c = groups.add_parser("repro", help="regenerate a figure")
    c.add_argument("target", choices=sorted(REPRO))
    c.add_argument("--h0-mm", type=_floats, default=[10, 20, 60, 80, 100])
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--config")
    c.set_defaults(func=cmd_repro)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        sys.stderr.write(parser.format_help())
        return 2
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return 2
    if getattr(args, "func", None) is None:
        sys.stderr.write(parser.format_usage())
        return 2
    outdir = args.outdir or os.environ.get("REBO_OUTPUT_DIR") or os.getcwd()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args, Context(argv, outdir))
    except (ReboError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
