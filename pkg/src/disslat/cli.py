"""Command-line harness: config parsing, runs, sweeps and figure bundles.

Every run writes its outputs atomically (temp file + rename) into the
output directory together with a `manifest.json` describing the inputs
hash, package versions, per-step timings and the schema of each output
file.  CSV floats are written with their shortest round-trip
representation so identical configs give bit-identical files.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy

from . import __version__, config as cfg, dynamics, model, observables, oracle
from . import presets as pre
from . import spectra, superop as so, twobody as tb
from .errors import (
    DisslatError,
    GapClosed,
    MethodDisagreement,
    ReferenceOnSpectrum,
)
from .model import Boundary

OUTDIR_ENV = "DISSLAT_OUTDIR"
RHO_COLUMNS = ["n", "m", "re", "im"]


# ---------------------------------------------------------------------------
# formatting and atomic persistence

def format_value(x):
    """Shortest round-trip text for floats, plain str for the rest."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def atomic_write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


class RunWriter:
    """Collects outputs and timings for one run, then emits the manifest."""

    def __init__(self, outdir, subcommand, config_text, preset=None):
        self.outdir = outdir
        self.subcommand = subcommand
        self.config_text = config_text
        self.preset = preset
        self.outputs = {}
        self.timings = {}
        self._t0 = time.time()

    def csv(self, name, columns, rows, kind):
        write_csv(os.path.join(self.outdir, name), columns, rows)
        self.outputs[name] = {"kind": kind, "columns": list(columns)}

    def json(self, name, payload, kind):
        atomic_write_text(os.path.join(self.outdir, name),
                          json.dumps(payload, indent=2, sort_keys=True) + "\n")
        self.outputs[name] = {"kind": kind, "columns": []}

    def time_step(self, label, t_start):
        self.timings[label] = round(time.time() - t_start, 6)

    def finish(self):
        manifest = {
            "subcommand": self.subcommand,
            "preset": self.preset,
            "config_sha256": hashlib.sha256(
                self.config_text.encode()).hexdigest(),
            "config": self.config_text,
            "versions": {
                "disslat": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": sys.version.split()[0],
            },
            "timings": self.timings,
            "total_seconds": round(time.time() - self._t0, 6),
            "outputs": self.outputs,
        }
        atomic_write_text(os.path.join(self.outdir, "manifest.json"),
                          json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return manifest


# ---------------------------------------------------------------------------
# spec resolution from flags

def _add_spec_args(parser):
    parser.add_argument("--config", help="path to an INI spec file")
    parser.add_argument("--preset", help="named parameter bundle")
    parser.add_argument("--L", type=int)
    parser.add_argument("--J0", type=float)
    parser.add_argument("--J1", type=float)
    parser.add_argument("--gamma0", type=float)
    parser.add_argument("--gamma1", type=float)
    parser.add_argument("--boundary",
                        choices=[b.value for b in Boundary])
    parser.add_argument("--set", action="append", default=[],
                        metavar="PATH=VALUE",
                        help="override one spec field by parameter path")


def resolve_spec(args):
    if args.config:
        spec = cfg.spec_from_config_file(args.config)
    elif args.preset:
        spec = pre.get_preset(args.preset).base_spec
    else:
        spec = pre.ssh_spec()
    for path, flag in (("L", args.L), ("boundary", args.boundary),
                       ("hoppings.0", args.J0), ("hoppings.1", args.J1),
                       ("dissipators[0].gamma", args.gamma0),
                       ("dissipators[1].gamma", args.gamma1)):
        if flag is not None:
            spec = cfg.resolve_parameter_path(spec, path, flag)
    for item in args.set:
        path, _, value = item.partition("=")
        if not _:
            raise cfg.InvalidSpec(f"--set needs PATH=VALUE, got {item!r}")
        spec = cfg.resolve_parameter_path(spec, path, value)
    return spec


def _outdir(args):
    base = args.outdir or os.environ.get(OUTDIR_ENV) or "."
    os.makedirs(base, exist_ok=True)
    return base


# ---------------------------------------------------------------------------
# data builders shared by subcommands and figure bundles

def spectrum_rows(spec, n_K=None):
    """OBC real-space spectrum plus the PBC K-resolved spectrum."""
    rows = []
    obc = spec if spec.boundary != Boundary.PBC else cfg.resolve_parameter_path(
        spec, "boundary", Boundary.OBC.value)
    vals = spectra.diagonalize(so.build_liouvillian_real(obc)).eigenvalues
    for v in sorted(vals, key=lambda z: (z.real, z.imag)):
        rows.append(["OBC", float("nan"), v.real, v.imag])
    pbc = cfg.resolve_parameter_path(spec, "boundary", Boundary.PBC.value)
    for K in so.physical_k_values(spec.L):
        kvals = np.linalg.eigvals(so.build_kblock(pbc, K).matrix)
        for v in sorted(kvals, key=lambda z: (z.real, z.imag)):
            rows.append(["PBC", float(K), v.real, v.imag])
    return rows


def winding_rows(spec, path, values, n_K=201):
    """(value, W_H, W_0) per sweep point; gap closures give nan windings."""
    rows = []
    pbc = cfg.resolve_parameter_path(spec, "boundary", Boundary.PBC.value)
    for v in values:
        point = cfg.resolve_parameter_path(pbc, path, v)
        try:
            wh = float(model.winding_WH(point).value)
        except GapClosed:
            wh = float("nan")
        try:
            w0 = float(spectra.winding_W0(point, n_K=n_K).value)
        except (GapClosed, MethodDisagreement, ReferenceOnSpectrum):
            # at a topological transition the loop passes through the
            # reference point and the winding is genuinely undefined
            w0 = float("nan")
        rows.append([float(v), wh, w0])
    return rows


def steady_observables(spec, d_max=None):
    rho = spectra.steady_state_direct(so.build_liouvillian_real(spec))
    if d_max is None:
        d_max = min(6, spec.L - 1)
    coh = observables.coherence_profile(rho, d_max)
    norm = coh.n_bar / (spec.n_sites - coh.n_0)
    return rho, {"n_bar": coh.n_bar, "n_bar_normalized": norm,
                 "xi_c": coh.xi_c, "n_0": coh.n_0}


def rho_rows(rho):
    rows = []
    for n in range(rho.shape[0]):
        for m in range(rho.shape[1]):
            rows.append([n + 1, m + 1, rho[n, m].real, rho[n, m].imag])
    return rows


# sweep worker must be a module-level function for process pools
def _sweep_point(task):
    index, config_text, assignments, want_gap = task
    spec = cfg.spec_from_config(config_text)
    for path, value in assignments:
        spec = cfg.resolve_parameter_path(spec, path, value)
    _, obs = steady_observables(spec)
    row = {"index": index, **obs}
    if want_gap:
        result = spectra.diagonalize(so.build_liouvillian_real(spec))
        row["gap"] = result.gap
    return row


def run_sweep_grid(spec, axes, threads=1, want_gap=False):
    """Evaluate steady-state observables on a 1D or 2D parameter grid.

    Results come back sorted by grid index regardless of the pool
    schedule, so parallel and serial runs write identical files.
    """
    if not 1 <= len(axes) <= 2:
        raise ValueError("sweeps support one or two axes")
    config_text = cfg.spec_to_config(spec)
    tasks = []
    points = []
    if len(axes) == 1:
        path, values = axes[0]
        for i, v in enumerate(values):
            tasks.append((i, config_text, [(path, float(v))], want_gap))
            points.append((float(v),))
    else:
        (p1, v1s), (p2, v2s) = axes
        i = 0
        for a in v1s:
            for b in v2s:
                tasks.append((i, config_text,
                              [(p1, float(a)), (p2, float(b))], want_gap))
                points.append((float(a), float(b)))
                i += 1
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    results.sort(key=lambda r: r["index"])
    rows = []
    for pt, res in zip(points, results):
        xi = res["xi_c"] if res["xi_c"] is not None else float("nan")
        row = list(pt) + [res["n_bar"], res["n_bar_normalized"], xi]
        if want_gap:
            row.append(res["gap"])
        rows.append(row)
    return rows


def _parse_axis(text):
    """PATH=lo:hi:n or PATH=lo:hi:n:log."""
    path, _, grid = text.partition("=")
    parts = grid.split(":")
    if not _ or len(parts) not in (3, 4):
        raise cfg.InvalidSpec(
            f"--axis needs PATH=lo:hi:n[:log], got {text!r}"
        )
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if len(parts) == 4:
        if parts[3] != "log":
            raise cfg.InvalidSpec(f"unknown axis scale {parts[3]!r}")
        values = np.logspace(np.log10(lo), np.log10(hi), n)
    else:
        values = np.linspace(lo, hi, n)
    return path, [float(v) for v in values]


# ---------------------------------------------------------------------------
# subcommand implementations

def cmd_spectrum(args):
    spec = resolve_spec(args)
    writer = RunWriter(_outdir(args), "spectrum", cfg.spec_to_config(spec))
    t0 = time.time()
    writer.csv("spectrum.csv", ["source", "K", "re", "im"],
               spectrum_rows(spec), kind="spectrum")
    writer.time_step("spectrum", t0)
    writer.finish()
    return 0


def cmd_winding(args):
    spec = resolve_spec(args)
    if args.preset:
        preset = pre.get_preset(args.preset)
        values = preset.sweep_values
        path = preset.sweep_path
    else:
        values = np.linspace(args.min, args.max, args.grid or 41)
        path = args.param
    if args.grid and args.preset:
        lo, hi = min(values), max(values)
        values = np.linspace(lo, hi, args.grid)
    writer = RunWriter(_outdir(args), "winding", cfg.spec_to_config(spec),
                       preset=args.preset)
    t0 = time.time()
    writer.csv("winding.csv", [path, "W_H", "W_0"],
               winding_rows(spec, path, values, n_K=args.nk), kind="winding")
    writer.time_step("winding", t0)
    writer.finish()
    return 0


def cmd_steady(args):
    spec = resolve_spec(args)
    writer = RunWriter(_outdir(args), "steady", cfg.spec_to_config(spec))
    t0 = time.time()
    rho, obs = steady_observables(spec)
    writer.csv("steady_rho.csv", RHO_COLUMNS, rho_rows(rho),
               kind="density_matrix")
    writer.json("observables.json", obs, kind="observables")
    writer.time_step("steady", t0)
    writer.finish()
    return 0


def cmd_dynamics(args):
    spec = resolve_spec(args)
    writer = RunWriter(_outdir(args), "dynamics", cfg.spec_to_config(spec))
    t0 = time.time()
    rho0, meta = dynamics.center_initial_state(spec)
    traj = dynamics.evolve(spec, rho0, args.t_final, dt=args.dt,
                           method=args.method)
    columns = ["t", "mean_n"] + [f"pop_{n}" for n in
                                 range(1, spec.n_sites + 1)]
    rows = [[float(t), float(mn)] + [float(p) for p in pops]
            for t, mn, pops in zip(traj.times, traj.mean_position,
                                   traj.populations)]
    writer.csv("dynamics.csv", columns, rows, kind="trajectory")
    writer.json("dynamics_meta.json",
                {**meta, "trace_drift": traj.trace_drift,
                 "method": traj.method}, kind="metadata")
    writer.time_step("dynamics", t0)
    writer.finish()
    return 0


def cmd_sweep(args):
    spec = resolve_spec(args)
    if args.preset and not args.axis:
        preset = pre.get_preset(args.preset)
        axes = [(preset.sweep_path, list(preset.sweep_values))]
        if "axis2_path" in preset.extra:
            axes.append((preset.extra["axis2_path"],
                         list(preset.extra["axis2_values"])))
    else:
        axes = [_parse_axis(a) for a in args.axis]
    if not axes:
        raise cfg.InvalidSpec("sweep needs --axis or a preset with a sweep")
    writer = RunWriter(_outdir(args), "sweep", cfg.spec_to_config(spec),
                       preset=args.preset)
    t0 = time.time()
    rows = run_sweep_grid(spec, axes, threads=args.threads,
                          want_gap=args.gap)
    columns = [p for p, _ in axes] + ["n_bar", "n_bar_normalized", "xi_c"]
    if args.gap:
        columns.append("gap")
    writer.csv("sweep.csv", columns, rows, kind="sweep")
    writer.time_step("sweep", t0)
    writer.finish()
    return 0


def cmd_twobody(args):
    spec = resolve_spec(args)
    writer = RunWriter(_outdir(args), "twobody", cfg.spec_to_config(spec))
    t0 = time.time()
    sup, basis = tb.build_twobody_liouvillian(spec, sparse=args.mode ==
                                              "SparseNull")
    rho2 = tb.twobody_steady_state(sup, mode=args.mode)
    rho1 = tb.reduce_to_single_particle(rho2, basis)
    writer.csv("twobody_rho1.csv", RHO_COLUMNS, rho_rows(rho1),
               kind="density_matrix")
    n_bar = observables.average_position(rho1 / 2)
    writer.json("twobody_observables.json",
                {"n_bar": n_bar, "trace": float(np.trace(rho1).real),
                 "mode": args.mode}, kind="observables")
    writer.time_step("twobody", t0)
    writer.finish()
    return 0


def cmd_oracle_verify(args):
    writer = RunWriter(_outdir(args), "oracle-verify", "")
    t0 = time.time()
    report = oracle.run_verification(L=args.L, n_random=args.n_random)
    writer.json("oracle_report.json", report, kind="oracle_report")
    writer.time_step("oracle", t0)
    writer.finish()
    for name, section in report.items():
        if isinstance(section, dict) and "pass" in section:
            status = "pass" if section["pass"] else "FAIL"
            print(f"{name}: {status}")
    print(f"overall: {'pass' if report['pass'] else 'FAIL'}")
    return 0 if report["pass"] else 2


def _snapshot_tag(value):
    return format_value(float(value)).replace(".", "p").replace("-", "m")


def cmd_figure(args):
    preset = pre.get_preset(args.preset)
    spec = preset.base_spec
    if args.L:
        spec = cfg.resolve_parameter_path(spec, "L", args.L)
    outdir = os.path.join(_outdir(args), preset.name)
    os.makedirs(outdir, exist_ok=True)
    writer = RunWriter(outdir, "figure", cfg.spec_to_config(spec),
                       preset=preset.name)
    sweep_values = list(preset.sweep_values)
    if args.grid:
        lo, hi = min(sweep_values), max(sweep_values)
        if preset.name == "fig3":
            sweep_values = [float(v) for v in
                            np.logspace(np.log10(lo), np.log10(hi),
                                        args.grid)]
        else:
            sweep_values = [float(v) for v in
                            np.linspace(lo, hi, args.grid)]
    path = preset.sweep_path
    twobody_run = preset.extra.get("twobody", False)

    if not twobody_run:
        t0 = time.time()
        writer.csv("winding.csv", [path, "W_H", "W_0"],
                   winding_rows(spec, path, sweep_values, n_K=args.nk),
                   kind="winding")
        writer.time_step("winding", t0)

        t0 = time.time()
        axes = [(path, sweep_values)]
        if "axis2_path" in preset.extra:
            ax2 = list(preset.extra["axis2_values"])
            if args.grid:
                ax2 = [float(v) for v in
                       np.logspace(np.log10(min(ax2)), np.log10(max(ax2)),
                                   args.grid)]
            axes.append((preset.extra["axis2_path"], ax2))
        rows = run_sweep_grid(spec, axes, threads=args.threads)
        columns = [p for p, _ in axes] + ["n_bar", "n_bar_normalized",
                                          "xi_c"]
        writer.csv("sweep.csv", columns, rows, kind="sweep")
        writer.time_step("sweep", t0)

    if "gap_sizes" in preset.extra:
        t0 = time.time()
        rows = []
        for L in preset.extra["gap_sizes"]:
            for v in preset.snapshots:
                point = cfg.resolve_parameter_path(
                    cfg.resolve_parameter_path(spec, "L", L), path, v)
                gap = spectra.diagonalize(
                    so.build_liouvillian_real(point)).gap
                rows.append([int(L), float(v), gap])
        writer.csv("gap.csv", ["L", path, "gap"], rows, kind="gap")
        writer.time_step("gap", t0)

    for v in preset.snapshots:
        tag = _snapshot_tag(v)
        point = cfg.resolve_parameter_path(spec, path, v)
        if twobody_run:
            t0 = time.time()
            sup, basis = tb.build_twobody_liouvillian(point)
            rho2 = tb.twobody_steady_state(sup)
            rho1 = tb.reduce_to_single_particle(rho2, basis)
            writer.csv(f"rho1_{tag}.csv", RHO_COLUMNS, rho_rows(rho1),
                       kind="density_matrix")
            writer.time_step(f"twobody_{tag}", t0)
            continue
        t0 = time.time()
        writer.csv(f"spectrum_{tag}.csv", ["source", "K", "re", "im"],
                   spectrum_rows(point), kind="spectrum")
        rho, _ = steady_observables(point)
        writer.csv(f"steady_{tag}.csv", RHO_COLUMNS, rho_rows(rho),
                   kind="density_matrix")
        writer.time_step(f"snapshot_{tag}", t0)
        if "dynamics_t_final" in preset.extra:
            t0 = time.time()
            rho0, _ = dynamics.center_initial_state(point)
            traj = dynamics.evolve(point, rho0,
                                   preset.extra["dynamics_t_final"])
            columns = ["t", "mean_n"] + [
                f"pop_{n}" for n in range(1, point.n_sites + 1)]
            rows = [[float(t), float(mn)] + [float(p) for p in pops]
                    for t, mn, pops in zip(traj.times, traj.mean_position,
                                           traj.populations)]
            writer.csv(f"dynamics_{tag}.csv", columns, rows,
                       kind="trajectory")
            writer.time_step(f"dynamics_{tag}", t0)

    if twobody_run:
        t0 = time.time()
        rows = []
        for v in sweep_values:
            point = cfg.resolve_parameter_path(spec, path, v)
            sup, basis = tb.build_twobody_liouvillian(point)
            rho1 = tb.reduce_to_single_particle(
                tb.twobody_steady_state(sup), basis)
            rows.append([float(v),
                         observables.average_position(rho1 / 2)])
        writer.csv("twobody_sweep.csv", [path, "n_bar"], rows,
                   kind="twobody_sweep")
        writer.time_step("twobody_sweep", t0)

    if preset.name == "fig3":
        t0 = time.time()
        rows = []
        for g1 in preset.extra["defect_gamma1"]:
            obc_spec = cfg.resolve_parameter_path(
                spec, "dissipators[1].gamma", g1)
            defect_spec = cfg.resolve_parameter_path(
                obc_spec, "boundary", Boundary.OBC_EDGE_DEFECT.value)
            _, obc_obs = steady_observables(obc_spec)
            _, def_obs = steady_observables(defect_spec)
            rows.append([float(g1),
                         obc_obs["n_bar"],
                         obc_obs["xi_c"] if obc_obs["xi_c"] is not None
                         else float("nan"),
                         def_obs["n_bar"],
                         def_obs["xi_c"] if def_obs["xi_c"] is not None
                         else float("nan")])
        writer.csv("defect.csv",
                   ["gamma_1", "n_bar_obc", "xi_c_obc",
                    "n_bar_defect", "xi_c_defect"],
                   rows, kind="defect_comparison")
        writer.time_step("defect", t0)

    writer.finish()
    return 0


# ---------------------------------------------------------------------------
# argument parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="disslat",
        description="Spectra, winding numbers, steady states and "
                    "skin-effect observables of dissipative lattices",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--outdir", help="output directory "
                       f"(default ${OUTDIR_ENV} or cwd)")
        p.set_defaults(func=func)
        return p

    p = add("spectrum", cmd_spectrum,
            help="OBC spectrum plus the K-resolved PBC spectrum")
    _add_spec_args(p)

    p = add("winding", cmd_winding,
            help="band and spectral winding along a parameter sweep")
    _add_spec_args(p)
    p.add_argument("--param", default="hoppings.0")
    p.add_argument("--min", type=float, default=0.2)
    p.add_argument("--max", type=float, default=2.0)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--nk", type=int, default=201,
                   help="K grid size for the spectral winding")

    p = add("steady", cmd_steady, help="steady state and observables")
    _add_spec_args(p)

    p = add("dynamics", cmd_dynamics,
            help="master-equation trajectory from a centered initial state")
    _add_spec_args(p)
    p.add_argument("--t-final", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--method", choices=["RK4", "Exponential"],
                   default="RK4")

    p = add("sweep", cmd_sweep,
            help="steady-state observables over a 1D or 2D parameter grid")
    _add_spec_args(p)
    p.add_argument("--axis", action="append", default=[],
                   metavar="PATH=lo:hi:n[:log]")
    p.add_argument("--gap", action="store_true",
                   help="also record the Liouvillian gap per point")
    p.add_argument("--threads", type=int, default=1)

    p = add("twobody", cmd_twobody,
            help="two hard-core bosons: reduced steady state")
    _add_spec_args(p)
    p.add_argument("--mode", choices=["SparseNull", "DenseEig"],
                   default="SparseNull")

    p = add("oracle-verify", cmd_oracle_verify,
            help="closed-form oracle suite versus the numerics")
    p.add_argument("--L", type=int, default=8)
    p.add_argument("--n-random", type=int, default=20)

    p = add("figure", cmd_figure,
            help="run a named preset bundle end to end")
    p.add_argument("--preset", required=True,
                   choices=sorted(pre.PRESETS))
    p.add_argument("--grid", type=int, default=None,
                   help="override the sweep grid size")
    p.add_argument("--L", type=int, default=None,
                   help="override the lattice length")
    p.add_argument("--nk", type=int, default=201)
    p.add_argument("--threads", type=int, default=1)
    return parser


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (cfg.InvalidSpec, cfg.UnknownPath, KeyError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DisslatError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}",
              file=sys.stderr)
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
