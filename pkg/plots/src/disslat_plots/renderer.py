"""Render figure analogs from completed simulation runs.

The renderer consumes only the documented run artifacts: `manifest.json`
plus the CSV files it lists, each tagged with a `kind`.  It never writes
into the data directory; the only output is the image file named by the
preset.  Any deviation from the documented schemas raises SchemaMismatch
naming the offending file and column.
"""

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

CYCLIC_CMAP = "twilight"         # K is periodic

# required `kind` multiplicities per preset
PRESET_KINDS = {
    "fig2": {"winding": 1, "gap": 1, "sweep": 1, "spectrum": 2,
             "density_matrix": 2, "trajectory": 2},
    "fig3": {"winding": 1, "sweep": 1, "defect_comparison": 1},
    "fig4": {"winding": 1, "sweep": 1, "spectrum": 2, "density_matrix": 2},
    "figS1": {"winding": 1, "sweep": 1, "spectrum": 2, "density_matrix": 2},
    "figS2": {"twobody_sweep": 1, "density_matrix": 2},
}

KIND_SCHEMAS = {
    "winding": {"fixed_tail": ["W_H", "W_0"], "min_columns": 3},
    "gap": {"fixed_head": ["L"], "fixed_tail": ["gap"], "min_columns": 3},
    "sweep": {"fixed_tail": ["n_bar", "n_bar_normalized", "xi_c"],
              "min_columns": 4},
    "spectrum": {"exact": ["source", "K", "re", "im"]},
    "density_matrix": {"exact": ["n", "m", "re", "im"]},
    "trajectory": {"fixed_head": ["t", "mean_n"], "min_columns": 3},
    "defect_comparison": {"exact": ["gamma_1", "n_bar_obc", "xi_c_obc",
                                    "n_bar_defect", "xi_c_defect"]},
    "twobody_sweep": {"fixed_tail": ["n_bar"], "min_columns": 2},
}


class SchemaMismatch(Exception):
    """Run artifacts do not match the documented schema."""


@dataclass(frozen=True)
class FigurePreset:
    name: str
    input_manifest: str
    output_image: str
    panel_layout: tuple = ()


@dataclass
class RenderResult:
    path: str
    panels: list = field(default_factory=list)


@dataclass
class Table:
    name: str
    kind: str
    columns: list
    rows: list           # list of lists, strings as read

    def numeric(self, column):
        i = self.columns.index(column)
        try:
            return np.array([float(r[i]) for r in self.rows])
        except ValueError as exc:
            raise SchemaMismatch(
                f"{self.name}: column {column!r} is not numeric ({exc})"
            )

    def strings(self, column):
        i = self.columns.index(column)
        return [r[i] for r in self.rows]


def _check_columns(name, kind, columns):
    schema = KIND_SCHEMAS[kind]
    if "exact" in schema:
        for want, got in zip(schema["exact"], columns):
            if want != got:
                raise SchemaMismatch(
                    f"{name}: expected column {want!r}, found {got!r}"
                )
        if len(columns) != len(schema["exact"]):
            raise SchemaMismatch(
                f"{name}: expected columns {schema['exact']}, found "
                f"{columns}"
            )
        return
    if len(columns) < schema["min_columns"]:
        raise SchemaMismatch(
            f"{name}: expected at least {schema['min_columns']} columns, "
            f"found {columns}"
        )
    for want, got in zip(schema.get("fixed_head", []), columns):
        if want != got:
            raise SchemaMismatch(
                f"{name}: expected column {want!r}, found {got!r}"
            )
    tail = schema.get("fixed_tail", [])
    for want, got in zip(tail, columns[len(columns) - len(tail):]):
        if want != got:
            raise SchemaMismatch(
                f"{name}: expected column {want!r}, found {got!r}"
            )


def load_run(manifest_path, preset_name):
    """Manifest plus all listed CSVs, schema-checked for the preset."""
    if not os.path.exists(manifest_path):
        raise SchemaMismatch(f"manifest not found: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("preset") != preset_name:
        raise SchemaMismatch(
            f"manifest preset tag {manifest.get('preset')!r} does not match "
            f"requested preset {preset_name!r}"
        )
    run_dir = os.path.dirname(os.path.abspath(manifest_path))
    tables = {}
    for name, meta in sorted(manifest.get("outputs", {}).items()):
        kind = meta.get("kind")
        if kind not in KIND_SCHEMAS:
            continue  # observables/metadata JSON files carry no panels
        path = os.path.join(run_dir, name)
        if not os.path.exists(path):
            raise SchemaMismatch(f"missing CSV listed in manifest: {name}")
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                columns = next(reader)
            except StopIteration:
                raise SchemaMismatch(f"{name}: empty file")
            rows = [row for row in reader if row]
        _check_columns(name, kind, columns)
        if not rows:
            raise SchemaMismatch(f"{name}: no data rows")
        tables.setdefault(kind, []).append(
            Table(name=name, kind=kind, columns=columns, rows=rows))
    needed = PRESET_KINDS[preset_name]
    for kind, count in needed.items():
        have = len(tables.get(kind, []))
        if have < count:
            raise SchemaMismatch(
                f"preset {preset_name} needs {count} file(s) of kind "
                f"{kind!r}, found {have}"
            )
    return manifest, tables


# ---------------------------------------------------------------------------
# panel painters

def _panel_winding(ax, table):
    x = table.numeric(table.columns[0])
    ax.plot(x, table.numeric("W_H"), "o-", color="tab:red", label="$W_H$",
            ms=3)
    ax.plot(x, table.numeric("W_0"), "s-", color="tab:blue", label="$W_0$",
            ms=3)
    ax.set_xlabel(table.columns[0])
    ax.set_ylabel("winding")
    ax.legend(fontsize=7)


def _panel_gap(ax, table):
    L = table.numeric("L")
    param = table.columns[1]
    x = table.numeric(param)
    gap = table.numeric("gap")
    for v in sorted(set(x)):
        sel = x == v
        ax.plot(L[sel], gap[sel], "o-", ms=3, label=f"{param}={v:g}")
    ax.set_xlabel("L")
    ax.set_ylabel(r"$\Delta\lambda$")
    ax.legend(fontsize=7)


def _panel_position(ax, table):
    n_axes = len(table.columns) - 3
    if n_axes == 1:
        x = table.numeric(table.columns[0])
        ax.plot(x, table.numeric("n_bar_normalized"), "o-", ms=3,
                color="tab:green")
        ax.set_xlabel(table.columns[0])
        ax.set_ylabel(r"$\bar{n}/(L-1/2)$")
    else:
        x = table.numeric(table.columns[0])
        y = table.numeric(table.columns[1])
        z = table.numeric("n_bar")
        xs, ys = np.unique(x), np.unique(y)
        grid = np.full((len(ys), len(xs)), np.nan)
        for xi, yi, zi in zip(x, y, z):
            grid[np.searchsorted(ys, yi), np.searchsorted(xs, xi)] = zi
        pcm = ax.pcolormesh(xs, ys, grid, cmap="RdBu_r", shading="nearest")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(table.columns[0])
        ax.set_ylabel(table.columns[1])
        plt.colorbar(pcm, ax=ax, label=r"$\bar{n}$")


def _panel_xi(ax, table):
    x = table.numeric(table.columns[0])
    y = table.numeric(table.columns[1])
    z = table.numeric("xi_c")
    xs, ys = np.unique(x), np.unique(y)
    grid = np.full((len(ys), len(xs)), np.nan)
    for xi, yi, zi in zip(x, y, z):
        grid[np.searchsorted(ys, yi), np.searchsorted(xs, xi)] = zi
    pcm = ax.pcolormesh(xs, ys, grid, cmap="viridis", shading="nearest")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(table.columns[0])
    ax.set_ylabel(table.columns[1])
    plt.colorbar(pcm, ax=ax, label=r"$\xi_c$")


def _panel_spectrum(ax, table):
    source = np.array(table.strings("source"))
    re = table.numeric("re")
    im = table.numeric("im")
    K = table.numeric("K")
    obc = source == "OBC"
    ax.scatter(re[obc], im[obc], s=4, color="0.6", label="OBC")
    pbc = ~obc
    sc = ax.scatter(re[pbc], im[pbc], s=4, c=K[pbc], cmap=CYCLIC_CMAP,
                    vmin=0.0, vmax=2.0 * np.pi, label="PBC")
    plt.colorbar(sc, ax=ax, label="K")
    ax.set_xlabel(r"Re $\lambda$")
    ax.set_ylabel(r"Im $\lambda$")
    ax.legend(fontsize=7)


def _panel_density(ax, table):
    n = table.numeric("n").astype(int)
    m = table.numeric("m").astype(int)
    mag = np.hypot(table.numeric("re"), table.numeric("im"))
    size = n.max()
    grid = np.zeros((size, size))
    grid[n - 1, m - 1] = mag
    pcm = ax.pcolormesh(np.arange(1, size + 1), np.arange(1, size + 1),
                        grid, cmap="magma", shading="nearest")
    ax.set_xlabel("m")
    ax.set_ylabel("n")
    plt.colorbar(pcm, ax=ax, label=r"$|\rho_{nm}|$")


def _panel_trajectory(ax, table):
    t = table.numeric("t")
    pops = np.column_stack([table.numeric(c) for c in table.columns[2:]])
    sites = np.arange(1, pops.shape[1] + 1)
    pcm = ax.pcolormesh(t, sites, pops.T, cmap="magma", shading="nearest")
    ax.plot(t, table.numeric("mean_n"), color="tab:green", lw=1.5)
    ax.set_xlabel("t")
    ax.set_ylabel("site n")
    plt.colorbar(pcm, ax=ax, label=r"$\rho_{nn}$")


def _panel_defect(ax, table, which):
    g = table.numeric("gamma_1")
    ax.plot(g, table.numeric(f"{which}_obc"), "o-", ms=3, label="full OBC")
    ax.plot(g, table.numeric(f"{which}_defect"), "s-", ms=3,
            label="edge defect")
    ax.set_xscale("log")
    ax.set_xlabel(r"$\gamma_1$")
    ax.set_ylabel(which)
    ax.legend(fontsize=7)


def _panel_twobody_sweep(ax, table):
    x = table.numeric(table.columns[0])
    ax.plot(x, table.numeric("n_bar"), "o-", ms=3, color="tab:green")
    ax.set_xlabel(table.columns[0])
    ax.set_ylabel(r"$\bar{n}$")


# ---------------------------------------------------------------------------
# preset assembly

def _build_panels(preset_name, tables):
    """Ordered (label, painter) pairs per preset."""
    panels = []
    if preset_name == "fig2":
        panels.append(("overview", None))  # composite: winding + gap + n_bar
        for t in tables["spectrum"]:
            panels.append((f"spectrum:{t.name}",
                           lambda ax, t=t: _panel_spectrum(ax, t)))
        for t in tables["density_matrix"]:
            panels.append((f"steady:{t.name}",
                           lambda ax, t=t: _panel_density(ax, t)))
        for t in tables["trajectory"]:
            panels.append((f"dynamics:{t.name}",
                           lambda ax, t=t: _panel_trajectory(ax, t)))
    elif preset_name == "fig3":
        sweep = tables["sweep"][0]
        defect = tables["defect_comparison"][0]
        panels.append(("position", lambda ax: _panel_position(ax, sweep)))
        panels.append(("coherence_length", lambda ax: _panel_xi(ax, sweep)))
        panels.append(("winding",
                       lambda ax: _panel_winding(ax, tables["winding"][0])))
        panels.append(("defect_position",
                       lambda ax: _panel_defect(ax, defect, "n_bar")))
        panels.append(("defect_length",
                       lambda ax: _panel_defect(ax, defect, "xi_c")))
    elif preset_name in ("fig4", "figS1"):
        panels.append(("winding",
                       lambda ax: _panel_winding(ax, tables["winding"][0])))
        panels.append(("position",
                       lambda ax: _panel_position(ax, tables["sweep"][0])))
        for t in tables["spectrum"]:
            panels.append((f"spectrum:{t.name}",
                           lambda ax, t=t: _panel_spectrum(ax, t)))
        for t in tables["density_matrix"]:
            panels.append((f"steady:{t.name}",
                           lambda ax, t=t: _panel_density(ax, t)))
    elif preset_name == "figS2":
        for t in tables["density_matrix"]:
            panels.append((f"reduced:{t.name}",
                           lambda ax, t=t: _panel_density(ax, t)))
        panels.append(("position",
                       lambda ax: _panel_twobody_sweep(
                           ax, tables["twobody_sweep"][0])))
    else:
        raise SchemaMismatch(f"unknown preset {preset_name!r}")
    return panels


def render(preset):
    """Render one preset to its output image; returns a RenderResult."""
    if preset.name not in PRESET_KINDS:
        raise SchemaMismatch(f"unknown preset {preset.name!r}")
    _, tables = load_run(preset.input_manifest, preset.name)
    panels = _build_panels(preset.name, tables)
    n = len(panels)
    ncols = min(4, n)
    nrows = (n + ncols - 1) // ncols
    fig = plt.figure(figsize=(4.2 * ncols, 3.4 * nrows))
    outer = fig.add_gridspec(nrows, ncols)
    for i, (label, painter) in enumerate(panels):
        cell = outer[i // ncols, i % ncols]
        if painter is None:
            # the fig2 overview column stacks winding, gap and position
            inner = cell.subgridspec(3, 1, hspace=0.7)
            _panel_winding(fig.add_subplot(inner[0]), tables["winding"][0])
            _panel_gap(fig.add_subplot(inner[1]), tables["gap"][0])
            _panel_position(fig.add_subplot(inner[2]), tables["sweep"][0])
        else:
            painter(fig.add_subplot(cell))
    fig.suptitle(preset.name)
    fig.tight_layout()
    out_dir = os.path.dirname(os.path.abspath(preset.output_image))
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(preset.output_image, dpi=120)
    plt.close(fig)
    return RenderResult(path=preset.output_image,
                        panels=[label for label, _ in panels])


def preset_for(name, run_dir, output_image=None):
    return FigurePreset(
        name=name,
        input_manifest=os.path.join(run_dir, "manifest.json"),
        output_image=output_image or f"{name}.png",
    )


def main():
    parser = argparse.ArgumentParser(
        prog="disslat-plots",
        description="Render a figure preset from a completed run directory",
    )
    parser.add_argument("preset", choices=sorted(PRESET_KINDS))
    parser.add_argument("run_dir", help="directory holding manifest.json")
    parser.add_argument("-o", "--output", default=None)
    args = parser.parse_args()
    try:
        result = render(preset_for(args.preset, args.run_dir, args.output))
    except SchemaMismatch as exc:
        print(f"schema mismatch: {exc}", file=sys.stderr)
        sys.exit(1)
    print(result.path)


if __name__ == "__main__":
    main()
