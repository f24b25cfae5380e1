import json
import os

import numpy as np
import pytest

from disslat import cli, config as cfg
from disslat.errors import InvalidSpec, UnknownPath
from disslat.model import Boundary
from disslat.presets import get_preset, longer_range_spec, ssh_spec


def test_config_roundtrip():
    spec = longer_range_spec(L=7, J0=0.3)
    back = cfg.spec_from_config(cfg.spec_to_config(spec))
    assert back == spec


def test_config_diagnostics():
    with pytest.raises(InvalidSpec, match=r"\[lattice\]"):
        cfg.spec_from_config("[boundary]\nkind = OBC\n")
    bad_boundary = cfg.spec_to_config(ssh_spec(L=4)).replace(
        "kind = OBC", "kind = ring")
    with pytest.raises(InvalidSpec, match="ring"):
        cfg.spec_from_config(bad_boundary)
    bad_dissipator = cfg.spec_to_config(ssh_spec(L=4)).replace(
        "0 = a b 0 1.2", "0 = a b 1.2")
    with pytest.raises(InvalidSpec, match=r"\[dissipators\]"):
        cfg.spec_from_config(bad_dissipator)


def test_resolve_parameter_path():
    spec = ssh_spec(L=6, J0=0.5)
    assert cfg.resolve_parameter_path(spec, "hoppings.0",
                                      2.0).hoppings[0] == 2.0
    assert cfg.resolve_parameter_path(
        spec, "dissipators[1].gamma", 3.0).dissipators[1].gamma == 3.0
    assert cfg.resolve_parameter_path(spec, "L", 9).L == 9
    assert cfg.resolve_parameter_path(
        spec, "boundary", "PBC").boundary == Boundary.PBC
    # original untouched
    assert spec.hoppings[0] == 0.5
    with pytest.raises(UnknownPath):
        cfg.resolve_parameter_path(spec, "dissipators[5].gamma", 1.0)
    with pytest.raises(UnknownPath):
        cfg.resolve_parameter_path(spec, "hoppings.x", 1.0)
    with pytest.raises(UnknownPath):
        cfg.resolve_parameter_path(spec, "coupling", 1.0)
    with pytest.raises(InvalidSpec):
        cfg.resolve_parameter_path(spec, "dissipators[0].gamma", -1.0)


def test_presets_resolve():
    for name in ("fig2", "fig3", "fig4", "figS1", "figS2"):
        preset = get_preset(name)
        assert preset.base_spec.L >= 2
        assert preset.sweep_values
    with pytest.raises(KeyError):
        get_preset("fig9")


def test_cli_steady_run(tmp_path):
    out = str(tmp_path / "run")
    assert cli.run(["steady", "--L", "6", "--J0", "0.5",
                    "--outdir", out]) == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["subcommand"] == "steady"
    assert set(manifest["outputs"]) == {"steady_rho.csv", "observables.json"}
    obs = json.load(open(os.path.join(out, "observables.json")))
    assert obs["n_bar_normalized"] < 0


def test_cli_rerun_is_bit_identical(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    argv = ["sweep", "--L", "6", "--axis", "hoppings.0=0.5:2.0:3",
            "--threads", "1"]
    assert cli.run(argv + ["--outdir", a]) == 0
    assert cli.run(argv + ["--outdir", b, "--threads", "2"]) == 0
    with open(os.path.join(a, "sweep.csv")) as fa, \
            open(os.path.join(b, "sweep.csv")) as fb:
        assert fa.read() == fb.read()


def test_cli_config_file_and_set(tmp_path):
    path = tmp_path / "spec.ini"
    path.write_text(cfg.spec_to_config(ssh_spec(L=5, J0=0.4)))
    out = str(tmp_path / "run")
    assert cli.run(["spectrum", "--config", str(path),
                    "--set", "hoppings.0=0.7", "--outdir", out]) == 0
    header = open(os.path.join(out, "spectrum.csv")).readline().strip()
    assert header == "source,K,re,im"


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[lattice]\nL = three\n[boundary]\nkind = OBC\n"
                   "[hoppings]\n0 = 1\n[dissipators]\n0 = a b 0 1\n")
    assert cli.run(["steady", "--config", str(bad),
                    "--outdir", str(tmp_path)]) == 1
    # chiral-asymmetric dissipation has no two-body pipeline: numerical
    # failure, not a config error
    assert cli.run(["twobody", "--L", "4",
                    "--set", "dissipators[0].alpha_prime=a",
                    "--outdir", str(tmp_path)]) == 2


def test_csv_float_formatting_roundtrips():
    value = 0.1 + 0.2
    assert float(cli.format_value(value)) == value
    assert cli.format_value(3) == "3"


def test_atomic_write_replaces_existing(tmp_path):
    target = tmp_path / "file.csv"
    cli.atomic_write_text(str(target), "old\n")
    cli.atomic_write_text(str(target), "new\n")
    assert target.read_text() == "new\n"
    assert list(tmp_path.iterdir()) == [target]
