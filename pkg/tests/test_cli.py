from __future__ import annotations

import json
import shutil
import textwrap
from pathlib import Path

import numpy as np
import pytest

from fracrd import cli
from fracrd.errors import NonConvergent
from fracrd.greens import DensityProfile
from fracrd.solver import SolutionField

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write_config(path: Path, body: str) -> Path:
    path.write_text(textwrap.dedent(body))
    return path


BASE = """\
[params]
alpha = {alpha}
theta = {theta}
beta = {beta}
eta = 1

[grid]
x_max = 20
num_points = 512

[times]
values = {times}

[f]
kind = {fkind}
"""


def config(tmp_path, name="run.ini", alpha=2, theta=0, beta=1, times="0.5, 1.0", fkind="gaussian", extra=""):
    return write_config(
        tmp_path / name, BASE.format(alpha=alpha, theta=theta, beta=beta, times=times, fkind=fkind) + textwrap.dedent(extra)
    )


# density ---------------------------------------------------------------------------------------


def test_density_gaussian(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, stdout, _ = run(["density", "--alpha", 2, "--beta", 1, "--theta", 0, "--eta", 1, "--time", 1, "--output", out], capsys)
    assert code == 0
    assert "method=closed_form" in stdout
    prof = DensityProfile.from_csv(out)
    assert prof.mass == pytest.approx(1.0, abs=1e-6)
    mass = float(stdout.split("mass=")[1].split()[0])
    assert mass == pytest.approx(prof.mass, rel=1e-15)


def test_global_flags_before_the_subcommand(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, _, _ = run(["--output", out, "--tolerance", "1e-10", "density", "--alpha", 1.5, "--grid-points", 256], capsys)
    assert code == 0 and out.exists()


def test_density_domain_violation(tmp_path, capsys):
    code, _, err = run(["density", "--alpha", 1.8, "--theta", 0.5, "--output", tmp_path / "x.csv"], capsys)
    assert code == 2
    assert "|theta| <= min(alpha, 2-alpha)" in err


def test_density_theta_within_bounds_succeeds(tmp_path, capsys):
    code, _, _ = run(["density", "--alpha", 1, "--beta", 1, "--theta", 0.5, "--grid-points", 1024, "--output", tmp_path / "x.csv"], capsys)
    assert code == 0


def test_density_neutral_closed(tmp_path, capsys):
    out = tmp_path / "n.csv"
    code, stdout, _ = run(
        ["density", "--alpha", 0.75, "--beta", 0.75, "--theta", 0.25, "--method", "closed", "--grid-points", 1024, "--output", out],
        capsys,
    )
    assert code == 0 and "method=closed_form" in stdout
    prof = DensityProfile.from_csv(out)
    assert np.all(prof.values >= 0) and prof.notes["case"] == "neutral"


@pytest.mark.parametrize("argv", [["density"], ["density", "--alpha", "x"], ["frobnicate"], ["verify", "nope"]])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_tolerance_out_of_range(tmp_path, capsys):
    code, _, err = run(["--tolerance", "1e-300", "density", "--alpha", 2, "--output", tmp_path / "x.csv"], capsys)
    assert code == 2 and "tolerance" in err


# solve --------------------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "alpha,theta,beta,method",
    [(2, 0, 1, "auto"), (1.5, 0.3, 1, "spectral"), (1.2, -0.2, 1, "spectral")],
)
def test_delta_config_reproduces_density(tmp_path, capsys, alpha, theta, beta, method):
    cfg = config(tmp_path, alpha=alpha, theta=theta, beta=beta, times="1.0", fkind="delta")
    code, _, _ = run(["solve", cfg, "--output", tmp_path / "s.csv"], capsys)
    assert code == 0
    field_ = SolutionField.from_csv(tmp_path / "s.csv")
    code, _, _ = run(
        ["density", "--alpha", alpha, "--theta", theta, "--beta", beta, "--time", 1, "--x-max", 20,
         "--grid-points", 512, "--method", method, "--output", tmp_path / "d.csv"],
        capsys,
    )
    assert code == 0
    prof = DensityProfile.from_csv(tmp_path / "d.csv")
    assert np.max(np.abs(field_.values[0] - prof.values)) < 1e-6


def test_zero_config(tmp_path, capsys):
    cfg = tmp_path / "zero.ini"
    shutil.copy(CONFIGS / "zero.ini", cfg)
    code, _, _ = run(["solve", cfg, "--output", tmp_path / "z.csv"], capsys)
    assert code == 0
    field_ = SolutionField.from_csv(tmp_path / "z.csv")
    assert np.all(field_.values == 0.0)
    rows = [ln for ln in (tmp_path / "z.csv").read_text().splitlines() if ln and not ln.startswith("#") and ln != "x,value"]
    assert all(ln.split(",")[1] == "0" for ln in rows)


def test_missing_rate_data(tmp_path, capsys):
    cfg = config(tmp_path, beta=1.5)
    code, _, err = run(["solve", cfg, "--output", tmp_path / "s.csv"], capsys)
    assert code == 2 and "g required for beta > 1" in err


@pytest.mark.parametrize(
    "extra,needle",
    [
        ("\n[solver]\nmethd = transform\n", "unknown key"),
        ("\n[plot]\ncolor = red\n", "unknown section"),
        ("\n[phi]\nkind = sawtooth\n", "kind must be one of"),
        ("\n[phi]\nkind = delta\nwidth = 2\n", "not valid for kind=delta"),
        ("\n[solver]\nmethod = magic\n", "method must be"),
        ("\n[solver]\nsource_nodes = many\n", "not an integer"),
    ],
)
def test_config_errors(tmp_path, capsys, extra, needle):
    cfg = config(tmp_path, extra=extra)
    code, _, err = run(["solve", cfg], capsys)
    assert code == 2 and needle in err


def test_config_needs_sections(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.ini", "[params]\nalpha = 2\nbeta = 1\n")
    code, _, err = run(["solve", cfg], capsys)
    assert code == 2 and "missing section" in err


def test_missing_config_file(tmp_path, capsys):
    code, _, _ = run(["solve", tmp_path / "nope.ini"], capsys)
    assert code == 2


def test_file_kind_reads_density_csv(tmp_path, capsys):
    run(["density", "--alpha", 2, "--x-max", 20, "--grid-points", 512, "--time", 0.5, "--output", tmp_path / "init.csv"], capsys)
    cfg = config(tmp_path, times="0.5", fkind="file\npath = init.csv")
    code, _, _ = run(["solve", cfg, "--output", tmp_path / "s.csv"], capsys)
    assert code == 0
    # heat semigroup: G(0.5) evolved by 0.5 is G(1)
    run(["density", "--alpha", 2, "--x-max", 20, "--grid-points", 512, "--time", 1, "--output", tmp_path / "g1.csv"], capsys)
    got = SolutionField.from_csv(tmp_path / "s.csv").values[0]
    assert np.max(np.abs(got - DensityProfile.from_csv(tmp_path / "g1.csv").values)) < 1e-12


def test_file_kind_rejects_mismatched_grid(tmp_path, capsys):
    run(["density", "--alpha", 2, "--x-max", 10, "--grid-points", 512, "--output", tmp_path / "init.csv"], capsys)
    cfg = config(tmp_path, fkind="file\npath = init.csv")
    code, _, err = run(["solve", cfg], capsys)
    assert code == 2 and "does not match" in err


def test_sources_rates_and_time_ranges(tmp_path, capsys):
    cfg = config(
        tmp_path,
        beta=1.5,
        theta=0,
        times="",
        extra="""
        [g]
        kind = box
        width = 2
        amplitude = 0.5

        [phi]
        kind = gaussian
        center = 1
        width = 0.5

        [solver]
        source_nodes = 16
        """,
    )
    text = cfg.read_text().replace("values = \n", "start = 0.25\nstop = 1\ncount = 4\n")
    cfg.write_text(text)
    code, stdout, err = run(["solve", cfg, "--output", tmp_path / "s.csv"], capsys)
    assert code == 0, err
    field_ = SolutionField.from_csv(tmp_path / "s.csv")
    assert np.allclose(field_.times, [0.25, 0.5, 0.75, 1.0])
    assert "data spectrum" in err  # the box rate is not band-limited


def test_determinism_and_manifest(tmp_path, capsys):
    cfg = config(tmp_path, alpha=1.3, theta=0.2, beta=0.7)
    outputs = []
    for i in range(2):
        csv = tmp_path / f"s{i}.csv"
        assert run(["--seed", 5, "solve", cfg, "--output", csv], capsys)[0] == 0
        man = json.loads(csv.with_suffix(".manifest.json").read_text())
        man.pop("timestamp")
        man["files"]["solution"].pop("path")
        outputs.append((csv.read_bytes(), man))
    assert outputs[0][0] == outputs[1][0]
    assert outputs[0][1] == outputs[1][1]
    man = outputs[0][1]
    assert man["seed"] == 5 and man["command"] == "solve" and man["data"]["f"]["kind"] == "gaussian"


def test_manifest_path_from_config(tmp_path, capsys):
    cfg = config(tmp_path, extra=f"\n[output]\ncsv = {tmp_path / 'a.csv'}\nmanifest = {tmp_path / 'a.json'}\n")
    assert run(["solve", cfg], capsys)[0] == 0
    assert (tmp_path / "a.csv").exists() and (tmp_path / "a.json").exists()


def test_example_configs_run(tmp_path, capsys):
    for name in ("delta_gaussian.ini", "fractional_box_source.ini", "wave_like.ini"):
        code, _, err = run(["solve", CONFIGS / name, "--output", tmp_path / f"{name}.csv"], capsys)
        assert code == 0, (name, err)
        assert (tmp_path / f"{name}.manifest.json").exists()


# verify -----------------------------------------------------------------------------------------------


def test_verify_symbol(tmp_path, capsys):
    code, stdout, _ = run(["verify", "symbol", "--output", tmp_path / "r.txt"], capsys)
    assert code == 0
    assert "PASS" in stdout and "FAIL" not in stdout
    assert (tmp_path / "r.txt").read_text().strip() == stdout.strip()


def test_verify_failure_exit_1(monkeypatch, capsys):
    from fracrd import verify

    monkeypatch.setattr(verify, "run_suite", lambda name, seed=0: [verify.Check("x", "broken", 1.0, 1e-6)])
    assert run(["verify", "ml"], capsys)[0] == 1


def test_numerical_failure_exit_3(monkeypatch, capsys):
    from fracrd import verify

    def boom(name, seed=0):
        raise NonConvergent("series did not settle")

    monkeypatch.setattr(verify, "run_suite", boom)
    code, _, err = run(["verify", "ml"], capsys)
    assert code == 3 and "NonConvergent" in err
