import subprocess
import sys

import numpy as np
import pytest

from sglab.cli import build_config, main, read_config_text, run
from sglab.errors import ParameterError
from sglab.io import load_field, read_csv


def call(tmp_path, command, config="", *flags):
    cfg = tmp_path / f"{command}.cfg"
    cfg.write_text(config)
    out = tmp_path / f"out-{command}"
    return main([command, "--config", str(cfg), "--out", str(out), *flags]), out


def test_config_parsing():
    raw = read_config_text("# comment\nN = 5   # trailing\n\nL=2\n")
    assert raw == {"N": "5", "L": "2"}
    for bad in ("N 5", "bogus = 1", "N = 5\nN = 7"):
        with pytest.raises(ParameterError):
            read_config_text(bad)
    cfg = build_config("diophantine", {"alpha": "rational 3/4", "epsilons": "0, 0.5"})
    assert cfg["epsilons"] == (0.0, 0.5) and cfg["alpha"].denominator == 4
    for key, value in (("alpha", "pi"), ("T", "7"), ("epsilons", "-1"), ("N", "x"), ("omega", "abc")):
        with pytest.raises(ParameterError, match=key):
            build_config("solve" if key in ("T", "omega") else "diophantine" if key != "N" else "spectrum",
                         {key: value})


def test_spectrum_fixture(tmp_path):
    status, out = call(tmp_path, "spectrum", "L = 1\nN = 3\n")
    assert status == 0
    cols, rows = read_csv(out / "eigenvalues.csv")
    assert cols == ("j", "lambda")
    assert np.allclose([r[1] for r in rows], [2, 6, 7], atol=1e-12)
    assert (out / "spectrum.sgl").exists() and (out / "run.cfg").exists()


def test_invalid_even_n(tmp_path, capsys):
    status, out = call(tmp_path, "spectrum", "N = 800\n")
    err = capsys.readouterr().err
    assert status == 2 and "N" in err and len(err.strip().splitlines()) == 1
    assert not out.exists()


@pytest.mark.slow
def test_spectrum_default_trusted_count(tmp_path, capsys):
    status, out = call(tmp_path, "spectrum", "", "--svg")
    text = capsys.readouterr().out
    trusted = int(next(l for l in text.splitlines() if l.startswith("trusted_count=")).split("=")[1])
    assert status == 0 and trusted >= 150
    assert (out / "spectrum.svg").exists()


def test_weyl_synthetic(tmp_path):
    status, out = call(tmp_path, "weyl", "weyl_mode = synthetic\nseq_rho = 2\n")
    cols, rows = read_csv(out / "weylfit.csv")
    assert status == 0 and abs(rows[0][cols.index("slope_plain")] - 2) <= 1e-6


def test_weyl_outside_trusted(tmp_path, capsys):
    status, out = call(tmp_path, "weyl", "L = 12\nN = 801\ncheck_L = 14\ncheck_N = 935\n")
    assert status == 2 and "trusted" in capsys.readouterr().err and not out.exists()


def test_norms(tmp_path, capsys):
    status, out = call(tmp_path, "norms", "seed = 11\n")
    text = capsys.readouterr().out
    assert status == 0 and "within_bounds=True" in text and "seed=11" in text
    cols, rows = read_csv(out / "norms.csv")
    assert rows[0][0] == "phi_1" and len(rows) == 51
    lam1 = float(next(l for l in text.splitlines() if l.startswith("lambda_1=")).split("=")[1])
    assert rows[0][1] == lam1


def test_diophantine_golden(tmp_path):
    status, out = call(tmp_path, "diophantine", "alpha = golden\nepsilons = 1\nj_max = 100000\n")
    cols, rows = read_csv(out / "diophantine_B.csv")
    assert status == 0
    assert rows[0][:2] == ("constant", 1) and abs(rows[0][2] - 0.447) < 5e-4


def test_diophantine_rational_half(tmp_path, capsys):
    status, _ = call(tmp_path, "diophantine", "alpha = rational 1/2\nj_max = 1000\n")
    text = capsys.readouterr().out
    assert status == 0 and "A: resonance-dominated" in text and "B: holds-on-range" in text


def test_diophantine_liouville(tmp_path):
    status, out = call(tmp_path, "diophantine", "alpha = liouville 3\nj_max = 1000\n")
    cols, rows = read_csv(out / "subsequence.csv")
    assert status == 0 and [r[1] for r in rows] == [1, 10**6, 10**24]
    assert all("/" in str(r[cols.index("gap_exact")]) or isinstance(r[cols.index("gap_exact")], int)
               for r in rows)


def test_solve_in_f(tmp_path, capsys):
    status, out = call(tmp_path, "solve", "omega = -1j\n")
    cols, rows = read_csv(out / "decay.csv")
    assert status == 0 and {r[4] for r in rows} == {"in-F"}


def test_solve_inadmissible(tmp_path, capsys):
    status, out = call(tmp_path, "solve", "omega = 1\nforcing = nonadmissible\n")
    err = capsys.readouterr().err
    assert status == 3 and "resonant coefficient" in err and not out.exists()


def test_solve_zero(tmp_path):
    status, out = call(tmp_path, "solve", "forcing = zero\n")
    assert status == 0 and not load_field(out / "solution.sgl").values.any()
    assert (out / "decay.csv").read_text().count("\n") == 1


def test_counterexample_hypoellipticity(tmp_path):
    status, out = call(tmp_path, "counterexample", "alpha = liouville 3\n")
    cols, rows = read_csv(out / "hypoellipticity.csv")
    assert status == 0 and all(r[cols.index("abs_u")] == 1 for r in rows)
    assert all(r[cols.index("residual")] == 0 for r in rows)
    _, decay = read_csv(out / "decay_f.csv")
    assert decay[0][1] <= -3


def test_counterexample_solvability(tmp_path):
    status, out = call(tmp_path, "counterexample", "construction = solvability\n", "--svg")
    cols, rows = read_csv(out / "certificate.csv")
    assert status == 0
    for M in range(6):
        vals = [r[2] for r in rows if r[1] == M and r[0] > 2 * M]
        assert all(b > a for a, b in zip(vals, vals[1:]))


def test_counterexample_rational(tmp_path, capsys):
    status, out = call(tmp_path, "counterexample", "alpha = rational 1/2\n")
    assert status == 3 and "CertificationError" in capsys.readouterr().err


def test_io_errors(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "missing.cfg")]) == 4
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["solve", "--out", str(blocker / "sub"), "--quiet"]) == 4


def test_deterministic_artifacts(tmp_path):
    cfg = "seed = 5\nomega = 0.3-0.2j\n"
    _, a, _ = run("solve", cfg, tmp_path / "a", svg=True)
    _, b, _ = run("solve", cfg, tmp_path / "b", svg=True)
    assert [p.name for p in a] == [p.name for p in b]
    for p, q in zip(a, b):
        assert p.read_bytes() == q.read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sglab", "--version"], capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0 and proc.stdout.startswith("sglab ")
