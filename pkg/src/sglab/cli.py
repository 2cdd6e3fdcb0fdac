"""Batch runner: ``sglab <command> [--config FILE] [--out DIR] [--svg] [--quiet]``.

Configuration files hold one ``key = value`` pair per line; ``#`` starts a
comment.  Every value is parsed and checked before any computation, and
artifacts are only written once the whole command has succeeded, so a
failing run leaves nothing behind.

Exit status: 0 success, 2 configuration error, 3 violated mathematical
precondition, 4 I/O error.
"""

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .classify import decay_classify, fprime_membership
from .counterexamples import counterexample_hypoellipticity, counterexample_solvability
from .diophantine import (GOLDEN, LiouvilleNumber, ModelSequence, check_condition_A, check_condition_B,
                          construct_failing_subsequence, liouville_number, small_divisors)
from .errors import ArchiveError, CertificationError, ParameterError, SglabError
from .evolution import CoefficientField, EvolutionProblem, TimeGrid, resonant_set, solve
from .grid import Grid, OperatorSpec, assemble_operator, direct_norm
from .io import Axes, Table, emit_svg, save_eig, save_field, to_table, weyl_table, write_csv
from .spectral import (DENSE_LIMIT, NORM_EQUIVALENCE_C, certified_window, eigendecompose, norm_ratio_sweep,
                       series_norm, weyl_fit)

COMMANDS = ("spectrum", "weyl", "norms", "diophantine", "solve", "counterexample")

# key -> (parser, default).  Defaults below are shared; COMMAND_DEFAULTS overrides per command.
DEFAULTS = {
    "L": 12.0, "N": 801, "m": 2, "mu": 2, "count": "auto",
    "check_L": 96.0, "check_N": 48001,
    "weyl_mode": "measured", "j_lo": 20, "j_hi": 150,
    "seq_kind": "power", "seq_a": "1", "seq_rho": 1.0,
    "vectors": 50, "norm_modes": 20,
    "alpha": "golden", "j_min": 10, "j_max": 100000, "epsilons": "0.5,1", "K": 3,
    "smalldiv_j_max": 1000,
    "T": 64, "omega": "-1j", "modes": 30, "forcing": "smooth", "forcing_decay": 6.0,
    "method": "fourier", "gamma_list": "0,1,2", "M_max": 3,
    "construction": "hypoellipticity", "L_max": 12, "certificate_M": 5,
    "seed": 0, "out_dir": "sglab-out",
}
COMMAND_DEFAULTS = {
    # reference resolution: >= 150 modes pass the boundary-decay test
    "spectrum": {"L": 72.0, "N": 28801},
    "weyl": {"L": 72.0, "N": 28801},
    "diophantine": {"omega": "0"},
    "counterexample": {"alpha": "liouville 3"},
}


def _int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ParameterError(f"{key}: expected an integer, got {raw!r}") from None


def _float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ParameterError(f"{key}: expected a number, got {raw!r}") from None


def _floats(key, raw):
    return tuple(_float(key, v) for v in str(raw).split(",") if v.strip())


def _ints(key, raw):
    return tuple(_int(key, v) for v in str(raw).split(",") if v.strip())


def _complex(key, raw):
    try:
        return complex(str(raw).replace(" ", ""))
    except ValueError:
        raise ParameterError(f"{key}: expected a complex number such as -1j or 0.5+2j, got {raw!r}") from None


def _choice(*options):
    def parse(key, raw):
        if raw not in options:
            raise ParameterError(f"{key}: expected one of {', '.join(options)}, got {raw!r}")
        return raw
    return parse


AUTO_COUNT = 300


def _count(key, raw):
    """'all', 'auto' (all for N <= DENSE_LIMIT, else AUTO_COUNT) or an integer."""
    return raw if raw in ("all", "auto") else _int(key, raw)


def _resolve_count(count, N):
    if count == "auto":
        return None if N <= DENSE_LIMIT else min(AUTO_COUNT, N)
    return None if count == "all" else count


def _scale(key, raw):
    try:
        return Fraction(str(raw)) if "." not in str(raw) and "e" not in str(raw).lower() else _float(key, raw)
    except ValueError:
        raise ParameterError(f"{key}: expected a number, got {raw!r}") from None


def _alpha(key, raw):
    """'rational p/q' | 'golden' | 'liouville <depth>'."""
    parts = str(raw).split()
    if parts == ["golden"]:
        return GOLDEN
    if len(parts) == 2 and parts[0] == "rational":
        try:
            return Fraction(parts[1])
        except (ValueError, ZeroDivisionError):
            raise ParameterError(f"{key}: bad rational {parts[1]!r}") from None
    if len(parts) == 2 and parts[0] == "liouville":
        depth = _int(key, parts[1])
        if not 1 <= depth <= 4:
            raise ParameterError(f"{key}: liouville depth must lie in [1, 4], got {depth}")
        return liouville_number(depth)
    raise ParameterError(f"{key}: expected 'rational p/q', 'golden' or 'liouville <depth>', got {raw!r}")


PARSERS = {
    "L": _float, "N": _int, "m": _int, "mu": _int, "count": _count,
    "check_L": _float, "check_N": _int,
    "weyl_mode": _choice("measured", "synthetic"), "j_lo": _int, "j_hi": _int,
    "seq_kind": _choice("power", "logpower"), "seq_a": _scale, "seq_rho": _float,
    "vectors": _int, "norm_modes": _int,
    "alpha": _alpha, "j_min": _int, "j_max": _int, "epsilons": _floats, "K": _int,
    "smalldiv_j_max": _int,
    "T": _int, "omega": _complex, "modes": _int, "forcing": _choice("smooth", "zero", "nonadmissible"),
    "forcing_decay": _float, "method": _choice("fourier", "quadrature", "quadrature-1", "quadrature-2"),
    "gamma_list": _ints, "M_max": _int,
    "construction": _choice("hypoellipticity", "solvability"), "L_max": _int, "certificate_M": _int,
    "seed": _int, "out_dir": str,
}


def read_config_text(text):
    """Raw key -> string mapping from key=value lines."""
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno}: expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PARSERS:
            raise ParameterError(f"config line {lineno}: unknown key {key!r}")
        if key in pairs:
            raise ParameterError(f"config line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def build_config(command, raw):
    """Merge defaults, parse every value and run the command's validation pass."""
    merged = dict(DEFAULTS)
    merged.update(COMMAND_DEFAULTS.get(command, {}))
    merged.update(raw)
    cfg = {k: PARSERS[k](k, v) if isinstance(v, str) and PARSERS[k] is not str else v
           for k, v in merged.items()}
    cfg["_raw"] = {k: str(v) for k, v in merged.items()}
    VALIDATORS[command](cfg)
    return cfg


def _positive_int(cfg, key, low=1):
    if cfg[key] < low:
        raise ParameterError(f"{key} must be >= {low}, got {cfg[key]}")


def _validate_operator(cfg, prefix=""):
    L, N = cfg[prefix + "L"], cfg[prefix + "N"]
    if not L > 0:
        raise ParameterError(f"{prefix}L must be positive, got {L}")
    if N < 3 or N % 2 == 0:
        raise ParameterError(f"{prefix}N must be an odd integer >= 3, got {N}")
    OperatorSpec(cfg["m"], cfg["mu"])
    count = _resolve_count(cfg["count"], N)
    if count is not None and not 1 <= count <= N:
        raise ParameterError(f"count must lie in [1, N={N}], got {count}")
    if count is None and N > DENSE_LIMIT:
        raise ParameterError(f"count=all needs N <= {DENSE_LIMIT}; set count for N={N}")


def _validate_sequence(cfg):
    ModelSequence(cfg["seq_kind"], cfg["seq_a"], cfg["seq_rho"])


def _validate_spectrum(cfg):
    _validate_operator(cfg)


def _validate_weyl(cfg):
    if cfg["weyl_mode"] == "measured":
        _validate_operator(cfg)
        _validate_operator(cfg, "check_")
    else:
        _validate_sequence(cfg)
    if cfg["j_lo"] < 10 or cfg["j_hi"] - cfg["j_lo"] + 1 < 20:
        raise ParameterError(f"j_lo..j_hi must start at >= 10 and span >= 20 modes, got {cfg['j_lo']}..{cfg['j_hi']}")


def _validate_norms(cfg):
    _validate_operator(cfg)
    _positive_int(cfg, "vectors")
    _positive_int(cfg, "norm_modes")
    count = _resolve_count(cfg["count"], cfg["N"]) or cfg["N"]
    if cfg["norm_modes"] > count:
        raise ParameterError(f"norm_modes={cfg['norm_modes']} exceeds the {count} computed eigenpairs")


def _validate_epsilons(cfg):
    if not cfg["epsilons"] or any(e < 0 for e in cfg["epsilons"]):
        raise ParameterError("epsilons must be a non-empty list of non-negative numbers")


def _validate_diophantine(cfg):
    _validate_sequence(cfg)
    _validate_epsilons(cfg)
    _positive_int(cfg, "j_max", 10)
    if not 1 <= cfg["j_min"] <= cfg["j_max"]:
        raise ParameterError(f"j_min must lie in [1, j_max], got {cfg['j_min']}")
    _positive_int(cfg, "smalldiv_j_max")
    _positive_int(cfg, "K")


def _validate_solve(cfg):
    _validate_sequence(cfg)
    TimeGrid(cfg["T"])
    _positive_int(cfg, "modes")
    if not cfg["gamma_list"] or any(g < 0 for g in cfg["gamma_list"]):
        raise ParameterError("gamma_list must be a non-empty list of non-negative integers")
    if cfg["omega"] == 0:
        raise ParameterError("omega must be non-zero")


def _validate_counterexample(cfg):
    _positive_int(cfg, "K")
    _positive_int(cfg, "L_max")
    if not 0 <= cfg["certificate_M"] <= cfg["L_max"]:
        raise ParameterError(f"certificate_M must lie in [0, L_max], got {cfg['certificate_M']}")
    _positive_int(cfg, "M_max", 0)


VALIDATORS = {
    "spectrum": _validate_spectrum, "weyl": _validate_weyl, "norms": _validate_norms,
    "diophantine": _validate_diophantine, "solve": _validate_solve, "counterexample": _validate_counterexample,
}


# ---------------------------------------------------------------- commands
# Each command returns (artifacts, summary).  An artifact is (filename, writer)
# where writer(path) produces the file; nothing is written until the end.

def _sequence(cfg):
    return ModelSequence(cfg["seq_kind"], cfg["seq_a"], cfg["seq_rho"])


def _decompose(cfg, prefix=""):
    L = cfg["check_L"] if prefix else cfg["L"]
    N = cfg["check_N"] if prefix else cfg["N"]
    op = assemble_operator(Grid(L, N), OperatorSpec(cfg["m"], cfg["mu"]))
    eig = eigendecompose(op, count=_resolve_count(cfg["count"], N))
    return eig.__class__(eig.eigenvalues, eig.eigenvectors, eig.spacing, eig.trusted_count, eig.grid, eig.spec,
                         {"L": L, "N": N, "m": cfg["m"], "mu": cfg["mu"], "count": str(cfg["count"])})


def _csv(report):
    return lambda path: write_csv(report, path)


def _svg(series, axes):
    return lambda path: emit_svg(series, axes, path)


def cmd_spectrum(cfg):
    eig = _decompose(cfg)
    lam = eig.eigenvalues
    j = np.arange(1, lam.size + 1)
    artifacts = [("eigenvalues.csv", _csv(eig)), ("spectrum.sgl", lambda p: save_eig(eig, p))]
    if cfg["svg"]:
        artifacts.append(("spectrum.svg", _svg([("lambda_j", j, lam)],
                                               Axes("j", "lambda_j", True, True, "eigenvalues"))))
    summary = [f"eigenpairs={lam.size}", f"trusted_count={eig.trusted_count}",
               f"lambda_1={lam[0]:.17g}", f"min_eigenvalue={lam.min():.17g}"]
    return artifacts, summary


def cmd_weyl(cfg):
    spec = OperatorSpec(cfg["m"], cfg["mu"])
    window = (cfg["j_lo"], cfg["j_hi"])
    if cfg["weyl_mode"] == "synthetic":
        lam = _sequence(cfg).values(1, cfg["j_hi"])
        fit = weyl_fit(lam, spec, window)
        table = weyl_table(lam, fit, log_corrected=False)
        summary = [f"mode=synthetic", f"slope_plain={fit.slope_plain:.17g}"]
    else:
        coarse, fine = _decompose(cfg), _decompose(cfg, "check_")
        certified = certified_window(coarse, fine)
        fit = weyl_fit(coarse, spec, window, trusted_count=certified)
        lam = coarse.eigenvalues
        table = weyl_table(coarse, fit)
        summary = [f"mode=measured", f"certified_window={certified}",
                   f"slope_plain={fit.slope_plain:.17g}", f"slope_logcorrected={fit.slope_logcorrected:.17g}",
                   f"predicted_exponent={fit.predicted_exponent:g}"]
    artifacts = [("weyl.csv", _csv(table)), ("weylfit.csv", _csv(fit))]
    if cfg["svg"]:
        jj = np.array([r[0] for r in table.rows], dtype=float)
        artifacts.append(("weyl.svg", _svg(
            [("lambda_j", jj, [r[1] for r in table.rows]), ("fit", jj, [r[2] for r in table.rows])],
            Axes("j", "lambda_j", True, True, "Weyl fit"))))
    return artifacts, summary


def cmd_norms(cfg):
    eig = _decompose(cfg)
    ratios = norm_ratio_sweep(eig, cfg["vectors"], cfg["norm_modes"], cfg["seed"])
    phi1 = eig.eigenvectors[:, 0]
    e1 = np.zeros(1)
    e1[0] = 1.0
    rows = [("phi_1", series_norm(e1, eig, 1), direct_norm(phi1, 2, 2, eig.grid),
             series_norm(e1, eig, 1) / direct_norm(phi1, 2, 2, eig.grid))]
    rng = np.random.default_rng(cfg["seed"])
    for i, ratio in enumerate(ratios, start=1):
        u = rng.standard_normal(cfg["norm_modes"])
        s = series_norm(u, eig, 1)
        rows.append((f"random_{i}", s, s / ratio, ratio))
    table = Table("norms", ("vector", "series", "direct", "ratio"), rows)
    c = NORM_EQUIVALENCE_C
    inside = bool(np.all((ratios >= 1 / c) & (ratios <= c)))
    summary = [f"seed={cfg['seed']}", f"ratio_min={ratios.min():.17g}", f"ratio_max={ratios.max():.17g}",
               f"frozen_c={c}", f"within_bounds={inside}", f"lambda_1={eig.eigenvalues[0]:.17g}"]
    artifacts = [("norms.csv", _csv(table))]
    if cfg["svg"]:
        artifacts.append(("norms.svg", _svg([("ratio", np.arange(1, ratios.size + 1), ratios)],
                                            Axes("vector", "series / direct", title="norm ratios"))))
    return artifacts, summary


def cmd_diophantine(cfg):
    alpha, seq = cfg["alpha"], _sequence(cfg)
    args = (alpha, seq, cfg["j_max"], cfg["epsilons"])
    rep_a = check_condition_A(*args, j_min=cfg["j_min"])
    rep_b = check_condition_B(*args, j_min=cfg["j_min"])
    omega = complex(float(alpha), cfg["omega"].imag)
    table = small_divisors(omega, seq, min(cfg["smalldiv_j_max"], cfg["j_max"]))
    artifacts = [("diophantine_A.csv", _csv(rep_a)), ("diophantine_B.csv", _csv(rep_b)),
                 ("smalldiv.csv", _csv(table))]
    summary = [f"alpha={rep_a.alpha}", f"A: {rep_a.label}", f"B: {rep_b.label}"]
    summary += [f"C_B({e:g})={c:.17g}" for e, c in zip(rep_b.epsilons, rep_b.constants)]
    if isinstance(alpha, LiouvilleNumber):
        sub = construct_failing_subsequence(alpha, min(cfg["K"], alpha.depth))
        ok = sub.verify()
        artifacts.append(("subsequence.csv", _csv(sub)))
        summary.append(f"failing subsequence: {len(sub.entries)} entries, exact check {'passed' if ok else 'FAILED'}")
    if cfg["svg"]:
        finite = np.isfinite(table.theta)
        artifacts.append(("smalldiv.svg", _svg([("Theta_j", table.j[finite], table.theta[finite])],
                                               Axes("j", "Theta_j", False, True, "small divisors"))))
    return artifacts, summary


def _forcing(cfg, grid, lam, omega):
    rng = np.random.default_rng(cfg["seed"])
    J, T = cfg["modes"], grid.T
    spectrum = np.zeros((J, T), complex)
    if cfg["forcing"] != "zero":
        k = grid.freqs
        band = np.abs(k) <= T // 4
        coef = rng.standard_normal((J, T)) + 1j * rng.standard_normal((J, T))
        spectrum = np.where(band, coef * np.exp(-np.abs(k) / 2.0), 0.0)
        spectrum *= (lam[:, None] ** -cfg["forcing_decay"])
    field = CoefficientField.from_spectrum(spectrum, grid)
    if cfg["forcing"] == "smooth":
        # zero the resonant coefficients so the forcing is admissible
        probe = EvolutionProblem(omega, lam, field)
        spectrum = spectrum.copy()
        for j, k_star in resonant_set(probe):
            spectrum[j - 1, grid.index(k_star)] = 0.0
        field = CoefficientField.from_spectrum(spectrum, grid)
    return field


def cmd_solve(cfg):
    grid = TimeGrid(cfg["T"])
    seq = _sequence(cfg)
    lam = seq.values(1, cfg["modes"])
    omega = cfg["omega"]
    f = _forcing(cfg, grid, lam, omega)
    u, report = solve(EvolutionProblem(omega, seq, f), cfg["method"])
    summary = [f"seed={cfg['seed']}", f"resonant_modes={len(report.resonant)}",
               f"max_residual={float(np.max(report.residuals)):.3e}",
               f"theta_range=({report.theta_range[0]:.6g}, {report.theta_range[1]:.6g})"]
    artifacts = [("solve.csv", _csv(report)), ("solution.sgl", lambda p: save_field(u, p))]
    if not np.any(f.spectrum):
        empty = Table("decay", ("gamma", "slope", "ci_low", "ci_high", "verdict"))
        artifacts.append(("decay.csv", _csv(empty)))
        summary.append("forcing is zero: u = 0, nothing to classify")
    else:
        decay = decay_classify(u, seq, cfg["gamma_list"], cfg["M_max"])
        artifacts.append(("decay.csv", _csv(decay)))
        summary.append(f"u: {decay.verdict} (slopes {', '.join(f'{r.slope:.3f}' for r in decay.rows)})")
    if cfg["svg"]:
        sup = u.sup_derivative(0)
        keep = sup > 0
        artifacts.append(("solve.svg", _svg([("sup |u_j|", lam[keep], sup[keep])],
                                            Axes("lambda_j", "sup_t |u_j|", True, True, "solution decay"))))
    return artifacts, summary


def cmd_counterexample(cfg):
    alpha = cfg["alpha"]
    if not isinstance(alpha, LiouvilleNumber):
        raise CertificationError(f"alpha={float(alpha):.17g} is not a Liouville constant; "
                                 "no certified construction exists")
    if cfg["construction"] == "hypoellipticity":
        sub = construct_failing_subsequence(alpha, cfg["K"])
        ex = counterexample_hypoellipticity(sub, alpha, M_max=cfg["M_max"])
        rows = []
        for e, r, ok in zip(sub.entries, ex.residuals, ex.gap_checks):
            rows.append((e.k, e.j, e.tau, 1.0, float(e.gap_high), str(e.gap_high), ok, "0" if r.is_zero() else "nonzero"))
        table = Table("hypoellipticity", ("k", "j", "tau", "abs_u", "f_amplitude", "gap_exact",
                                          "gap_below_j_pow_minus_k", "residual"), rows)
        artifacts = [("hypoellipticity.csv", _csv(table))]
        summary = [f"entries={len(rows)}", f"exact_Lu_equals_f={ex.exact}",
                   f"unit_modulus_defect={ex.unit_modulus_defect:.3e}"]
        if ex.f_report is not None:
            artifacts += [("decay_f.csv", _csv(ex.f_report)), ("decay_u.csv", _csv(ex.u_report))]
            summary += [f"f: {ex.f_report.verdict} (slope {ex.f_report.slope(0):.3f})",
                        f"u: {ex.u_report.verdict} (slope {ex.u_report.slope(0):.3f})"]
        return artifacts, summary
    ex = counterexample_solvability(alpha, L_max=cfg["L_max"], M_max=cfg["certificate_M"],
                                    decay_M=cfg["M_max"], gamma_list=cfg["gamma_list"])
    rows = [(r.ell, r.M, r.log_value, ex.increasing[r.M]) for r in ex.certificate]
    table = Table("certificate", ("ell", "M", "log_value", "increasing_beyond_2M"), rows)
    artifacts = [("certificate.csv", _csv(table)), ("decay_f.csv", _csv(ex.f_report))]
    summary = [f"levels={[w.level for w in ex.schedule]}",
               f"increasing={all(ex.increasing.values())}",
               f"f: {ex.f_report.verdict}", f"f admissible: {ex.admissible}",
               f"u: {ex.u_growth.verdict}"]
    if cfg["svg"]:
        series = [(f"M={M}", [r.ell for r in ex.certificate if r.M == M], ex.values(M))
                  for M in sorted(ex.increasing)]
        artifacts.append(("certificate.svg", _svg(series, Axes("ell", "log certificate", title="dual pairing"))))
    return artifacts, summary


RUNNERS = {
    "spectrum": cmd_spectrum, "weyl": cmd_weyl, "norms": cmd_norms,
    "diophantine": cmd_diophantine, "solve": cmd_solve, "counterexample": cmd_counterexample,
}


def _manifest(command, cfg):
    lines = [f"# sglab {__version__} {command}"]
    lines += [f"{k} = {v}" for k, v in sorted(cfg["_raw"].items())]
    return "\n".join(lines) + "\n"


def run(command, config_text="", out=None, svg=False):
    """Run one command; returns (output directory, written files, summary lines)."""
    raw = read_config_text(config_text)
    cfg = build_config(command, raw)
    cfg["svg"] = svg
    out_dir = Path(out if out is not None else cfg["out_dir"])
    artifacts, summary = RUNNERS[command](cfg)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, writer in artifacts:
            writer(out_dir / name)
            written.append(out_dir / name)
        (out_dir / "run.cfg").write_text(_manifest(command, cfg), encoding="utf-8", newline="\n")
        written.append(out_dir / "run.cfg")
    except OSError as exc:
        raise ArchiveError(f"cannot write to {out_dir}: {exc}") from exc
    return out_dir, written, summary


def main(argv=None):
    parser = argparse.ArgumentParser(prog="sglab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"sglab {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", help="output directory (overrides out_dir)")
    parser.add_argument("--svg", action="store_true", help="also write SVG plots")
    parser.add_argument("--quiet", action="store_true", help="suppress the summary")
    args = parser.parse_args(argv)
    try:
        text = ""
        if args.config:
            try:
                text = Path(args.config).read_text(encoding="utf-8")
            except OSError as exc:
                raise ArchiveError(f"cannot read config {args.config}: {exc}") from exc
        out_dir, written, summary = run(args.command, text, args.out, args.svg)
    except SglabError as exc:
        print(f"sglab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_status
    except OSError as exc:
        print(f"sglab {args.command}: OSError: {exc}", file=sys.stderr)
        return 4
    if not args.quiet:
        for line in summary:
            print(line)
        print(f"wrote {len(written)} files to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
