"""Command-line front end.

Subcommands: coeffs, prob, density-grid, mc, compare, zeta, selftest.
Options can come from flags or from a JSON config file (--config);
explicit flags win.  Every output file embeds the resolved configuration,
and reruns with the same configuration produce byte-identical files.

Exit codes: 0 success, 2 validation error, 3 numerical assertion failure,
4 gate refusal.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import distribution as dist
from . import montecarlo as mc
from . import zetaemp
from .errors import GateError, NumericalAssertionError, ValidationError
from .expansion import CoeffTable, ExpansionConfig, b_table, coefficient_envelope
from .lfunctions import psi_vector, resolve_spec, sigma_T

_DEF = {
    "spec": "zeta",
    "theta": 0.4,
    "logT": 1e4,
    "N": 8,
    "P_max": 10 ** 6,
    "tol": 1e-15,
    "n3_sigma_mode": "sigma_T",
    "tail_mode": "pnt",
    "seed": 42,
    "workers": 0,
    "P_MC": 10 ** 5,
    "n_samples": 10 ** 5,
    "grid": 81,
    "grid_range": 4.0,
    "T": 1e6,
    "tracked": False,
    "mc_tol": 1e-9,
    "out": None,
}


def _add_common(p):
    p.add_argument("--config", help="JSON file with option defaults (flags win)")
    p.add_argument("--spec", help="built-in name(s) or spec file(s), comma separated")
    p.add_argument("--theta", type=float)
    p.add_argument("--logT", type=float)
    p.add_argument("--N", type=int, help="total-degree cutoff of the expansion")
    p.add_argument("--P-max", dest="P_max", type=int, help="prime cutoff of the sums")
    p.add_argument("--tol", type=float, help="local power-tail tolerance")
    p.add_argument("--n3-sigma-mode", dest="n3_sigma_mode", choices=["sigma_T", "half"])
    p.add_argument("--tail-mode", dest="tail_mode", choices=["pnt", "none"])
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="numba thread count (0 = library default)")
    p.add_argument("--out", help="output path (subcommand-specific default)")


def _parse_rect(text: str, J: int) -> dist.Rectangle:
    vals = [float(x) for x in text.replace("inf", "inf").split(",")]
    if len(vals) != 4 * J:
        raise ValidationError(
            f"--rect needs 4J = {4 * J} comma-separated numbers "
            "(a_1..a_J, b_1..b_J, c_1..c_J, d_1..d_J)"
        )
    return dist.Rectangle(
        a=tuple(vals[:J]),
        b=tuple(vals[J: 2 * J]),
        c=tuple(vals[2 * J: 3 * J]),
        d=tuple(vals[3 * J: 4 * J]),
    )


def _default_rects(J: int) -> list[dist.Rectangle]:
    if J == 1:
        shapes = [
            (0.25, 0.25), (0.5, 0.5), (0.75, 0.75), (1.0, 1.0), (1.5, 1.5),
            (2.0, 2.0), (0.5, 1.0), (1.0, 0.5), (0.75, 1.5), (2.0, 0.5),
        ]
    else:
        shapes = [(0.5, 0.5), (1.0, 1.0), (1.5, 1.5), (0.5, 1.0), (2.0, 2.0)]
    return [dist.Rectangle.central(J, hu, hv) for hu, hv in shapes]


def _resolve(args) -> dict:
    cfg = dict(_DEF)
    if getattr(args, "config", None):
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"bad config file {args.config}: {exc}") from exc
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    return cfg


def _expansion_config(cfg) -> ExpansionConfig:
    return ExpansionConfig(
        N=int(cfg["N"]),
        P_max=int(cfg["P_max"]),
        tol=float(cfg["tol"]),
        n3_sigma_mode=cfg["n3_sigma_mode"],
        tail_mode=cfg["tail_mode"],
    )


def _echo(cfg: dict) -> str:
    return "# config: " + json.dumps(cfg, sort_keys=True, default=str)


def _cmd_coeffs(args) -> int:
    cfg = _resolve(args)
    spec = resolve_spec(cfg["spec"])
    table = b_table(spec, cfg["theta"], cfg["logT"], _expansion_config(cfg))
    env = coefficient_envelope(table)
    table.meta["envelope"] = {
        "c0": env.c0, "r": env.r, "max_violation": env.max_violation,
        "degenerate": env.degenerate, "n_points": env.n_points,
    }
    out = Path(cfg["out"] or f"coeffs_{spec.label}_N{table.N}.json")
    table.save(out)
    print(f"wrote {out} (terms: {len(table.b)}, imag residue: {table.meta['imag_residue']:.3e})")
    return 0


def _load_or_build_table(cfg) -> CoeffTable:
    spec = resolve_spec(cfg["spec"])
    return b_table(spec, cfg["theta"], cfg["logT"], _expansion_config(cfg))


def _cmd_prob(args) -> int:
    cfg = _resolve(args)
    spec = resolve_spec(cfg["spec"])
    table = _load_or_build_table(cfg)
    rects = [_parse_rect(r, spec.J) for r in (args.rect or [])] or _default_rects(spec.J)
    out = Path(cfg["out"] or f"prob_{spec.label}.csv")
    lines = [_echo(cfg), "rect,expansion,gaussian_leading,tail_hint"]
    for rect in rects:
        p = dist.probability(table, rect)
        g = dist.gaussian_leading(rect)
        t = dist.probability_tail_hint(table, rect)
        lines.append("%s,%.17g,%.17g,%.17g" % (rect.label(), p, g, t))
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({len(rects)} rectangles)")
    return 0


def _cmd_density_grid(args) -> int:
    cfg = _resolve(args)
    spec = resolve_spec(cfg["spec"])
    if spec.J != 1:
        raise ValidationError("density-grid emits a 2-D grid; J = 1 specs only")
    table = _load_or_build_table(cfg)
    half = cfg["grid_range"] * math.sqrt(float(table.psi[0]))
    n = int(cfg["grid"])
    us = np.linspace(-half, half, n)
    out = Path(cfg["out"] or f"density_{spec.label}.csv")
    H = dist.density_grid(table, us, us)
    lines = [_echo(cfg), "u,v,H"]
    for i in range(n):
        for k in range(n):
            lines.append("%.17g,%.17g,%.17g" % (us[i], us[k], H[i, k]))
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} ({n}x{n} grid)")
    return 0


def _cmd_mc(args) -> int:
    cfg = _resolve(args)
    spec = resolve_spec(cfg["spec"])
    st = sigma_T(cfg["theta"], cfg["logT"])
    batch = mc.sample_logL(
        spec, st, int(cfg["P_MC"]), int(cfg["n_samples"]), int(cfg["seed"]),
        tol=float(cfg["mc_tol"]),
        workers=int(cfg["workers"]) or None,
    )
    out = Path(cfg["out"] or f"mc_{spec.label}_n{batch.n}.bin")
    batch.save(out)
    if args.csv:
        batch.to_csv(out.with_suffix(".csv"))
    print(
        f"wrote {out} (n={batch.n}, tail_sd={np.array2string(batch.truncation_sd, precision=4)})"
    )
    return 0


def _cmd_compare(args) -> int:
    cfg = _resolve(args)
    if getattr(args, "P_max", None) is None and "P_max" not in _file_keys(args):
        cfg["P_max"] = cfg["P_MC"]  # matched cutoffs: truncation bias cancels
    spec = resolve_spec(cfg["spec"])
    st = sigma_T(cfg["theta"], cfg["logT"])
    psi = psi_vector(spec, cfg["theta"], cfg["logT"])
    mc.check_compare_gate(spec, st, int(cfg["P_max"]), int(cfg["P_MC"]), psi)
    table = _load_or_build_table(cfg)
    batch = mc.sample_logL(
        spec, st, int(cfg["P_MC"]), int(cfg["n_samples"]), int(cfg["seed"]),
        tol=float(cfg["mc_tol"]),
        workers=int(cfg["workers"]) or None,
    )
    rects = [_parse_rect(r, spec.J) for r in (args.rect or [])] or _default_rects(spec.J)
    out = Path(cfg["out"] or f"compare_{spec.label}.csv")
    lines = [_echo(cfg), "rect,expansion,mc_estimate,stderr,abs_diff,verdict"]
    worst = 0.0
    n_fail = 0
    for rect in rects:
        p = dist.probability(table, rect)
        est, se = mc.empirical_probability(batch, rect, psi)
        diff = abs(p - est)
        gate = max(4.0 * se, 0.02)
        verdict = "PASS" if diff <= gate else "FAIL"
        n_fail += verdict == "FAIL"
        worst = max(worst, diff)
        lines.append(
            "%s,%.17g,%.17g,%.17g,%.17g,%s" % (rect.label(), p, est, se, diff, verdict)
        )
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {out} (worst |diff| = {worst:.4g}, {n_fail} FAIL)")
    return 0 if n_fail == 0 else 3


def _file_keys(args) -> set:
    if getattr(args, "config", None):
        try:
            return set(json.loads(Path(args.config).read_text()))
        except Exception:
            return set()
    return set()


def _cmd_zeta(args) -> int:
    cfg = _resolve(args)
    run = zetaemp.empirical_run(
        float(cfg["T"]), cfg["theta"], int(cfg["n_samples"]), int(cfg["seed"]),
        tracked=bool(cfg["tracked"]) or bool(args.rect),
    )
    out = Path(cfg["out"] or f"zeta_T{int(cfg['T'])}.csv")
    run.to_csv(out)
    summary = zetaemp.run_summary(run)
    if args.rect:
        rect = _parse_rect(args.rect[0], 1)
        est, se, excl = zetaemp.empirical_Phi(
            float(cfg["T"]), cfg["theta"], rect, run.n, int(cfg["seed"]), run=run
        )
        summary["rect"] = rect.label()
        summary["rect_estimate"] = est
        summary["rect_stderr"] = se
        summary["gaussian_leading"] = dist.gaussian_leading(rect)
    spath = out.with_suffix(".summary.json")
    spath.write_text(json.dumps(summary, sort_keys=True, indent=1, default=str) + "\n")
    print(f"wrote {out} and {spath} (KS = {summary['ks_normalized']:.4f})")
    return 0


def _cmd_selftest(args) -> int:
    """Fast structural checks; the full acceptance suite lives in pytest."""
    import scipy.integrate as si

    from .hermite import gauss_hermite_segment, hermite_eval
    from .localmoments import A_moment, mc_moment_oracle
    from .series import TruncatedSeries

    failures = []

    def check(name, ok, detail=""):
        print(f"{'PASS' if ok else 'FAIL'}  {name}{'  ' + detail if detail else ''}")
        if not ok:
            failures.append(name)

    rs = np.random.RandomState(1)
    worst = 0.0
    for k in range(1, 9):
        a, b = sorted(rs.uniform(-4, 4, 2))
        num = si.quad(
            lambda u, k=k: math.exp(-math.pi * u * u) * hermite_eval(k, math.sqrt(math.pi) * u),
            a, b, limit=200,
        )[0]
        worst = max(worst, abs(num - gauss_hermite_segment(k, a, b)))
    check("hermite segment closed form vs quadrature", worst < 1e-9, f"worst {worst:.2e}")

    s = TruncatedSeries(1, 8, {((1,), (1,)): 0.3 + 0.0j, ((2,), (1,)): 0.1j})
    rt = (s.exp() - TruncatedSeries.one(1, 8)).log1p() - s
    check("series exp/log1p roundtrip", rt.max_abs() < 1e-12, f"residual {rt.max_abs():.2e}")

    spec = resolve_spec("zeta")
    a_exact = A_moment(spec, 2, 1.0, (1,), (1,))
    est, se = mc_moment_oracle(spec, 2, 1.0, (1,), (1,), 20000, 5)
    check(
        "A moment vs MC oracle (p=2, k=l=1)",
        abs(a_exact - est) <= 4 * se,
        f"diff {abs(a_exact - est):.2e} vs 4se {4 * se:.2e}",
    )

    cfgx = ExpansionConfig(N=4, P_max=10 ** 3, tail_mode="none")
    table = b_table(spec, 0.4, 1e4, cfgx)
    check("b(0,0) = 1", table.get((0,), (0,)) == 1.0)
    check(
        "prob(full) = 1",
        dist.probability(table, dist.Rectangle.full(1)) == 1.0,
    )
    if failures:
        raise NumericalAssertionError(f"selftest failures: {failures}")
    print("selftest OK")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="selbergclt",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="build and save a coefficient table (JSON)")
    _add_common(p)

    p = sub.add_parser(
        "prob",
        help="rectangle probabilities CSV: rect, expansion, gaussian_leading, tail_hint",
    )
    _add_common(p)
    p.add_argument("--rect", action="append", help="a..,b..,c..,d.. (4J numbers); repeatable")

    p = sub.add_parser("density-grid", help="density on a square grid CSV: u, v, H")
    _add_common(p)
    p.add_argument("--grid", type=int, help="points per axis")
    p.add_argument("--grid-range", dest="grid_range", type=float,
                   help="half-width in multiples of sqrt(psi)")

    p = sub.add_parser("mc", help="sample the random model; writes a binary batch")
    _add_common(p)
    p.add_argument("--P-MC", dest="P_MC", type=int)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--mc-tol", dest="mc_tol", type=float)
    p.add_argument("--csv", action="store_true", help="also export rows as CSV")

    p = sub.add_parser(
        "compare",
        help="expansion vs Monte Carlo CSV: rect, expansion, mc, stderr, diff, verdict",
    )
    _add_common(p)
    p.add_argument("--P-MC", dest="P_MC", type=int)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--mc-tol", dest="mc_tol", type=float)
    p.add_argument("--rect", action="append")

    p = sub.add_parser("zeta", help="sample log zeta(sigma_T + it) over [T, 2T]")
    _add_common(p)
    p.add_argument("--T", type=float, help="actual T (moderate; not log T)")
    p.add_argument("--n", "--n-samples", dest="n_samples", type=int)
    p.add_argument("--tracked", action="store_true", help="continue arg from sigma = 3")
    p.add_argument("--rect", action="append", help="also report one rectangle estimate")

    p = sub.add_parser("selftest", help="fast structural self-checks")
    _add_common(p)

    return ap


_HANDLERS = {
    "coeffs": _cmd_coeffs,
    "prob": _cmd_prob,
    "density-grid": _cmd_density_grid,
    "mc": _cmd_mc,
    "compare": _cmd_compare,
    "zeta": _cmd_zeta,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalAssertionError as exc:
        print(f"numerical assertion failed: {exc}", file=sys.stderr)
        return 3
    except GateError as exc:
        print(f"gate refused: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
