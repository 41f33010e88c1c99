"""Command-line front end.

Every subcommand writes CSV files (17 significant digits, fixed column order)
plus ``manifest.json`` listing the configuration, library versions, fitted
numbers and a SHA-256 hash of each output.  Nothing time-dependent is
recorded, so identical serial runs give byte-identical outputs.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
Failures also write ``error.json`` with a machine-readable ``error_class``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import platform
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import EquilibriumSpec, RunConfig, Tolerances
from .domains import ConformalImage, SyntheticQuadratic, Translated, UnitDisc, WholePlane
from .errors import ConfigError, VortexError

OUTDIR_ENV = "VORTEXFLOQUET_OUTDIR"
DEFAULT_OUTDIR = "vortexfloquet-out"
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def fmt(x) -> str:
    return format(float(x), ".17g")


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0 or stop < start:
                raise ConfigError(f"bad grid range {text!r}")
            count = int(round((stop - start) / step)) + 1
            return tuple(float(np.round(start + k * step, 12)) for k in range(count))
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {text!r}") from exc


class Output:
    """Collects written files and fitted numbers for the manifest."""

    def __init__(self, directory: Path, cfg: RunConfig, argv: list[str]):
        self.dir = directory
        self.dir.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.argv = argv
        self.files: list[Path] = []
        self.results: dict = {}

    def csv(self, name: str, header: list[str], rows) -> Path:
        path = self.dir / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
        self.files.append(path)
        return path

    def text(self, name: str, content: str) -> Path:
        path = self.dir / name
        path.write_text(content)
        self.files.append(path)
        return path

    def manifest(self) -> Path:
        outputs = []
        for p in self.files:
            data = p.read_bytes()
            outputs.append({"path": p.name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
        doc = {
            "tool": "vortexfloquet",
            "version": __version__,
            "subcommand": self.cfg.subcommand,
            "argv": self.argv,
            "config": self.cfg.to_text(),
            "versions": {"python": platform.python_version(), "numpy": np.__version__,
                         "scipy": scipy.__version__},
            "results": self.results,
            "outputs": outputs,
        }
        path = self.dir / "manifest.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
        return path


def _json_default(o):
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(type(o))


def cplx(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


# -- argument parsing ----------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, *, domain=True, equilibrium=True, grid=False):
    p.add_argument("--config", help="run configuration file (INI); flags override its values")
    p.add_argument("--out", help=f"output directory (default: ${OUTDIR_ENV} or ./{DEFAULT_OUTDIR})")
    p.add_argument("--plot", action="store_true", help="also write a matplotlib script for the outputs")
    if domain:
        p.add_argument("--domain", choices=["whole-plane", "unit-disc", "synthetic-quadratic", "conformal"])
        p.add_argument("--S", nargs=3, type=float, metavar=("S11", "S12", "S22"),
                       help="matrix entries for the synthetic-quadratic domain")
        p.add_argument("--coeffs", type=str, help="conformal map coefficients c0,c1,... (real parts)")
        p.add_argument("--coeffs-im", type=str, help="imaginary parts of the conformal coefficients")
        p.add_argument("--center", nargs=2, type=float, metavar=("X", "Y"),
                       help="move the origin to this point (a Robin critical point)")
    if equilibrium:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--pair", nargs=2, type=float, metavar=("G1", "G2"))
        g.add_argument("--triangle", nargs=3, type=float, metavar=("G1", "G2", "G3"))
        g.add_argument("--rhombus", type=float, metavar="Y")
        p.add_argument("--separation", type=float, help="pair separation D")
    if grid:
        p.add_argument("--r", dest="grid", help="r grid: start:stop:step or comma list")
        p.add_argument("--jobs", type=int, help="worker processes (1 = serial, reproducible)")
    p.add_argument("--cluster-tol", type=float)
    p.add_argument("--seed", type=int, help="recorded in the manifest; all algorithms are deterministic")
    p.add_argument("--tol", type=float, help="integrator tolerance for monodromy computations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vortexfloquet",
                                     description="Floquet analysis of N-vortex relative equilibria and their "
                                                 "continuations in bounded domains.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibria", help="construct an equilibrium, report residual, nu, Gamma, L, multipliers")
    _add_common(p, domain=False)

    p = sub.add_parser("simulate", help="integrate the scaled vortex system")
    _add_common(p)
    p.add_argument("--initial", help="CSV file with one row x1,y1,...,xN,yN (default: equilibrium z0)")
    p.add_argument("--gamma", type=str, help="strengths for --initial, comma separated")
    p.add_argument("--T", dest="t_final", type=float, help="final time (may be negative)")
    p.add_argument("--samples", type=int, help="number of output times")
    p.add_argument("--scale", dest="r_value", type=float, help="scale parameter r")

    p = sub.add_parser("floquet", help="Floquet multipliers of an equilibrium or a family point")
    _add_common(p)
    p.add_argument("--scale", dest="r_value", type=float,
                   help="analyse the continued family point at this r instead of the equilibrium")

    for name, helptext in (("continue", "continue the periodic family over an r grid"),
                           ("sweep", "continuation plus multiplier, trace and expansion fits")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p, grid=True)

    p = sub.add_parser("robin", help="critical points of the Robin function")
    _add_common(p, equilibrium=False)
    p.add_argument("--gamma-total", type=float, default=1.0, help="Gamma used for the prediction coefficient")

    p = sub.add_parser("bifurcation", help="approximately simple eigenvalue tools")
    p.add_argument("action", choices=["selftest", "fit"])
    p.add_argument("--matrices", help="CSV of sampled matrices (columns r, re_i_j, im_i_j; must include r = 0)")
    p.add_argument("--lam0", type=complex, default=1.0)
    p.add_argument("--exponent", type=float, default=2.0)
    p.add_argument("--out")
    p.add_argument("--plot", action="store_true")
    p.add_argument("--config")

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--out")
    p.add_argument("--config")
    p.add_argument("--plot", action="store_true")
    return parser


def _domain_from_args(args, base):
    kind = getattr(args, "domain", None)
    dom = base
    if kind == "whole-plane":
        dom = WholePlane()
    elif kind == "unit-disc":
        dom = UnitDisc()
    elif kind == "synthetic-quadratic":
        s = args.S if args.S is not None else (1.0, 0.0, -1.0)
        dom = SyntheticQuadratic(((s[0], s[1]), (s[1], s[2])))
    elif kind == "conformal":
        if not args.coeffs:
            raise ConfigError("conformal domain needs --coeffs")
        re = [float(t) for t in args.coeffs.split(",")]
        im = [float(t) for t in args.coeffs_im.split(",")] if args.coeffs_im else [0.0] * len(re)
        if len(re) != len(im):
            raise ConfigError("--coeffs and --coeffs-im lengths differ")
        dom = ConformalImage(tuple(complex(a, b) for a, b in zip(re, im)))
    elif kind is None and getattr(args, "S", None) is not None:
        raise ConfigError("--S given without --domain synthetic-quadratic")
    if getattr(args, "center", None) is not None:
        dom = Translated(dom, tuple(args.center))
    return dom


def config_from_args(args) -> RunConfig:
    cfg = RunConfig.read(args.config) if getattr(args, "config", None) else RunConfig()
    kw = {"subcommand": args.command}
    if hasattr(args, "domain"):
        kw["domain"] = _domain_from_args(args, cfg.domain)
    eq = cfg.equilibrium
    if getattr(args, "pair", None):
        eq = EquilibriumSpec("pair", tuple(args.pair), args.separation or 1.0)
    elif getattr(args, "triangle", None):
        eq = EquilibriumSpec("triangle", tuple(args.triangle))
    elif getattr(args, "rhombus", None) is not None:
        eq = EquilibriumSpec("rhombus", (1.0, 1.0, 1.0, 1.0), y=args.rhombus)
    elif getattr(args, "separation", None):
        eq = EquilibriumSpec(eq.kind, eq.gamma, args.separation, eq.y, eq.positions)
    kw["equilibrium"] = eq
    if getattr(args, "grid", None):
        kw["r_grid"] = parse_grid(args.grid)
    if getattr(args, "jobs", None):
        kw["jobs"] = args.jobs
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    t = cfg.tolerances
    tol = Tolerances(args.tol if getattr(args, "tol", None) else t.integrator, t.newton,
                     args.cluster_tol if getattr(args, "cluster_tol", None) else t.cluster,
                     t.degeneracy, t.fit_window)
    kw["tolerances"] = tol
    if getattr(args, "t_final", None) is not None:
        kw["t_final"] = args.t_final
    if getattr(args, "samples", None):
        kw["samples"] = args.samples
    if getattr(args, "r_value", None) is not None:
        kw["r"] = args.r_value
    out = getattr(args, "out", None) or os.environ.get(OUTDIR_ENV) or cfg.output_dir or DEFAULT_OUTDIR
    kw["output_dir"] = out
    return replace(cfg, **kw)


# -- subcommands -----------------------------------------------------------------------


def cmd_equilibria(cfg: RunConfig, out: Output, args) -> None:
    from .equilibria import predicted_multipliers

    eq = cfg.equilibrium.build()
    try:
        mult = predicted_multipliers(eq)
    except VortexError:
        mult = None
    cov = float(np.linalg.norm(eq.center_of_vorticity))
    out.csv("equilibrium.csv", ["kind", "n", "nu", "Gamma", "L", "residual", "center_residual", "flags"],
            [[eq.kind, eq.n, eq.nu, eq.vorticities.total, eq.vorticities.momentum, eq.residual, cov,
              ";".join(eq.flags)]])
    out.csv("positions.csv", ["vortex", "gamma", "x", "y"],
            [[j + 1, eq.vorticities.gamma[j], eq.z0[2 * j], eq.z0[2 * j + 1]] for j in range(eq.n)])
    if mult is not None:
        out.csv("predicted_multipliers.csv", ["index", "re", "im", "abs"],
                [[k, m.real, m.imag, abs(m)] for k, m in enumerate(mult)])
    out.results.update({"nu": eq.nu, "Gamma": eq.vorticities.total, "L": eq.vorticities.momentum,
                        "residual": eq.residual, "flags": list(eq.flags),
                        "predicted_multipliers": None if mult is None else [cplx(m) for m in mult]})
    print(f"kind={eq.kind} nu={fmt(eq.nu)} Gamma={fmt(eq.vorticities.total)} L={fmt(eq.vorticities.momentum)} "
          f"residual={eq.residual:.3e} flags={','.join(eq.flags) or '-'}")
    if mult is not None:
        for m in mult:
            print(f"  multiplier {fmt(m.real)} {fmt(m.imag)}i")


def cmd_simulate(cfg: RunConfig, out: Output, args) -> None:
    from .core import ScaledHamiltonian, Vorticities
    from .dynamics import flow

    if args.initial:
        if not args.gamma:
            raise ConfigError("--initial needs --gamma")
        vort = Vorticities(tuple(float(t) for t in args.gamma.split(",")))
        with open(args.initial) as fh:
            rows = [r for r in csv.reader(fh) if r]
        try:
            u0 = np.array([float(v) for v in rows[-1]])
        except ValueError as exc:
            raise ConfigError(f"cannot parse initial condition: {exc}") from exc
    else:
        eq = cfg.equilibrium.build().normalized()
        vort, u0 = eq.vorticities, eq.z0
    sh = ScaledHamiltonian(cfg.domain, vort, cfg.r)
    ts = np.linspace(0.0, cfg.t_final, max(cfg.samples, 2))
    traj = flow(sh, u0, cfg.t_final, t_eval=ts, rtol=min(cfg.tolerances.integrator * 100, 1e-11),
                atol=min(cfg.tolerances.integrator * 100, 1e-11))
    header = ["t"] + [f"{c}{j + 1}" for j in range(vort.n) for c in ("x", "y")] + ["H"]
    out.csv("trajectory.csv", header, [[t, *u, H] for t, u, H in zip(traj.times, traj.states, traj.energies)])
    out.results.update({"energy_drift": traj.energy_drift, "min_distance": traj.min_distance, "ok": traj.ok})
    if args.plot:
        out.text("plot_trajectory.py", PLOT_TRAJECTORY)
    print(f"energy drift {traj.energy_drift:.3e}, min distance {traj.min_distance:.4g}")
    if not traj.ok:
        raise VortexError(traj.message)


def _spectrum_rows(spec):
    return [[k, z.real, z.imag, abs(z), int(c)] for k, (z, c) in enumerate(zip(spec.eigenvalues, spec.cluster_ids))]


def cmd_floquet(cfg: RunConfig, out: Output, args) -> None:
    from .floquet import equilibrium_spectrum, spectrum

    eq = cfg.equilibrium.build()
    tol = cfg.tolerances
    if cfg.r > 0.0:
        from .continuation import continue_family

        fam = continue_family(cfg.domain, eq, [cfg.r], tol=tol.integrator, newton_tol=tol.newton)
        fam.raise_if_failed()
        spec = spectrum(fam.points[0].monodromy, tol.cluster)
        out.results["residual"] = fam.points[0].residual
    else:
        spec = equilibrium_spectrum(eq, tol.cluster, tol.degeneracy)
        out.results["unit_multiplicity_deflated"] = spec.extra["unit_multiplicity_deflated"]
    out.csv("eigenvalues.csv", ["index", "re", "im", "abs", "cluster"], _spectrum_rows(spec))
    out.results.update({"labels": sorted(spec.labels), "unit_multiplicity": spec.unit_multiplicity,
                        "cluster_sizes": spec.cluster_sizes, "determinant": spec.determinant,
                        "pairing_defect": spec.pairing_defect,
                        "geometric_unit_estimate": spec.geometric_unit_estimate})
    for z in spec.eigenvalues:
        print(f"{fmt(z.real)} {fmt(z.imag)}i  |lambda|={abs(z):.12f}")
    print("labels:", ", ".join(sorted(spec.labels)))


def _family(cfg: RunConfig):
    from .continuation import continue_family

    eq = cfg.equilibrium.build()
    tol = cfg.tolerances
    fam = continue_family(cfg.domain, eq, cfg.r_grid, tol=tol.integrator, newton_tol=tol.newton, jobs=cfg.jobs)
    return eq, fam


def _family_rows(fam, curve=None, cluster_tol=1e-5):
    rows = []
    for k, p in enumerate(fam.points):
        row = [p.r, p.residual, p.energy, p.section_value, p.iterations, float(np.trace(p.monodromy))]
        if curve is not None:
            lp, lm = curve.lam_plus[k], curve.lam_minus[k]
            row += [lp.real, lp.imag, lm.real, lm.imag]
        row.append(";".join(sorted(p.spectrum(cluster_tol).labels)))
        rows.append(row)
    return rows


FAMILY_HEADER = ["r", "residual", "H_r", "section", "iterations", "trace", "lam_plus_re", "lam_plus_im",
                 "lam_minus_re", "lam_minus_im", "labels"]


def cmd_continue(cfg: RunConfig, out: Output, args) -> None:
    from .continuation import multiplier_curve

    eq, fam = _family(cfg)
    if fam.complete:
        curve = multiplier_curve(cfg.domain, eq, cfg.r_grid, family=fam, cluster_tol=cfg.tolerances.cluster)
        out.csv("family.csv", FAMILY_HEADER, _family_rows(fam, curve, cfg.tolerances.cluster))
    else:
        out.csv("family.csv", FAMILY_HEADER[:6] + ["labels"], _family_rows(fam, cluster_tol=cfg.tolerances.cluster))
    out.csv("family_u0.csv", ["r"] + [f"u{k}" for k in range(fam.equilibrium.z0.size)],
            [[p.r, *p.u0] for p in fam.points])
    out.results.update({"complete": fam.complete, "failed_at": fam.failed_at, "diagnostic": fam.diagnostic})
    print(f"{len(fam.points)}/{len(fam.r_grid)} points, max residual "
          f"{max((p.residual for p in fam.points), default=float('nan')):.2e}")
    if not fam.complete:
        raise _family_error(fam)


def _family_error(fam):
    from .errors import ContinuationError

    err = ContinuationError(f"continuation broke at r={fam.failed_at}: {fam.diagnostic}")
    err.partial = True
    return err


def cmd_sweep(cfg: RunConfig, out: Output, args) -> None:
    from .continuation import multiplier_curve, reduced_expansion_report, trace_curve

    eq, fam = _family(cfg)
    if not fam.complete:
        out.csv("family.csv", FAMILY_HEADER[:6] + ["labels"], _family_rows(fam, cluster_tol=cfg.tolerances.cluster))
        raise _family_error(fam)
    lo, hi = cfg.tolerances.fit_window
    curve = multiplier_curve(cfg.domain, eq, cfg.r_grid, family=fam, cluster_tol=cfg.tolerances.cluster)
    mask = (curve.r >= lo - 1e-12) & (curve.r <= hi + 1e-12)
    rs = curve.r[mask]
    from .continuation import loglog_exponent, pinned_fit

    C, _ = pinned_fit(rs, curve.lam_plus[mask] - 1.0, 2.0) if mask.sum() >= 2 else (complex("nan"), None)
    p = loglog_exponent(rs, curve.lam_plus[mask] - 1.0) if mask.sum() >= 2 else float("nan")
    out.csv("sweep.csv", FAMILY_HEADER, _family_rows(fam, curve, cfg.tolerances.cluster))
    results = {
        "predicted_coefficient": cplx(curve.predicted),
        "fitted_coefficient": cplx(C),
        "fitted_exponent": p,
        "smallest_r_ratio": cplx(curve.smallest_r_ratio),
        "ambiguous": curve.ambiguous.tolist(),
        "full_monodromy_mismatch": float(curve.full_mismatch.max()),
        "pairing_defect": float(curve.pairing_defect.max()),
        "fit_window": [lo, hi],
    }
    if eq.n == 2:
        tc = trace_curve(cfg.domain, eq, cfg.r_grid, family=fam)
        results["trace"] = {"predicted_c2": tc.predicted, "fitted_c2": tc.fitted, "exponent": tc.exponent}
    exp = reduced_expansion_report(cfg.domain, fam)
    out.csv("expansion.csv", ["r", "dev_e1", "dev_e2", "rel_e1", "rel_e2"],
            [[r, *d, *q] for r, d, q in zip(exp.r, exp.deviations, exp.relative)])
    results["expansion_order"] = exp.order.tolist()
    out.results.update(results)
    if args.plot:
        out.text("plot_sweep.py", PLOT_SWEEP)
    print(f"predicted C = {curve.predicted:.6g}, fitted C = {C:.6g}, exponent p = {p:.4f}")
    print(f"(lambda+ - 1)/r^2 at smallest r: {curve.smallest_r_ratio:.6g}")
    if "trace" in results:
        t = results["trace"]
        print(f"trace: c^2 predicted {t['predicted_c2']:.6g}, fitted {t['fitted_c2']:.6g}, exponent {t['exponent']:.4f}")


def cmd_robin(cfg: RunConfig, out: Output, args) -> None:
    from .robin import find_critical_points

    pts, fails = find_critical_points(cfg.domain, return_failures=True)
    rows = []
    for c in pts:
        k = c.prediction_coefficient(args.gamma_total)
        rows.append([c.a0[0], c.a0[1], c.h, c.hessian[0, 0], c.hessian[0, 1], c.hessian[1, 1], c.classification,
                     k.real, k.imag])
    out.csv("critical_points.csv", ["x", "y", "h", "hxx", "hxy", "hyy", "class", "coeff_re", "coeff_im"], rows)
    out.results.update({"count": len(pts), "unconverged_seeds": len(fails)})
    for r in rows:
        print(f"({fmt(r[0])}, {fmt(r[1])}) {r[6]}")


def cmd_bifurcation(cfg: RunConfig, out: Output, args) -> None:
    from .bifurcation import counterexample_suite, fit_expansion, predict_and_match, read_family_csv

    if args.action == "selftest":
        rep = counterexample_suite()
        out.csv("bifurcation_selftest.csv", ["check", "passed", "detail"],
                [[i.name, int(i.passed), i.detail] for i in rep.items])
        out.results["passed"] = rep.passed
        for i in rep.items:
            print(f"{'PASS' if i.passed else 'FAIL'}  {i.name}")
        if not rep.passed:
            raise VortexError("bifurcation self-test failed")
        return
    if not args.matrices:
        raise ConfigError("bifurcation fit needs --matrices")
    fam = read_family_csv(args.matrices)
    with open(args.matrices) as fh:
        rs = sorted({float(row[0]) for row in list(csv.reader(fh))[1:] if row} - {0.0})
    fit = fit_expansion(fam, args.lam0, args.exponent, rs)
    out.csv("fit.csv", ["r", "remainder_ratio"], [[r, q] for r, q in zip(fit.r, fit.remainder_ratios)])
    out.results.update({"accepted": fit.accepted, "reasons": list(fit.reasons),
                        "B0": {"re": np.real(fit.B0).tolist(), "im": np.imag(fit.B0).tolist()},
                        "mu": [cplx(m) for m in fit.mu]})
    if fit.accepted:
        rows = []
        for b in predict_and_match(fit, fam):
            rows += [[b.mu0.real, b.mu0.imag, r, m.real, m.imag, d, int(a)]
                     for r, m, d, a in zip(b.r, b.matched, b.deviation, b.ambiguous)]
        out.csv("branches.csv", ["mu_re", "mu_im", "r", "lam_re", "lam_im", "deviation", "ambiguous"], rows)
    print(f"accepted={fit.accepted} {'; '.join(fit.reasons)}")
    print("B0 eigenvalues:", ", ".join(f"{m:.6g}" for m in fit.mu))


def cmd_selftest(cfg: RunConfig, out: Output, args) -> None:
    from .checks import run_all

    checks = run_all()
    out.csv("selftest.csv", ["check", "value", "threshold", "passed"],
            [[c.name, c.value, c.threshold, int(c.passed)] for c in checks])
    failed = [c for c in checks if not c.passed]
    out.results.update({"total": len(checks), "failed": [c.name for c in failed]})
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value:.3e} < {c.threshold:.1e}")
    if failed:
        raise VortexError(f"{len(failed)} self-test checks failed")


COMMANDS = {
    "equilibria": cmd_equilibria,
    "simulate": cmd_simulate,
    "floquet": cmd_floquet,
    "continue": cmd_continue,
    "sweep": cmd_sweep,
    "robin": cmd_robin,
    "bifurcation": cmd_bifurcation,
    "selftest": cmd_selftest,
}


PLOT_SWEEP = '''"""Plot multiplier and trace curves from sweep.csv (run next to the CSV)."""
import csv

import matplotlib.pyplot as plt

with open("sweep.csv") as fh:
    rows = list(csv.DictReader(fh))
r = [float(x["r"]) for x in rows]
lp = [complex(float(x["lam_plus_re"]), float(x["lam_plus_im"])) for x in rows]
tr = [float(x["trace"]) for x in rows]
fig, ax = plt.subplots(1, 2, figsize=(10, 4))
ax[0].plot(r, [((z - 1) / q**2).real for z, q in zip(lp, r)], "o-", label="Re")
ax[0].plot(r, [((z - 1) / q**2).imag for z, q in zip(lp, r)], "s-", label="Im")
ax[0].set_xlabel("r")
ax[0].set_ylabel("(lambda+ - 1) / r^2")
ax[0].legend()
ax[1].loglog(r, [abs(4 - t) for t in tr], "o-")
ax[1].set_xlabel("r")
ax[1].set_ylabel("|4 - tr X_r(2 pi)|")
fig.tight_layout()
fig.savefig("sweep.png", dpi=150)
'''

PLOT_TRAJECTORY = '''"""Plot vortex paths from trajectory.csv (run next to the CSV)."""
import csv

import matplotlib.pyplot as plt

with open("trajectory.csv") as fh:
    reader = csv.reader(fh)
    header = next(reader)
    rows = [[float(v) for v in row] for row in reader]
n = (len(header) - 2) // 2
fig, ax = plt.subplots(figsize=(5, 5))
for j in range(n):
    ax.plot([row[1 + 2 * j] for row in rows], [row[2 + 2 * j] for row in rows], label=f"vortex {j + 1}")
ax.set_aspect("equal")
ax.legend()
fig.savefig("trajectory.png", dpi=150)
'''


def _write_error(directory: Path, exc: BaseException, code: int) -> None:
    doc = {"error_class": getattr(exc, "error_class", "internal_error"), "message": str(exc), "exit_code": code,
           "partial": bool(getattr(exc, "partial", False))}
    try:
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "error.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    except OSError:
        pass
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INVALID
    outdir = Path(getattr(args, "out", None) or os.environ.get(OUTDIR_ENV) or DEFAULT_OUTDIR)
    try:
        cfg = config_from_args(args)
        outdir = Path(cfg.output_dir)
        out = Output(outdir, cfg, argv)
        with np.errstate(all="ignore"):
            COMMANDS[args.command](cfg, out, args)
        out.manifest()
    except VortexError as exc:
        code = EXIT_INVALID if exc.invalid_input else EXIT_NUMERICAL
        if "out" in locals():
            out.results["error"] = {"error_class": exc.error_class, "message": str(exc)}
            out.manifest()
        _write_error(outdir, exc, code)
        return code
    except (OSError, ValueError) as exc:
        _write_error(outdir, exc, EXIT_INVALID)
        return EXIT_INVALID
    except Exception as exc:  # numerical library failures surface as exit 3
        _write_error(outdir, exc, EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
