"""Batch runner: ``jacobi-workbench <command> --config run.yaml --out results/``.

Commands
--------
verify-lemmas      closed-form first/second t-derivatives against forward mode and differences
willmore-curve     W(t) on a t-grid, W'(0), W''(0) by differences and by modes
eigen              lambda_1 (and lambda_2 for surfaces in R^3) against -W(t)
conjecture-scan    W on random volume-normalized radial graphs

Exit status is 0 when every check passes, 1 when a check fails and 2 for
configuration or file errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, build_field, load_config, random_field
from .fields import EllipsoidRadius, Polynomial
from .sphere import make_grid
from .spectrum import RadialSurface, VariedSurface, refined_spectrum
from .spectrum.surfaces import is_zonal_function
from .variation import QUANTITIES, RadialVariation, lemma2_eval, lemma3_eval, phi_diagnostics
from .willmore import (
    ShapeFamily,
    area_normalizing_scale,
    conjecture_scan,
    translation_family_willmore,
    willmore_curve,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


class Output:
    """Writes files under one directory; writes are serialized by construction."""

    def __init__(self, directory: str):
        self.directory = directory
        try:
            os.makedirs(directory, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory: {exc.strerror}", directory) from exc

    def write(self, name: str, text: str) -> str:
        path = os.path.join(self.directory, name)
        tmp = path + ".tmp"
        try:
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except OSError as exc:
            raise ConfigError(f"cannot write output: {exc.strerror}", path) from exc
        return path


def provenance(command: str, cfg: ExperimentConfig) -> dict:
    return {"command": command, "version": __version__, "config": cfg.to_dict()}


def _grid_for(cfg: ExperimentConfig, func):
    zonal = cfg.n > 2
    if zonal and not is_zonal_function(func, cfg.n):
        raise ConfigError(f"n = {cfg.n} needs a zonal perturbation direction (f.type zonal)")
    return make_grid(cfg.n, cfg.resolution, zonal=zonal)


# ---------------------------------------------------------------------------
# verify-lemmas
# ---------------------------------------------------------------------------


def _random_polynomial(n: int, degree: int, rng: np.random.Generator) -> Polynomial:
    """Random polynomial in the ambient coordinates (not necessarily harmonic)."""
    p = Polynomial.constant(n + 1, float(rng.standard_normal()))
    x = [Polynomial.coordinate(n + 1, i) for i in range(n + 1)]
    monomials = [Polynomial.constant(n + 1, 1.0)]
    for _ in range(degree):
        monomials = [m * xi for m in monomials for xi in x]
        for m in monomials:
            p = p + m * float(0.5 * rng.standard_normal())
        monomials = monomials[: 4 * (n + 1)]
    return p


def _lemma_fields(cfg: ExperimentConfig, rng: np.random.Generator):
    configured = build_field(cfg.f, cfg.n, cfg.seed)
    zonal = cfg.n > 2 and is_zonal_function(configured, cfg.n)
    out = [("configured", configured, zonal)]
    for i in range(cfg.random_fields):
        if zonal:
            out.append((f"random-zonal-{i}", random_field(cfg.n, cfg.band, cfg.seed + 1 + i, True), True))
        else:
            out.append((f"random-poly-{i}", _random_polynomial(cfg.n, min(cfg.band, 3), rng), False))
    return out


def _sign_fault(item: str | None):
    if item is None:
        return None, None
    names = {f"{o}.{i}": (o, q) for o in (1, 2) for i, q in enumerate(QUANTITIES, start=1)}
    if item in names:
        return names[item]
    raise ConfigError(f"unknown lemma item {item!r}; expected one of {sorted(names)}")


def cmd_verify_lemmas(cfg: ExperimentConfig, out: Output, sign_fault: str | None = None) -> int:
    fault_order, fault_name = _sign_fault(sign_fault)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 2]))
    flds = _lemma_fields(cfg, rng)
    per_field = max(1, -(-cfg.points // len(flds)))
    worst: dict[str, dict] = {}
    phi_reports = []
    tol = cfg.tolerances["lemma_rel"]
    for label, func, zonal in flds:
        grid = make_grid(cfg.n, cfg.resolution, zonal=zonal)
        var = RadialVariation(func, grid, cfg.t_max)
        pts = rng.standard_normal((per_field, cfg.n + 1))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        for order, fn in ((1, lemma2_eval), (2, lemma3_eval)):
            fault = fault_name if fault_order == order else None
            res = fn(var, pts, with_fd=True, sign_fault=fault)
            for row in res.table():
                cur = worst.get(row["item"])
                if cur is None:
                    worst[row["item"]] = dict(row)
                else:
                    for key in ("max_abs_err", "max_rel_err", "fd_rel_err"):
                        cur[key] = max(cur[key], row[key])
        diag = phi_diagnostics(var)
        diag["field"] = label
        phi_reports.append(diag)
    rows = [worst[k] for k in sorted(worst, key=lambda s: tuple(map(int, s.split("."))))]
    failing = [r["item"] for r in rows if r["max_rel_err"] > tol or r["fd_rel_err"] > tol]
    out.write(
        "lemmas.csv",
        csv_text(
            ["item", "quantity", "max_abs_err", "max_rel_err", "fd_rel_err"],
            [[r["item"], r["quantity"], r["max_abs_err"], r["max_rel_err"], r["fd_rel_err"]] for r in rows],
        ),
    )
    report = provenance("verify-lemmas", cfg)
    report.update({"tolerance": tol, "failing_items": failing, "passed": not failing, "phi": phi_reports, "items": rows})
    out.write("lemmas.json", dumps_json(report))
    for r in rows:
        status = "FAIL" if r["item"] in failing else "ok"
        print(f"item {r['item']:>4} {r['quantity']:<7} rel {r['max_rel_err']:.2e}  fd {r['fd_rel_err']:.2e}  {status}")
    if failing:
        print(f"lemma items exceeding {tol:g}: {', '.join(failing)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# willmore-curve
# ---------------------------------------------------------------------------


def cmd_willmore_curve(cfg: ExperimentConfig, out: Output) -> int:
    func = build_field(cfg.f, cfg.n, cfg.seed)
    var = RadialVariation(func, _grid_for(cfg, func), cfg.t_max)
    t_grid = sorted(set(cfg.t_grid) | {0.0})
    bad = [t for t in t_grid if abs(t) > var.t_max]
    if bad:
        raise ConfigError(f"t values {bad} exceed t_max = {var.t_max:g} (set t_max or --tmax)")
    curve = willmore_curve(var, t_grid, cfg.k_max)
    out.write("willmore_curve.csv", curve.to_csv())
    tol = cfg.tolerances
    n = cfg.n
    checks = {
        "minimum_at_least_n": min(curve.values) >= n - tol["willmore_floor"],
        "first_variation_fd": abs(curve.first_variation_fd) <= tol["first_variation"],
        "first_variation_closed": abs(curve.first_variation_closed) <= 1e-10,
    }
    if curve.spectral_second_variation is not None:
        s, f = curve.spectral_second_variation, curve.second_variation_fd
        checks["spectral_matches_fd"] = abs(s - f) <= tol["spectral_rel"] * max(abs(s), abs(f), 1e-12) or (
            abs(s) < 1e-8 and abs(f) < 1e-6
        )
    summary = curve.summary()
    if curve.mode_table and all(m["beta"] == n for m in curve.mode_table):
        # pure degree-1 direction: compare with the exactly translated spheres
        checks["degree_one_constant"] = max(abs(v - n) for v in curve.values) <= tol["willmore_floor"]
        direction = np.asarray(func.grad(np.zeros(n + 1)), float)
        fine = make_grid(n, 2 * cfg.resolution, zonal=n > 2)
        summary["translation_family"] = [
            dict(zip(("t", "value", "sphere_residual"), (t, *translation_family_willmore(direction, t, fine))))
            for t in t_grid
        ]
    summary.update({"checks": checks, "passed": all(checks.values())})
    report = provenance("willmore-curve", cfg)
    report["result"] = summary
    out.write("willmore_curve.json", dumps_json(report))
    print(
        f"W min {summary['min_value']:.12f} at t={summary['argmin_t']:g}; "
        f"W'(0) fd {curve.first_variation_fd:.2e}; W''(0) fd {curve.second_variation_fd:.10g} "
        f"spectral {curve.spectral_second_variation}"
    )
    failed = [k for k, v in checks.items() if not v]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# eigen
# ---------------------------------------------------------------------------


def _extra_surface(spec: dict, n: int):
    kind = spec.get("type")
    if kind == "ellipsoid":
        axes = tuple(float(a) for a in spec["axes"])
        if len(axes) != n + 1:
            raise ConfigError(f"ellipsoid needs {n + 1} axes")
        rad = EllipsoidRadius(axes)
        scale = 1.0
        if spec.get("normalize", "area") == "area":
            scale = area_normalizing_scale(rad, make_grid(n, 128 if n == 2 else 256, zonal=n > 2))
        return RadialSurface(rad, n, scale, spec.get("label", f"ellipsoid{list(axes)}"))
    if kind == "sphere":
        return RadialSurface(Polynomial.constant(n + 1, 1.0), n, float(spec.get("radius", 1.0)), "sphere")
    raise ConfigError(f"unknown surface type {kind!r}")


def cmd_eigen(cfg: ExperimentConfig, out: Output) -> int:
    n = cfg.n
    func = build_field(cfg.f, n, cfg.seed)
    var = RadialVariation(func, _grid_for(cfg, func), cfg.t_max)
    t_grid = sorted(set(cfg.t_grid) | {0.0})
    if any(abs(t) > var.t_max for t in t_grid):
        raise ConfigError(f"t values exceed t_max = {var.t_max:g} (set t_max or --tmax)")
    solver, level = ("fem", cfg.depth) if n == 2 else ("zonal", cfg.zonal_resolution)
    k = 2 if n == 2 else 1
    cases = [("variation", t, VariedSurface(var, t)) for t in t_grid]
    cases += [(s.label, None, s) for s in (_extra_surface(spec, n) for spec in cfg.surfaces)]
    for t in t_grid:  # solve phi serially so the cache is filled deterministically
        var.solve(t)

    def run(case):
        label, t, surface = case
        spec = refined_spectrum(surface, solver, level, k, cfg.operator)
        w, w_err = surface.willmore()
        lam2 = float(spec.eigenvalues[1]) if k > 1 else None
        d2 = float(spec.deltas[1]) if k > 1 else None
        return [label, t, float(spec.eigenvalues[0]), -w, float(spec.eigenvalues[0]) + w, float(spec.deltas[0]), lam2, d2, w_err]

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(run, cases))
    else:
        rows = [run(c) for c in cases]
    header = ["label", "t", "lambda1", "minus_willmore", "slack", "refinement_delta", "lambda2", "lambda2_delta"]
    out.write("eigen.csv", csv_text(header, [r[:8] for r in rows]))
    tol = cfg.tolerances
    lam0 = next(r[2] for r in rows if r[0] == "variation" and r[1] == 0.0)
    checks = {
        "chain_lambda_le_minus_w": all(r[2] <= r[3] + tol["eigen"] for r in rows),
        "chain_minus_w_le_minus_n": all(r[3] <= -n + tol["eigen"] for r in rows),
        "maximal_at_t0": all(r[2] <= lam0 + tol["eigen"] for r in rows if r[0] == "variation"),
    }
    if is_zonal_function(func, n) or n == 2:
        checks["unperturbed_lambda1"] = abs(lam0 + n) <= tol["sphere_eigen"]
    if n == 2:
        row0 = next(r for r in rows if r[0] == "variation" and r[1] == 0.0)
        checks["unperturbed_lambda2_zero"] = abs(row0[6]) <= tol["zero_eigen"]
    report = provenance("eigen", cfg)
    report.update({"solver": solver, "level": level, "checks": checks, "passed": all(checks.values())})
    report["rows"] = [dict(zip(header + ["willmore_error"], r)) for r in rows]
    out.write("eigen.json", dumps_json(report))
    for r in rows:
        extra = "" if r[6] is None else f"  lambda2 {r[6]: .6f}"
        print(f"{r[0]:<24} t={'' if r[1] is None else f'{r[1]:+.3f}':<7} lambda1 {r[2]: .6f}  -W {r[3]: .6f}  slack {r[4]: .2e}{extra}")
    failed = [k for k, v in checks.items() if not v]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# conjecture-scan
# ---------------------------------------------------------------------------


def cmd_conjecture_scan(cfg: ExperimentConfig, out: Output) -> int:
    family = ShapeFamily(cfg.n, cfg.amplitude, cfg.band, cfg.n > 2)
    report = conjecture_scan(family, cfg.samples, cfg.seed, threads=cfg.threads, tol=cfg.tolerances["scan"])
    out.write("conjecture_scan.csv", report.to_csv())
    summary = provenance("conjecture-scan", cfg)
    summary["result"] = report.summary()
    summary["passed"] = not report.violations
    out.write("conjecture_scan.json", dumps_json(summary))
    print(
        f"{len(report.rows)} samples, min W {report.min_value:.12f} (sample {report.argmin}), "
        f"{len(report.violations)} violations, {report.rejected} rejected"
    )
    return EXIT_FAIL if report.violations else EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS = {
    "verify-lemmas": cmd_verify_lemmas,
    "willmore-curve": cmd_willmore_curve,
    "eigen": cmd_eigen,
    "conjecture-scan": cmd_conjecture_scan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jacobi-workbench", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML experiment file")
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--threads", type=int, help="worker threads for independent cases")
        p.add_argument("--seed", type=int)
        p.add_argument("--depth", type=int, help="icosphere subdivision depth")
        p.add_argument("--tmax", type=float, help="half-width of the admissible t interval")
        if name == "verify-lemmas":
            p.add_argument("--inject-sign-fault", metavar="ITEM", help="debug: negate one closed form, e.g. 2.7")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"threads": args.threads, "seed": args.seed, "depth": args.depth, "t_max": args.tmax}
    try:
        cfg = load_config(args.config, overrides)
        out = Output(args.out)
        out.write("config.yaml", cfg.to_yaml())
        if args.command == "verify-lemmas":
            return cmd_verify_lemmas(cfg, out, args.inject_sign_fault)
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
