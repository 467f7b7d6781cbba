"""Command-line front end.

Every operation is a subcommand. Parameters come from flags, an optional
JSON config file (``--config``) and built-in defaults, in that order of
precedence. Each run writes its CSV/JSON artifacts into the output
directory (``--out``, else ``$PUCCI_RADIAL_OUTPUT_DIR``, else ``.``) and
prints a one-line JSON summary on stdout.

Exit codes: 0 success, 1 invalid configuration, 2 numerical failure,
3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import subprocess
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, NumericalFailure
from .integrator import DEFAULT_R_MAX, DEFAULT_TOL, StopRule, integrate_from_center
from .model import Branch, OperatorSpec

OUTPUT_ENV = "PUCCI_RADIAL_OUTPUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_INVARIANT = 3

log = logging.getLogger("pucci_radial")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = ""
    target: str | None = None
    lam: float = 1.0
    Lam: float = 1.0
    N: int = 3
    branch: str = "minus"
    p: float | None = None
    k: int = 2
    alpha: float | None = None
    u0: float = 1.0
    region: int = 0
    epsilon_list: list[float] = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.02, 0.01])
    p_crit: float | None = None
    tol: float = DEFAULT_TOL
    quad_tol: float = 1e-10
    slope_tol: float = 1e-9
    p_tol: float = 1e-3
    r_max: float = DEFAULT_R_MAX
    out: str | None = None
    prefix: str | None = None
    jobs: int = 0
    suite: str | None = None

    def spec(self, branch: str | None = None) -> OperatorSpec:
        return OperatorSpec(self.lam, self.Lam, self.N, Branch(branch or self.branch))

    def validate(self) -> None:
        try:
            self.spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for name in ("tol", "quad_tol", "slope_tol", "p_tol", "r_max"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        eps = self.epsilon_list
        if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("epsilon_list must be positive and strictly decreasing")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.p is not None and not self.p > 1:
            raise ConfigError("p must exceed 1")
        if self.jobs < 0:
            raise ConfigError("jobs must be non-negative")

    @property
    def workers(self) -> int:
        return self.jobs or os.cpu_count() or 1

    def output_dir(self) -> Path:
        d = Path(self.out or os.environ.get(OUTPUT_ENV) or ".")
        d.mkdir(parents=True, exist_ok=True)
        return d

    def stem(self, default: str) -> str:
        return self.prefix or default


# file / flag keys that differ from the dataclass attribute names
_ALIASES = {"lambda": "lam", "Lambda": "Lam", "epsilons": "epsilon_list", "r_max": "r_max", "output_dir": "out"}


def _parse_eps(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad epsilon list {text!r}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser, *, jobs: bool = False) -> None:
    g = p.add_argument_group("operator")
    g.add_argument("--lambda", dest="lam", type=float, default=None)
    g.add_argument("--Lambda", dest="Lam", type=float, default=None)
    g.add_argument("--N", type=int, default=None)
    g.add_argument("--branch", choices=[b.value for b in Branch], default=None)
    g = p.add_argument_group("run")
    g.add_argument("--config", help="JSON file with any of the flag values")
    g.add_argument("--tol", type=float, default=None)
    g.add_argument("--r-max", dest="r_max", type=float, default=None)
    g.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ENV} or .)")
    g.add_argument("--prefix", default=None, help="file name stem for outputs")
    if jobs:
        g.add_argument("--jobs", type=int, default=None, help="worker processes (default: all processors)")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="pucci-radial", description=__doc__.split("\n")[0])
    top.add_argument("-v", "--verbose", action="store_true")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve-positive", help="positive radial solution on the unit ball")
    _common(s)
    s.add_argument("--p", type=float)
    s.add_argument("--u0", type=float)

    s = sub.add_parser("shoot-exterior", help="exterior shoot from r = 1 with slope alpha")
    _common(s)
    s.add_argument("--p", type=float)
    s.add_argument("--alpha", type=float)

    s = sub.add_parser("critical-slope", help="threshold slope alpha* of the exterior problem")
    _common(s)
    s.add_argument("--p", type=float)
    s.add_argument("--slope-tol", dest="slope_tol", type=float)

    s = sub.add_parser("critical-exponent", help="bisection estimate of p*_-, p*_+ or p**_+")
    s.add_argument("target", choices=["minus", "plus", "nodal"])
    _common(s, jobs=True)
    s.add_argument("--p-tol", dest="p_tol", type=float)
    s.add_argument("--slope-tol", dest="slope_tol", type=float)

    s = sub.add_parser("build-nodal", help="k-region radial solution on the unit ball")
    _common(s)
    s.add_argument("--p", type=float)
    s.add_argument("--k", type=int)

    s = sub.add_parser("sweep", help="parameter sweeps toward a critical exponent")
    s.add_argument("target", choices=["concentration", "positive", "energy-limit"])
    _common(s, jobs=True)
    s.add_argument("--k", type=int)
    s.add_argument("--epsilons", dest="epsilon_list", type=_parse_eps)
    s.add_argument("--p-crit", dest="p_crit", type=float, help="critical exponent (computed when omitted)")
    s.add_argument("--quad-tol", dest="quad_tol", type=float)

    s = sub.add_parser("energy", help="weighted energies")
    s.add_argument("target", choices=["region", "total", "sigma-star", "sigma-star-star"])
    _common(s)
    s.add_argument("--p", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--region", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--quad-tol", dest="quad_tol", type=float)

    s = sub.add_parser("phase-portrait", help="Emden-Fowler trajectories as t,x,dx CSV")
    _common(s)
    s.add_argument("--p", type=float)
    s.add_argument("--u0", type=float)
    s.add_argument("--alpha", type=float, help="also trace the exterior shoot at this slope")

    s = sub.add_parser("repro", help="run the acceptance suite and write a pass/fail report")
    _common(s)
    s.add_argument("--suite", help="path to test_acceptance.py")
    return top


def load_config(argv=None) -> tuple[RunConfig, bool]:
    """Merge defaults, the JSON config file and explicit flags."""
    ns = build_parser().parse_args(argv)
    merged = asdict(RunConfig())
    if getattr(ns, "config", None):
        try:
            data = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        names = {f.name for f in fields(RunConfig)}
        for key, val in data.items():
            key = _ALIASES.get(key, key)
            if key not in names:
                raise ConfigError(f"unknown config key {key!r}")
            if key == "epsilon_list" and isinstance(val, str):
                val = _parse_eps(val)
            merged[key] = val
    for key, val in vars(ns).items():
        if key in merged and val is not None:
            merged[key] = val
    try:
        cfg = RunConfig(**merged)
        cfg.lam, cfg.Lam, cfg.N = float(cfg.lam), float(cfg.Lam), int(cfg.N)
        cfg.k = int(cfg.k)
        cfg.jobs = int(cfg.jobs)
        cfg.epsilon_list = [float(e) for e in cfg.epsilon_list]
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg, ns.verbose


# -- output helpers -------------------------------------------------------


def _jsonable(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (Branch,)):
        return o.value
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, default=_jsonable, indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path: Path, rows: list[dict], legend: str) -> Path:
    cols: list[str] = []
    for r in rows:
        cols += [c for c in r if c not in cols]
    with path.open("w", newline="") as fh:
        fh.write(f"# {legend}\n")
        w = csv.DictWriter(fh, fieldnames=cols, restval="")
        w.writeheader()
        for r in rows:
            w.writerow({c: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for c, v in r.items()})
    return path


def _write_profile(cfg: RunConfig, prof, stem: str, legend: str) -> list[str]:
    csv_path, meta_path = prof.write(cfg.output_dir() / f"{stem}.csv")
    text = csv_path.read_text()
    csv_path.write_text(f"# {legend}\n{text}")
    return [str(csv_path), str(meta_path)]


def _need(cfg: RunConfig, *names) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ConfigError(f"{cfg.command} needs {', '.join('--' + m.replace('_', '-') for m in missing)}")


def _spec_summary(cfg: RunConfig) -> dict:
    return {"lambda": cfg.lam, "Lambda": cfg.Lam, "N": cfg.N, "branch": cfg.branch}


# -- commands -------------------------------------------------------------

PROFILE_LEGEND = "r = radius, u = solution u(r), du = radial derivative u'(r)"


def cmd_solve_positive(cfg: RunConfig) -> dict:
    from .shooting import positive_ball_solution

    _need(cfg, "p")
    ball = positive_ball_solution(cfg.spec(), cfg.p, tol=cfg.tol, r_max=cfg.r_max, u0=cfg.u0)
    ball.profile.check_monotone_energy()
    stem = cfg.stem("positive")
    outs = _write_profile(cfg, ball.profile, stem, PROFILE_LEGEND + " on the unit ball")
    rep = {"sup_norm": ball.sup_norm, "boundary_slope": ball.boundary_slope, "rho": ball.rho}
    outs.append(str(write_json(cfg.output_dir() / f"{stem}_report.json", {**rep, "inflections": ball.profile.inflections})))
    return {**rep, "outputs": outs}


def cmd_shoot_exterior(cfg: RunConfig) -> dict:
    from .shooting import rho_alpha

    _need(cfg, "p", "alpha")
    out = rho_alpha(cfg.branch, cfg.spec(), cfg.p, cfg.alpha, r_max=cfg.r_max, tol=cfg.tol)
    out.profile.check_monotone_energy()
    stem = cfg.stem("exterior")
    outs = _write_profile(cfg, out.profile, stem, PROFILE_LEGEND + " for r >= 1, u(1) = 0, u'(1) = alpha")
    outs.append(str(write_json(cfg.output_dir() / f"{stem}_report.json", out.to_dict())))
    d = out.to_dict()
    return {"kind": d["kind"], "rho": d["rho"], "decay": d["decay"] and d["decay"]["label"], "outputs": outs}


def cmd_critical_slope(cfg: RunConfig) -> dict:
    from .shooting import critical_slope, verify_critical_slope

    _need(cfg, "p")
    spec = cfg.spec()
    cs = critical_slope(cfg.branch, spec, cfg.p, slope_tol=cfg.slope_tol, tol=cfg.tol, r_max=cfg.r_max)
    rep = {**cs.to_dict(), "verified": verify_critical_slope(cs, spec, tol=cfg.tol)}
    path = write_json(cfg.output_dir() / f"{cfg.stem('critical_slope')}.json", rep)
    return {"alpha_star": cs.alpha_star, "bracket": list(cs.bracket), "verified": rep["verified"], "outputs": [str(path)]}


def cmd_critical_exponent(cfg: RunConfig) -> dict:
    from .exponents import critical_exponent_ball, critical_exponent_nodal, verify_certificates

    if cfg.target == "nodal":
        est = critical_exponent_nodal(cfg.spec(), p_tol=cfg.p_tol, tol=cfg.tol, slope_tol=cfg.slope_tol,
                                      r_max=cfg.r_max, jobs=cfg.workers)
    else:
        est = critical_exponent_ball(cfg.spec(cfg.target), p_tol=cfg.p_tol, tol=cfg.tol, r_max=cfg.r_max)
    ok = verify_certificates(est)
    if not ok:
        raise InvariantViolation("bracket certificates did not reproduce")
    rep = {**est.to_dict(), "certificates_verified": ok}
    path = write_json(cfg.output_dir() / f"{cfg.stem('critical_exponent_' + cfg.target)}.json", rep)
    return {"which": est.which.value, "value": est.value, "bracket": list(est.bracket),
            "certificates_verified": ok, "outputs": [str(path)]}


def cmd_build_nodal(cfg: RunConfig) -> dict:
    from .nodal import build_nodal

    _need(cfg, "p")
    sol = build_nodal(cfg.spec(), cfg.p, cfg.k, tol=cfg.tol, r_max=cfg.r_max)
    sol.raw.check_monotone_energy()
    stem = cfg.stem(f"nodal_k{cfg.k}")
    outs = _write_profile(cfg, sol.profile, stem, PROFILE_LEGEND + f" of the {cfg.k}-region solution on the unit ball")
    rep = {"decomposition": sol.decomposition.to_dict(), "boundary_slope": sol.boundary_slope, "rho": sol.rho}
    outs.append(str(write_json(cfg.output_dir() / f"{stem}_report.json", rep)))
    return {"M": list(sol.decomposition.M), "nodal_radii": list(sol.decomposition.nodal_radii), "outputs": outs}


def _default_p_crit(cfg: RunConfig, spec: OperatorSpec) -> float:
    from .exponents import critical_exponent_ball, critical_exponent_nodal

    if cfg.target != "positive" and spec.branch is Branch.PLUS:
        return critical_exponent_nodal(spec, p_tol=1e-8, tol=cfg.tol, jobs=cfg.workers).value
    return critical_exponent_ball(spec, p_tol=1e-9, tol=cfg.tol).value


def _concentration_legend(k: int) -> str:
    parts = ["epsilon = p_crit - p", "M{i} = sup of |u_eps| on region i (M0 = ||u_eps||_inf)"]
    if k > 1:
        parts += ["r{i} = i-th nodal radius", "s{i} = extremum radius in region i",
                  "r1_hat = r1 M0^((p-1)/2)", "s1_hat = s1 M1^((p-1)/2)", "M{i}/M{i+1} = ratio of consecutive extrema"]
    parts.append("boundary_slope = u_eps'(1)")
    return ", ".join(parts)


def cmd_sweep(cfg: RunConfig) -> dict:
    from . import energy, nodal

    spec = cfg.spec()
    out = cfg.output_dir()
    if cfg.target == "energy-limit":
        ex = energy.energy_limit_experiment(spec, cfg.k, cfg.epsilon_list, p_crit=cfg.p_crit, tol=cfg.tol,
                                            quad_tol=cfg.quad_tol, jobs=cfg.workers)
        rows = [r.row() for r in ex.rows]
        legend = ("epsilon = p_crit - p, E_total = E^T(u_eps) summed weighted region energies, "
                  "E_predicted_limit = predicted limit energy, gap = |E_total - E_predicted_limit|, "
                  "gap_relative = gap / E_predicted_limit")
        stem = cfg.stem(f"energy_limit_{cfg.branch}_k{cfg.k}")
        p1 = write_csv(out / f"{stem}.csv", rows, legend)
        p2 = write_json(out / f"{stem}.json", ex.to_dict())
        return {"p_crit": ex.p_crit, "predicted": ex.predicted, "gap_relative": [r["gap_relative"] for r in rows],
                "outputs": [str(p1), str(p2)]}
    p_crit = cfg.p_crit if cfg.p_crit is not None else _default_p_crit(cfg, spec)
    if cfg.target == "concentration":
        recs = nodal.concentration_sweep(spec, cfg.k, cfg.epsilon_list, p_crit, tol=cfg.tol, r_max=cfg.r_max,
                                         jobs=cfg.workers)
        rows = [r.row(cfg.k) for r in recs]
        legend = _concentration_legend(cfg.k)
        stem = cfg.stem(f"concentration_{cfg.branch}_k{cfg.k}")
    else:
        recs = nodal.positive_solution_sweep(spec, cfg.epsilon_list, p_crit, tol=cfg.tol, r_max=cfg.r_max,
                                             jobs=cfg.workers)
        rows = [r.row() for r in recs]
        legend = ("epsilon = p_crit - p, sup_norm = ||v_eps||_inf, r0 = inflection radius of v_eps, "
                  "r0_scaled_sup = r0^(2/(p-1)) ||v||_inf, v_r0_over_sup = v(r0)/||v||_inf, "
                  "r0_scaled_v_r0 = r0^(2/(p-1)) v(r0), "
                  "normalized_slope = ||v||_inf^((p(N~-2)-N~)/2) v'(1), boundary_slope = v'(1)")
        stem = cfg.stem(f"positive_{cfg.branch}")
    p1 = write_csv(out / f"{stem}.csv", rows, legend)
    failed = [r["epsilon"] for r in rows if r.get("error")]
    return {"p_crit": p_crit, "entries": len(rows), "failed": failed, "outputs": [str(p1)]}


def cmd_energy(cfg: RunConfig) -> dict:
    from . import energy
    from .nodal import build_nodal

    spec = cfg.spec()
    out = cfg.output_dir()
    if cfg.target in ("region", "total"):
        _need(cfg, "p")
        sol = build_nodal(spec, cfg.p, cfg.k, tol=cfg.tol, r_max=cfg.r_max)
        if cfg.target == "total":
            rep = energy.total_energy(sol.raw, cfg.k, cfg.quad_tol)
            path = write_json(out / f"{cfg.stem(f'energy_total_k{cfg.k}')}.json", rep.to_dict())
            return {"total": rep.total, "per_region": [r.value for r in rep.per_region], "outputs": [str(path)]}
        if not 0 <= cfg.region < cfg.k:
            raise ConfigError(f"region must lie in [0, {cfg.k - 1}]")
        edges = energy.region_edges(sol.raw, cfg.k)
        rep = energy.region_energy(sol.raw, edges[cfg.region], edges[cfg.region + 1], quad_tol=cfg.quad_tol,
                                   region_index=cfg.region)
        path = write_json(out / f"{cfg.stem(f'energy_region{cfg.region}_k{cfg.k}')}.json", rep.to_dict())
        return {"value": rep.value, "error": rep.error, "inflection_radius": rep.inflection_radius,
                "outputs": [str(path)]}
    if cfg.target == "sigma-star":
        p = cfg.p
        if p is None:
            from .exponents import critical_exponent_ball

            p = critical_exponent_ball(spec, p_tol=1e-9, tol=cfg.tol).bracket[1]
        est = energy.entire_space_energy(spec, p, tol=cfg.tol, quad_tol=cfg.quad_tol)
        stem = cfg.stem(f"sigma_star_{cfg.branch}")
    else:
        p = cfg.p
        if p is None:
            from .exponents import critical_exponent_nodal

            p = critical_exponent_nodal(spec, p_tol=1e-8, tol=cfg.tol).value
        est = energy.exterior_energy(spec, p, alpha=cfg.alpha, tol=cfg.tol, quad_tol=cfg.quad_tol)
        stem = cfg.stem("sigma_star_star")
    path = write_json(out / f"{stem}.json", est.to_dict())
    return {"value": est.value, "tail_bound": est.tail_bound, "p": est.p, "outputs": [str(path)]}


def cmd_phase_portrait(cfg: RunConfig) -> dict:
    from .shooting import emden_fowler_trajectory, rho_alpha

    _need(cfg, "p")
    spec = cfg.spec()
    prof = integrate_from_center(spec, cfg.p, cfg.u0, r_max=cfg.r_max, tol=cfg.tol, stop=StopRule(1))
    legend = "t = log r, x = r^(2/(p-1)) u(r), dx = dx/dt (Emden-Fowler variables)"
    out = cfg.output_dir()
    stem = cfg.stem("phase")
    tr = emden_fowler_trajectory(prof)
    rows = [{"t": a, "x": b, "dx": c} for a, b, c in tr.as_rows()]
    outs = [str(write_csv(out / f"{stem}_center.csv", rows, legend + ", center shoot"))]
    if cfg.alpha is not None:
        ext = rho_alpha(cfg.branch, spec, cfg.p, cfg.alpha, r_max=cfg.r_max, tol=cfg.tol).profile
        tr2 = emden_fowler_trajectory(ext)
        rows2 = [{"t": a, "x": b, "dx": c} for a, b, c in tr2.as_rows()]
        outs.append(str(write_csv(out / f"{stem}_exterior.csv", rows2, legend + ", exterior shoot")))
    return {"points": len(rows), "center_truncated": prof.truncated, "outputs": outs}


def _find_suite(cfg: RunConfig) -> Path:
    cands = [Path(cfg.suite)] if cfg.suite else []
    cands += [Path.cwd() / "tests" / "test_acceptance.py", Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"]
    for c in cands:
        if c.is_file():
            return c
    raise ConfigError("acceptance suite not found; pass --suite PATH")


def cmd_repro(cfg: RunConfig) -> dict:
    suite = _find_suite(cfg)
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(suite)],
                          capture_output=True, text=True, cwd=suite.parent.parent)
    lines = [ln.strip() for ln in proc.stdout.splitlines() if ln.strip().startswith(("[PASS]", "[FAIL]"))]
    report = {"suite": str(suite), "pytest_exit": proc.returncode, "criteria": lines,
              "passed": sum(ln.startswith("[PASS]") for ln in lines),
              "failed": sum(ln.startswith("[FAIL]") for ln in lines)}
    path = write_json(cfg.output_dir() / f"{cfg.stem('repro_report')}.json", report)
    (cfg.output_dir() / f"{cfg.stem('repro_report')}.txt").write_text("\n".join(lines) + "\n")
    return {"passed": report["passed"], "failed": report["failed"], "outputs": [str(path)]}


COMMANDS = {
    "solve-positive": cmd_solve_positive,
    "shoot-exterior": cmd_shoot_exterior,
    "critical-slope": cmd_critical_slope,
    "critical-exponent": cmd_critical_exponent,
    "build-nodal": cmd_build_nodal,
    "sweep": cmd_sweep,
    "energy": cmd_energy,
    "phase-portrait": cmd_phase_portrait,
    "repro": cmd_repro,
}


def _emit(obj: dict) -> None:
    print(json.dumps(obj, default=_jsonable, sort_keys=True))


def run(cfg: RunConfig) -> int:
    """Dispatch a validated config; returns the exit status."""
    head = {"command": cfg.command, "target": cfg.target, "spec": _spec_summary(cfg)}
    try:
        res = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        _emit({**head, "status": "invalid_config", "error": str(exc)})
        return EXIT_CONFIG
    except NumericalFailure as exc:
        _emit({**head, "status": "numerical_failure", "error": type(exc).__name__, "message": str(exc)})
        return EXIT_NUMERICAL
    except InvariantViolation as exc:
        _emit({**head, "status": "invariant_violation", "error": type(exc).__name__, "message": str(exc)})
        return EXIT_INVARIANT
    except ValueError as exc:
        _emit({**head, "status": "invalid_config", "error": str(exc)})
        return EXIT_CONFIG
    _emit({**head, "status": "ok", **res})
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg, verbose = load_config(argv)
    except ConfigError as exc:
        _emit({"status": "invalid_config", "error": str(exc)})
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, stream=sys.stderr)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
