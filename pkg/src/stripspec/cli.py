"""Declarative scenario runner.

Scenarios are declared in a TOML file, one ``[[scenario]]`` table per
check, each naming a theorem tag, a profile family, an epsilon list,
grid overrides, and solver tolerances.  ``stripspec all`` runs the
shipped acceptance suite; the other subcommands run the matching slice
of the configuration.  Every scenario writes ``{id}.json``, ``{id}.csv``
and (unless --no-svg) ``{id}.svg`` into the output directory, and the
exit code is 0 exactly when every verdict passes.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from . import analysis, frame, profiles, reporting, transverse
from .analysis import GridPolicy, SweepReport
from .profiles import ProfileError, StripProfile

__all__ = ["ConfigError", "ScenarioConfig", "parse_config", "run", "main"]

THEOREMS = ("T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "LA1", "TA2")
SUBCOMMAND_THEOREMS = {
    "spectrum": ("T1", "T2"),
    "sweep": ("T5", "T6", "T8"),
    "hardy": ("T3", "T4"),
    "resolvent": ("T7",),
    "all": THEOREMS,
}

_SCENARIO_KEYS = {"id", "theorem", "epsilons", "profile", "grid", "params",
                  "solver"}
_GRID_KEYS = {"half_length", "n_s", "n_t"}
_PARAM_KEYS = {"j_max", "kappa_shift", "route", "trial_cutoffs", "levels",
               "instances", "seed", "resolution", "mu_list", "lemma1_samples"}
_SOLVER_KEYS = {"tol", "norm_tol"}
_TWIST_FAMILIES = {"gaussian_twist", "rational_twist", "zero"}


class ConfigError(ValueError):
    """Malformed scenario configuration."""


@dataclass
class ScenarioConfig:
    id: str
    theorem: str
    epsilons: list
    profile_spec: dict
    grid: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)

    def build_profile(self) -> StripProfile:
        spec = dict(self.profile_spec)
        twist = spec.pop("twist", None)
        family = spec.pop("family")
        bend = profiles.build_family(family, **spec)
        if twist is not None:
            tspec = dict(twist)
            tfam = tspec.pop("family")
            bend = profiles.combine(bend, profiles.build_family(tfam, **tspec))
        return bend

    def grid_policy(self) -> GridPolicy:
        half_length = float(self.grid.get("half_length", 10.0))
        n_s = self.grid.get("n_s", 400)
        n_t = self.grid.get("n_t")
        if n_t is None and self.theorem not in ("T5", "T6", "T7", "T8"):
            n_t = 20
        return GridPolicy(half_length=half_length, n_s=int(n_s),
                          n_t=None if n_t is None else int(n_t))


def _reject_unknown(table: dict, allowed: set, where: str):
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")


def parse_config(path) -> list:
    """Strict parse of the scenario configuration file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML syntax error: {exc}") from exc

    _reject_unknown(doc, {"scenario", "schema_version"}, str(path))
    raw = doc.get("scenario", [])
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}: no [[scenario]] tables found")

    configs = []
    seen = set()
    for i, table in enumerate(raw):
        where = f"{path}: scenario #{i + 1}"
        _reject_unknown(table, _SCENARIO_KEYS, where)
        for key in ("id", "theorem"):
            if key not in table:
                raise ConfigError(f"{where}: missing required key '{key}'")
        sid = str(table["id"])
        if sid in seen:
            raise ConfigError(f"{where}: duplicate scenario id {sid!r}")
        seen.add(sid)
        theorem = str(table["theorem"])
        if theorem not in THEOREMS:
            raise ConfigError(f"{where}: unknown theorem tag {theorem!r}")

        eps = table.get("epsilons", [0.1])
        if not isinstance(eps, list) or not eps:
            raise ConfigError(f"{where}: 'epsilons' must be a nonempty list")
        for e in eps:
            if not isinstance(e, (int, float)) or e <= 0:
                raise ConfigError(f"{where}: field 'epsilons' contains "
                                  f"non-positive value {e!r}")

        pspec = dict(table.get("profile", {"family": "zero"}))
        if "family" not in pspec:
            raise ConfigError(f"{where}: [scenario.profile] needs 'family'")
        twist = pspec.get("twist")
        if twist is not None and "family" not in twist:
            raise ConfigError(f"{where}: [scenario.profile.twist] needs 'family'")
        if twist is not None and twist["family"] not in _TWIST_FAMILIES:
            raise ConfigError(f"{where}: twist family must be one of "
                              f"{sorted(_TWIST_FAMILIES)}")

        grid = dict(table.get("grid", {}))
        _reject_unknown(grid, _GRID_KEYS, f"{where}: [scenario.grid]")
        if "half_length" in grid and grid["half_length"] <= 0:
            raise ConfigError(f"{where}: field 'half_length' must be positive")

        params = dict(table.get("params", {}))
        _reject_unknown(params, _PARAM_KEYS, f"{where}: [scenario.params]")
        solver = dict(table.get("solver", {}))
        _reject_unknown(solver, _SOLVER_KEYS, f"{where}: [scenario.solver]")

        configs.append(ScenarioConfig(sid, theorem, [float(e) for e in eps],
                                      pspec, grid, params, solver))
    return configs


def default_config_path() -> Path:
    return Path(resources.files("stripspec").joinpath("data/acceptance.toml"))


# ----------------------------------------------------------------------
# scenario execution
# ----------------------------------------------------------------------

def run_scenario(cfg: ScenarioConfig, tol: Optional[float] = None) -> SweepReport:
    """Dispatch one scenario to its theorem driver."""
    solver_tol = float(cfg.solver.get("tol", tol if tol is not None else 1e-7))
    norm_tol = float(cfg.solver.get("norm_tol", 1e-4))
    policy = cfg.grid_policy()
    p = cfg.params
    eps = cfg.epsilons

    if cfg.theorem == "T1":
        return analysis.flat_convergence_report(
            epsilon=eps[0], half_length=policy.half_length,
            levels=int(p.get("levels", 3)),
            base_n_s=int(cfg.grid.get("n_s", 200)),
            base_n_t=int(cfg.grid.get("n_t", 10)),
            tol=min(solver_tol, 1e-8), scenario=cfg.id)

    profile = cfg.build_profile()
    if cfg.theorem == "T2":
        cutoffs = p.get("trial_cutoffs", [5, 10, 25, 50, 100])
        return analysis.spectrum_report(profile, eps[0], policy,
                                        trial_cutoffs=cutoffs,
                                        scenario=cfg.id, tol=solver_tol)
    if cfg.theorem in ("T3", "T4"):
        return analysis.hardy_report(
            profile, eps[0], policy,
            lemma1_samples=int(p.get("lemma1_samples", 200)),
            lemma1_resolution=int(p.get("resolution", 512)),
            scenario=cfg.id, theorem=cfg.theorem, tol=solver_tol)
    if cfg.theorem == "T5":
        return analysis.thin_strip_sweep(profile, eps,
                                         j_max=int(p.get("j_max", 1)),
                                         policy=policy, effective="bend",
                                         scenario=cfg.id, tol=solver_tol)
    if cfg.theorem == "T6":
        return analysis.thin_strip_sweep(profile, eps,
                                         j_max=int(p.get("j_max", 1)),
                                         policy=policy, effective="twist",
                                         scenario=cfg.id, tol=solver_tol)
    if cfg.theorem == "T7":
        return analysis.resolvent_sweep(profile, eps,
                                        kappa=float(p.get("kappa_shift", 1.0)),
                                        policy=policy,
                                        route=str(p.get("route", "bent")),
                                        scenario=cfg.id, norm_tol=norm_tol)
    if cfg.theorem == "T8":
        return analysis.scaled_strip_sweep(profile, eps,
                                           j_max=int(p.get("j_max", 1)),
                                           policy=policy, scenario=cfg.id,
                                           tol=solver_tol)
    if cfg.theorem == "LA1":
        return analysis.lemma_a1_report(
            n_instances=int(p.get("instances", 100)),
            seed=int(p.get("seed", 0)),
            resolution=int(p.get("resolution", 256)), scenario=cfg.id)
    if cfg.theorem == "TA2":
        return analysis.deep_well_report(
            mu_list=p.get("mu_list", [1e2, 1e3, 1e4]),
            half_length=policy.half_length,
            resolution=int(p.get("resolution", 4000)), scenario=cfg.id)
    raise ConfigError(f"unhandled theorem tag {cfg.theorem}")


def _failure_report(cfg: ScenarioConfig, exc: Exception) -> SweepReport:
    return SweepReport(cfg.id, cfg.theorem, [], None, False,
                       "scenario executed without errors",
                       {"error": f"{type(exc).__name__}: {exc}"})


def run(configs, out_dir, jobs: int = 1, no_svg: bool = False,
        tol: Optional[float] = None, echo=print) -> int:
    """Execute scenarios, write reports, return the aggregate exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def job(cfg):
        try:
            return run_scenario(cfg, tol=tol)
        except (ProfileError, analysis.AnalysisError, ConfigError,
                ValueError, RuntimeError) as exc:
            return _failure_report(cfg, exc)

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(job, configs))
    else:
        reports = [job(cfg) for cfg in configs]

    all_pass = True
    for cfg, report in zip(configs, reports):
        reporting.write_report_json(report, out / f"{cfg.id}.json")
        reporting.write_report_csv(report, out / f"{cfg.id}.csv")
        if not no_svg:
            reporting.plot_report(report, out / f"{cfg.id}.svg")
        status = "PASS" if report.verdict else "FAIL"
        all_pass = all_pass and report.verdict
        detail = report.extras.get("error", "")
        echo(f"{status}  {cfg.id} [{report.theorem}] {detail}")
    return 0 if all_pass else 1


# ----------------------------------------------------------------------
# extra surfaces: validate / transverse / embed
# ----------------------------------------------------------------------

def run_validate(configs, echo=print) -> int:
    code = 0
    for cfg in configs:
        if cfg.theorem in ("LA1", "TA2"):
            continue
        try:
            profile = cfg.build_profile()
        except ProfileError as exc:
            echo(f"FAIL  {cfg.id}: profile construction: {exc}")
            code = 1
            continue
        for eps in cfg.epsilons:
            try:
                report = profiles.validate(profile, eps,
                                           cfg.grid_policy().half_length)
            except ProfileError as exc:
                echo(f"FAIL  {cfg.id} eps={eps:g}: {exc}")
                code = 1
                continue
            ok = report.ok
            code = code if ok else 1
            echo(f"{'PASS' if ok else 'FAIL'}  {cfg.id} eps={eps:g} "
                 f"(flat={report.flat})")
            for line in report.summary_lines():
                echo(f"        {line}")
    return code


def run_transverse(configs, out_dir, echo=print) -> int:
    """Per-scenario CSV of s, alpha, nu0, lambda0, beta, gap."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for cfg in configs:
        if cfg.theorem in ("LA1", "TA2"):
            continue
        profile = cfg.build_profile()
        eps = cfg.epsilons[0]
        half = cfg.grid_policy().half_length
        rows = []
        for s in np.linspace(-half, half, 101):
            te = transverse.lambda0_transverse(profile, eps, float(s), 256)
            beta = transverse.beta_coefficient(profile, eps, float(s))
            rows.append((te.s, te.alpha,
                         "" if te.nu0 is None else format(te.nu0, ".12g"),
                         te.lambda0, beta, te.gap))
        path = out / f"{cfg.id}-transverse.csv"
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("s,alpha,nu0,lambda0,beta,gap\n")
            for row in rows:
                fh.write(",".join(
                    v if isinstance(v, str) else format(v, ".12g")
                    for v in row) + "\n")
        echo(f"wrote {path}")
    return 0


def run_embed(configs, out_dir, echo=print) -> int:
    """Integrate the frame, emit the embedded strip as an XYZ point cloud."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for cfg in configs:
        if cfg.theorem in ("LA1", "TA2"):
            continue
        profile = cfg.build_profile()
        eps = cfg.epsilons[0]
        half = min(cfg.grid_policy().half_length, 10.0)
        comp = profile.tau_components
        if comp is not None:
            theta_fn = comp.theta
            curvatures = [
                lambda s, f=theta_fn: float(profile.kappa_g(s) * np.cos(f(s))),
                lambda s, f=theta_fn: float(profile.kappa_g(s) * np.sin(f(s))),
            ]
        else:
            curvatures = [lambda s: float(profile.kappa_g(s))]
        path_frame = frame.integrate_frame(curvatures, (-half, half), 1e-2)
        t_nodes = np.linspace(0.0, 1.0, 17)
        points = frame.embed(profile, path_frame, eps, t_nodes)
        xyz = out / f"{cfg.id}.xyz"
        frame.write_xyz(points, xyz)
        # cross-check the closed-form metric at one interior point
        i, j = points.shape[0] // 2, points.shape[1] // 2
        g = frame.first_fundamental_form(points, i, j,
                                         path_frame.s[1] - path_frame.s[0],
                                         t_nodes[1] - t_nodes[0])
        f_sq = float(profiles.metric_f(profile, eps, path_frame.s[i],
                                       t_nodes[j]) ** 2)
        echo(f"wrote {xyz} (G11 vs f^2 deviation {abs(g[0, 0] - f_sq):.2e}, "
             f"frame drift {path_frame.drift:.2e})")
    return 0


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="stripspec",
        description="Spectral checks for mixed Dirichlet-Neumann Laplacians "
                    "on ruled strips")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("validate", "check profile hypotheses for each scenario"),
        ("spectrum", "threshold/certificate scenarios (T1, T2)"),
        ("sweep", "thin- and scaled-strip eigenvalue sweeps (T5, T6, T8)"),
        ("hardy", "Hardy-inequality scenarios (T3, T4)"),
        ("transverse", "emit the transverse CSV (s, alpha, nu0, lambda0, beta, gap)"),
        ("resolvent", "norm-resolvent decay scenarios (T7)"),
        ("embed", "integrate the frame and emit XYZ point clouds"),
        ("all", "run the full acceptance suite"),
    ]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", type=Path, default=None,
                        help="scenario file (default: shipped acceptance suite)")
        sp.add_argument("--out", type=Path, default=Path("stripspec-out"),
                        help="output directory")
        sp.add_argument("--jobs", type=int, default=1,
                        help="scenario-level worker count")
        sp.add_argument("--tol", type=float, default=None,
                        help="override solver tolerance")
        sp.add_argument("--no-svg", action="store_true",
                        help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config_path = args.config if args.config is not None else default_config_path()
    try:
        configs = parse_config(config_path)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        return run_validate(configs)
    if args.command == "transverse":
        return run_transverse(configs, args.out)
    if args.command == "embed":
        return run_embed(configs, args.out)
    wanted = SUBCOMMAND_THEOREMS[args.command]
    selected = [c for c in configs if c.theorem in wanted]
    if not selected:
        print(f"no scenarios with theorem in {wanted}", file=sys.stderr)
        return 2
    return run(selected, args.out, jobs=max(1, args.jobs),
               no_svg=args.no_svg, tol=args.tol)


if __name__ == "__main__":
    sys.exit(main())
