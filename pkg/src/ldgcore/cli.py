"""Command-line driver: ldg {minimize, sweep, analyze, tangent, verify}.

Config files are flat ``key = value`` text; ``#`` starts a comment.  Keys:

    n, mu, branch (PLUS|MINUS|NONE), bound, sector, sigma, max_iters,
    grad_tol, flip_every, run_id, sweep_parameter (b|c|mu), sweep_values
    (comma separated), noise

Exit codes: 0 success, 1 run/check failure, 2 bad configuration or usage.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, asdict, fields as dc_fields
from pathlib import Path

import numpy as np

log = logging.getLogger("ldg")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int = 128
    mu: float = 10.0
    branch: str = "PLUS"
    bound: float = float("nan")
    sector: bool = True
    sigma: float = 0.2
    max_iters: int = 200_000
    grad_tol: float = 1e-3
    flip_every: int = 25
    noise: float = 0.0
    run_id: str = "run"
    sweep_parameter: str = ""
    sweep_values: list = field(default_factory=list)

    def obstacle(self):
        from .optimizer import Branch, ObstacleSpec
        br = Branch(self.branch)
        if br is Branch.NONE:
            return ObstacleSpec.none()
        b = self.bound
        if math.isnan(b):
            b = -0.5 if br is Branch.PLUS else 0.5
        return ObstacleSpec(br, b)

    def solver(self):
        from .optimizer import SolverConfig
        return SolverConfig(max_iters=self.max_iters, grad_tol=self.grad_tol,
                            sector_projection=self.sector, seed_amplitude=abs(self.sigma),
                            flip_every=self.flip_every)

    def validate(self, analysis: bool = True):
        if analysis and self.n < 32:
            raise ConfigError("n must be >= 32 for analysis runs")
        if self.n < 8:
            raise ConfigError("n must be >= 8")
        if self.mu < 0:
            raise ConfigError("mu must be non-negative")
        if not abs(self.sigma) < 1:
            raise ConfigError("|sigma| must be < 1")
        try:
            self.obstacle()
            self.solver()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def _coerce(name: str, raw: str):
    kinds = {f.name: f.type for f in dc_fields(RunConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    kind = kinds[name]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            return _BOOL[raw.lower()]
        if kind == "list":
            return [float(x) for x in raw.split(",") if x.strip()]
        if name == "branch":
            return raw.upper()
        return raw
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_config(text: str, overrides=()) -> RunConfig:
    cfg = RunConfig()
    lines = [(k + 1, ln) for k, ln in enumerate(text.splitlines())]
    lines += [(f"--set {k + 1}", ov) for k, ov in enumerate(overrides)]
    for lineno, line in lines:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = line.split("=", 1)
        key = key.strip()
        setattr(cfg, key, _coerce(key, val))
    if cfg.branch not in ("PLUS", "MINUS", "NONE"):
        raise ConfigError(f"unknown branch {cfg.branch!r}")
    return cfg


def load_config(path, overrides=()) -> RunConfig:
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text, overrides)


# ------------------------------------------------------------------ commands

def _start_field(cfg: RunConfig, mesh, seed: int):
    from .fields import Field3, normalize
    from .optimizer import Branch, initial_guess
    br = Branch(cfg.branch)
    u0 = initial_guess(mesh, Branch.PLUS if br is Branch.NONE else br, cfg.sigma, cfg.mu)
    if cfg.noise:
        rng = np.random.default_rng(seed)
        V = u0.values.copy()
        V[mesh.free] = normalize(V[mesh.free] + cfg.noise * rng.normal(size=(int(mesh.free.sum()), 3)))
        u0 = Field3(mesh, V)
    return u0


def _write_run(out: Path, u, rep, trace, mu, obs):
    from . import io
    from .analysis import analyze
    from .energy import euler_lagrange_residual, l2_distance_to_hedgehog, localized_profile
    io.save_checkpoint(out / "checkpoint.npz", u, mu, obs)
    io.write_json(out / "energy.json", {**rep.to_dict(), "distance_to_hedgehog": l2_distance_to_hedgehog(u),
                                        "energy_over_pi": rep.total / math.pi})
    defects = analyze(u)
    io.write_json(out / "defects.json", defects.to_dict())
    io.write_field_csv(out / "field.csv", u)
    h = u.mesh.h
    radii = np.linspace(8 * h, 1.0, 50)
    prof = localized_profile(u, mu, radii)
    res = euler_lagrange_residual(u, mu, r_min=0.1)
    io.write_json(out / "diagnostics.json", {
        "localized_energy": {"r": radii, "value": prof},
        "el_residual_max": res.max, "el_residual_l2": res.l2,
    })
    if trace is not None:
        with open(out / "trace.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "energy", "residual"])
            for k, (e, r) in enumerate(zip(trace.energies, trace.residuals)):
                w.writerow([k, repr(e), repr(r)])
    return defects


def cmd_minimize(args) -> int:
    from . import io
    from .mesh import build_mesh
    from .optimizer import SolverError, minimize
    cfg = load_config(args.config, args.set).validate()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mesh = build_mesh(cfg.n)
    obs = cfg.obstacle()
    try:
        u, rep, trace = minimize(_start_field(cfg, mesh, args.seed), cfg.mu, obs, cfg.solver())
    except SolverError as exc:
        io.write_json(out / "status.json", {"status": "fatal", "message": str(exc), "run_id": cfg.run_id})
        log.error("solver failed: %s", exc)
        return 1
    defects = _write_run(out, u, rep, trace, cfg.mu, obs)
    io.write_json(out / "status.json", {"status": trace.status, "message": trace.message,
                                        "iterations": trace.iterations, "run_id": cfg.run_id,
                                        "config": asdict(cfg)})
    print(f"{cfg.run_id}: E = {rep.total:.8f} ({rep.total / math.pi:.6f} pi), "
          f"status {trace.status} after {trace.iterations} iterations")
    print(f"axis singularities on l3+: {defects.parity}; ring radius: {defects.ring_radius}")
    return 0


def cmd_sweep(args) -> int:
    from . import io
    from .mesh import build_mesh
    from .optimizer import sweep
    cfg = load_config(args.config, args.set).validate()
    if not cfg.sweep_values:
        raise ConfigError("sweep_values is empty")
    if cfg.sweep_parameter not in ("b", "c", "mu"):
        raise ConfigError("sweep_parameter must be one of b, c, mu")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mesh = build_mesh(cfg.n)
    try:
        items = sweep(cfg.sweep_parameter, cfg.sweep_values, mesh, mu=cfg.mu, branch=cfg.branch,
                      bound=None if math.isnan(cfg.bound) else cfg.bound, cfg=cfg.solver(),
                      u0=_start_field(cfg, mesh, args.seed) if cfg.noise else None)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    failed = 0
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["# schema_version", io.SCHEMA_VERSION])
        w.writerow([cfg.sweep_parameter, "status", "dirichlet", "singular", "potential", "total",
                    "parity", "ring_radius", "dumbbell_violation_fraction", "distance_to_hedgehog"])
        for it in items:
            if it.error:
                failed += 1
                w.writerow([repr(it.value), "error: " + it.error] + [""] * 8)
                continue
            d = it.defects
            e = it.energy
            w.writerow([repr(it.value), it.trace.status, repr(e.dirichlet), repr(e.singular),
                        repr(e.potential), repr(e.total), d.parity, d.ring_radius,
                        d.dumbbell_violation_fraction, repr(it.distance)])
            print(f"{cfg.sweep_parameter}={it.value:g}: E = {e.total / math.pi:.6f} pi, "
                  f"parity {d.parity}, distance {it.distance:.5f}")
    return 1 if failed else 0


def cmd_analyze(args) -> int:
    from . import io
    from .energy import energy
    if not args.checkpoint:
        raise ConfigError("analyze needs --checkpoint")
    try:
        u, mu, obs = io.load_checkpoint(args.checkpoint)
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot load checkpoint: {exc}") from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    d = _write_run(out, u, energy(u, mu), None, mu, obs)
    print(d.to_json())
    return 0


def cmd_tangent(args) -> int:
    from . import io, tangent
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    profiles = [("lambda_plus", tangent.lambda_pm(1)), ("lambda_minus", tangent.lambda_pm(-1)),
                ("class_I", tangent.profile("I"))]
    for b in args.beta:
        for s in (1, -1):
            tag = "p" if s > 0 else "m"
            profiles.append((f"class_II_b{b:g}_{tag}", tangent.profile("II", b, s)))
            profiles.append((f"class_III_b{b:g}_{tag}", tangent.profile("III", b, s)))
    for name, p in profiles:
        tangent.to_csv(p, out / f"{name}.csv")
        e2, eb = tangent.profile_energy(p)
        rows.append({"name": name, "ode_residual": tangent.ode_residual(p),
                     "first_integral": tangent.first_integral_deviation(p), "E2": e2, "B1_energy": eb})
    phis = np.linspace(0.0, np.pi, 13)
    with open(out / "kappa_formulas.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phi", "split_plus_rho", "split_plus_z", "split_minus_rho", "split_minus_z",
                    "ring_rho", "ring_z"])
        for ph in phis:
            a = tangent.kappa_tangent_formulas(ph, "split_plus")
            b = tangent.kappa_tangent_formulas(ph, "split_minus")
            c = tangent.kappa_tangent_formulas(ph, "ring", args.varkappa)
            w.writerow([repr(float(x)) for x in (ph, *a, *b, *c)])
    io.write_json(out / "profiles.json", {"profiles": rows})
    for r in rows:
        print(f"{r['name']:<22} residual {r['ode_residual']:.2e}  B1 energy/pi {r['B1_energy'] / math.pi:.8f}")
    return 0


def cmd_verify(args) -> int:
    from .verify import format_table, run_checks
    checks = run_checks(seed=args.seed, mutate=args.mutate)
    print(format_table(checks))
    bad = [c.name for c in checks if not c.passed]
    if bad:
        print("failing checks: " + "; ".join(bad))
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value config file")
    common.add_argument("--out", metavar="DIR", default="ldg_out", help="output directory")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads for compiled kernels")
    common.add_argument("--seed", type=int, default=0, metavar="S", help="RNG seed (noise, verify samples)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="ldg", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("minimize", parents=[common], help="run one constrained minimization")
    sub.add_parser("sweep", parents=[common], help="warm-started continuation in b, c or mu")
    a = sub.add_parser("analyze", parents=[common], help="re-run the analysis on a checkpoint")
    a.add_argument("--checkpoint", metavar="PATH")
    t = sub.add_parser("tangent", parents=[common], help="export tangent-map profiles and director tables")
    t.add_argument("--beta", type=float, nargs="*", default=[0.3, 1.0, 2.0])
    t.add_argument("--varkappa", type=float, default=1.0)
    v = sub.add_parser("verify", parents=[common], help="run the oracle suite")
    v.add_argument("--mutate", choices=["eigen"], default=None, help="fault injection for testing the suite")
    return p


COMMANDS = {"minimize": cmd_minimize, "sweep": cmd_sweep, "analyze": cmd_analyze,
            "tangent": cmd_tangent, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    os.environ.setdefault("NUMBA_NUM_THREADS", str(args.threads))
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
