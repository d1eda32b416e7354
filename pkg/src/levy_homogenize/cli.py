"""Command line front end: config ingestion, dispatch, persistence.

Usage: levy-homogenize <subcommand> <config.json> [--out DIR] [--seed N]
[--workers K].  All outputs are JSON reports and plot-ready CSV; a manifest
records the config, library versions, seed and wall times so every number
is traceable.  Exit code 0 means every selected verdict passed, 1 a
runtime or verdict failure, 2 a config error.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time

import numpy as np
import scipy

from . import corrector, limit_law, verify
from .jump_kernel import kernel_from_json, linear_kernel
from .medium import MediumSpec, make_medium, realization, validate_assumptions
from .sde_sim import SimConfig, simulate_ensemble

SUBCOMMANDS = ("validate", "simulate", "corrector", "exponent", "ecf",
               "ergodic", "jumps", "compensator", "modulus", "sweep")

_FUNCTIONALS = {
    "a": lambda F: F.a,
    "b": lambda F: F.b,
    "e2v": lambda F: np.exp(-2.0 * F.V),
    "exp2v": lambda F: np.exp(2.0 * F.V),
    "one": lambda F: np.ones_like(F.V),
}


class ConfigError(Exception):
    pass


def _fmt(x):
    return "%.17g" % float(x)


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


class Experiment:
    """Parsed configuration plus loaded model objects."""

    def __init__(self, cfg: dict, out_dir: str, seed: int, workers: int):
        self.cfg = cfg
        self.out = out_dir
        self.seed = seed
        self.workers = workers
        try:
            self.spec = MediumSpec.from_json(cfg.get("medium", {}))
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"medium: {exc}")
        phase = cfg.get("phase")
        if phase is not None:
            self.medium = realization(self.spec, float(phase))
        else:
            self.medium = make_medium(self.spec, seed)
        self.kernel = None
        if "kernel" in cfg:
            try:
                self.kernel = kernel_from_json(cfg["kernel"], self.medium)
            except (ValueError, TypeError, KeyError) as exc:
                raise ConfigError(f"kernel: {exc}")

    def require_kernel(self):
        if self.kernel is None:
            raise ConfigError("this subcommand needs a 'kernel' section")
        return self.kernel

    def sim_config(self, eps=None, **over) -> SimConfig:
        sim = dict(self.cfg.get("sim", {}))
        sim.update(over)
        if eps is not None:
            sim["eps"] = float(eps)
        sim.setdefault("eps", 0.1)
        sim.setdefault("t_max", 1.0)
        sim["seed"] = self.seed
        try:
            return SimConfig(**sim)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sim: {exc}")

    def eps_list(self, default=(0.4, 0.2, 0.1)):
        return [float(e) for e in self.cfg.get("eps_list", list(default))]

    def u_grid(self):
        u = self.cfg.get("u_grid", [-3.0, 3.0, 0.25])
        if isinstance(u, list) and len(u) == 3 and u[2] < u[1] - u[0]:
            lo, hi, step = u
            n = int(round((hi - lo) / step))
            return lo + step * np.arange(n + 1)
        return np.asarray(u, dtype=float)

    def functional(self, key="f", default="a"):
        name = self.cfg.get(key, default)
        if name not in _FUNCTIONALS:
            raise ConfigError(f"unknown functional {name!r}; "
                              f"choose from {sorted(_FUNCTIONALS)}")
        return _FUNCTIONALS[name]

    def n_paths(self, default=1000):
        return int(self.cfg.get("n_paths", default))

    def grid_n(self, default=512):
        return int(self.cfg.get("grid_n", default))

    def triplet(self) -> limit_law.LevyTriplet:
        k = self.require_kernel()
        A = corrector.effective_A(self.medium, self.grid_n(4096))
        return limit_law.LevyTriplet(A=A, theta_bar=k.theta_bar,
                                     alpha=k.alpha)


# --------------------------------------------------------------------------
# subcommand implementations; each returns (passed, summary dict)

def cmd_validate(exp: Experiment):
    rep = validate_assumptions(exp.medium, exp.kernel)
    out = {"entries": rep.to_json(), "passed": bool(rep.all_passed)}
    _write_json(os.path.join(exp.out, "validate.json"), out)
    return rep.all_passed, out


def cmd_simulate(exp: Experiment):
    kernel = exp.require_kernel()
    cfg = exp.sim_config()
    n = exp.n_paths()
    res = simulate_ensemble(exp.medium, kernel, cfg, n,
                            phase_law=exp.cfg.get("phase_law", "mu"),
                            workers=exp.workers, collect_jumps=True)
    rows = []
    for i in range(n):
        for j, t in enumerate(res.times):
            rows.append((i, float(t), float(res.values[i, j]),
                         int(res.n_jumps[i])))
    _write_csv(os.path.join(exp.out, "ensemble.csv"), "path,t,x,njumps", rows)
    jrows = []
    for i, (jt, jm, ja) in enumerate(res.jump_logs):
        for t, mk, amp in zip(jt, jm, ja):
            jrows.append((i, float(t), float(mk), float(amp)))
    _write_csv(os.path.join(exp.out, "jumps_log.csv"),
               "path,t,mark,amplitude", jrows)
    out = {"n_paths": n, "eps": cfg.eps, "t_max": cfg.t_max,
           "mean_njumps": float(np.mean(res.n_jumps)),
           "mean_final": float(np.mean(res.at(cfg.t_max)))}
    _write_json(os.path.join(exp.out, "simulate.json"), out)
    return True, out


def cmd_corrector(exp: Experiment):
    kernel = exp.require_kernel()
    N = exp.grid_n()
    eps_list = exp.eps_list((0.4, 0.2, 0.1, 0.05))
    sol = corrector.corrector_solve(exp.medium, kernel, eps_list, N)
    recs = corrector.resolvent_ergodic_limit(
        exp.medium, kernel, exp.functional(), eps_list, N)
    rows = [(s["eps"], s["eps"] ** 2, sol.A, s["lam_u2"], s["Bd"],
             s["Bj_scaled"], r["deviation"])
            for s, r in zip(sol.sweep, recs)]
    _write_csv(os.path.join(exp.out, "corrector_sweep.csv"),
               "epsilon,lambda,A,e2u2,Bd,Bj,deviation", rows)
    out = {"A": sol.A, "eps": sol.eps,
           "energies": list(sol.energies),
           "est_erg_ok": all(r["est_erg_ok"] for r in recs)}
    _write_json(os.path.join(exp.out, "corrector.json"), out)
    print("A = %.10f" % sol.A)
    return bool(out["est_erg_ok"]), out


def cmd_exponent(exp: Experiment):
    tcfg = exp.cfg.get("triplet")
    if tcfg is not None:
        tr = limit_law.LevyTriplet(A=float(tcfg["A"]),
                                   theta_bar=float(tcfg["theta_bar"]),
                                   alpha=float(tcfg["alpha"]))
    else:
        tr = exp.triplet()
    u = exp.u_grid()
    phi = np.asarray(limit_law.exponent(tr, u))
    _write_csv(os.path.join(exp.out, "exponent.csv"), "u,re_phi,im_phi",
               [(float(ui), float(pi), 0.0) for ui, pi in zip(u, phi)])
    rep = limit_law.triplet_report(tr, float(exp.cfg.get("t", 1.0)))
    _write_json(os.path.join(exp.out, "exponent.json"), rep)
    return True, rep


def cmd_ecf(exp: Experiment, eps=None):
    kernel = exp.require_kernel()
    tr = exp.triplet()
    t = float(exp.cfg.get("t", 1.0))
    cfg = exp.sim_config(eps=eps, t_max=t)
    res = simulate_ensemble(exp.medium, kernel, cfg, exp.n_paths(10 ** 4),
                            phase_law=exp.cfg.get("phase_law", "mu"),
                            workers=exp.workers)
    rep = verify.ecf_test(res, tr, t, exp.u_grid())
    tag = "" if eps is None else "_eps%g" % cfg.eps
    with open(os.path.join(exp.out, f"ecf{tag}.csv"), "w") as fh:
        fh.write("\n".join(rep.to_csv_rows()) + "\n")
    _write_json(os.path.join(exp.out, f"ecf{tag}.json"), rep.to_json())
    return rep.passed, rep


def cmd_ergodic(exp: Experiment):
    kernel = exp.require_kernel()
    rep = verify.ergodic_test(
        exp.medium, kernel, exp.functional(),
        float(exp.cfg.get("t", 1.0)), exp.eps_list(), exp.n_paths(),
        seed=exp.seed, workers=exp.workers,
        cfg_kw=_strip_eps(exp.cfg.get("sim", {})))
    with open(os.path.join(exp.out, "ergodic.csv"), "w") as fh:
        fh.write("\n".join(rep.to_csv_rows()) + "\n")
    _write_json(os.path.join(exp.out, "ergodic.json"), rep.to_json())
    return rep.passed, rep.to_json()


def _strip_eps(sim):
    return {k: v for k, v in sim.items()
            if k not in ("eps", "seed", "t_max")}


def cmd_jumps(exp: Experiment):
    kernel = exp.require_kernel()
    rep = verify.jump_functional_test(
        exp.medium, kernel, lambda z: min(1.0, z * z),
        float(exp.cfg.get("t", 0.5)), exp.eps_list(), exp.n_paths(),
        seed=exp.seed, workers=exp.workers,
        cfg_kw=_strip_eps(exp.cfg.get("sim", {})))
    with open(os.path.join(exp.out, "jumps.csv"), "w") as fh:
        fh.write("\n".join(rep.to_csv_rows()) + "\n")
    _write_json(os.path.join(exp.out, "jumps.json"), rep.to_json())
    return rep.decreasing, rep.to_json()


def cmd_compensator(exp: Experiment):
    kernel = exp.require_kernel()
    tr = exp.triplet()
    kj = exp.cfg["kernel"]

    def builder(ref):
        return kernel_from_json(kj, ref)

    N = exp.grid_n()
    ref = realization(exp.spec, 0.0)
    sol = corrector.corrector_solve(ref, builder(ref),
                                    min(exp.eps_list()), N)
    xs = ref.grid(N) + 0.5 * ref.spec.period / N
    rep = verify.compensator_test(
        exp.spec, builder, tr, float(exp.cfg.get("t", 1.0)),
        exp.eps_list(), exp.n_paths(), Du_grid=(xs, sol.Du),
        seed=exp.seed, workers=exp.workers,
        cfg_kw=_strip_eps(exp.cfg.get("sim", {})))
    _write_csv(os.path.join(exp.out, "compensator.csv"),
               "epsilon,slope,ci_lo,ci_hi,target",
               [(r["eps"], r["slope"], r["ci_lo"], r["ci_hi"], r["target"])
                for r in rep["rows"]])
    _write_json(os.path.join(exp.out, "compensator.json"), rep)
    return rep["final_rel_dev"] < 0.02, rep


def cmd_modulus(exp: Experiment):
    kernel = exp.require_kernel()
    cfg = exp.sim_config()
    res = simulate_ensemble(exp.medium, kernel, cfg, exp.n_paths(),
                            functionals={"b": lambda F: F.b},
                            phase_law="pi", workers=exp.workers)
    rep = verify.modulus_diagnostic(res)
    _write_csv(os.path.join(exp.out, "modulus.csv"),
               "delta,statistic,reference,ratio",
               [(r["delta"], r["statistic"], r["reference"], r["ratio"])
                for r in rep["rows"]])
    _write_json(os.path.join(exp.out, "modulus.json"), rep)
    return rep["bounded_within_3"], rep


def cmd_sweep(exp: Experiment):
    """Run the ECF test across the epsilon list and merge the reports."""
    rows = []
    all_pass = True
    sups = []
    for e in exp.eps_list():
        ok, rep = cmd_ecf(exp, eps=e)
        rows.append({"eps": e, **rep.to_json()})
        sups.append(rep.sup_distance)
        all_pass = all_pass and ok
    merged = {"rows": rows,
              "sup_decreasing": all(sups[i] > sups[i + 1]
                                    for i in range(len(sups) - 1))}
    _write_json(os.path.join(exp.out, "sweep.json"), merged)
    return all_pass and merged["sup_decreasing"], merged


_DISPATCH = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "corrector": cmd_corrector,
    "exponent": cmd_exponent,
    "ecf": cmd_ecf,
    "ergodic": cmd_ergodic,
    "jumps": cmd_jumps,
    "compensator": cmd_compensator,
    "modulus": cmd_modulus,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="levy-homogenize",
                                description=__doc__)
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("config", help="path to a JSON experiment config")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    args = p.parse_args(argv)

    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: {args.config}:{exc.lineno}:{exc.colno}: "
              f"{exc.msg}", file=sys.stderr)
        return 2

    out_dir = args.out or cfg.get("out", ".")
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    workers = args.workers
    if workers is None:
        env = os.environ.get("LEVY_HOMOGENIZE_WORKERS")
        workers = int(env) if env else int(cfg.get("workers", 1))

    try:
        os.makedirs(out_dir, exist_ok=True)
        t0 = time.time()
        exp = Experiment(cfg, out_dir, seed, workers)
        passed, summary = _DISPATCH[args.subcommand](exp)
        wall = time.time() - t0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - map to the exit contract
        print(f"runtime error ({args.subcommand}): "
              f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    manifest = {
        "subcommand": args.subcommand,
        "config": cfg,
        "seed": seed,
        "workers": workers,
        "wall_time_s": wall,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "passed": bool(passed),
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    print(f"{args.subcommand}: {'pass' if passed else 'FAIL'} "
          f"({wall:.1f}s); outputs in {out_dir}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
