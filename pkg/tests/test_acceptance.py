"""Acceptance suite: one printed pass/fail line per criterion.

The statistical criteria share three expensive path ensembles (one per
epsilon) so the whole suite stays within a modest wall-time budget.
"""

import json
import math
import sys
import time

import numpy as np
import pytest
from scipy import stats

from levy_homogenize import cli
from levy_homogenize.corrector import (assemble, corrector_solve,
                                       effective_A, effective_A_routes,
                                       energy_identity_gap,
                                       resolvent_ergodic_limit,
                                       solve_resolvent)
from levy_homogenize.jump_kernel import (ConstChi, linear_kernel,
                                         pushforward_check,
                                         tail_inverted_kernel)
from levy_homogenize.limit_law import LevyTriplet, stable_integral
from levy_homogenize.medium import (MediumSpec, cosine_profile_log_coeffs,
                                    make_medium, realization)
from levy_homogenize.sde_sim import SimConfig, simulate_ensemble
from levy_homogenize.verify import (_sup_deviation_stats, compensator_test,
                                    drift_vanishing_test, ecf_test,
                                    modulus_diagnostic)

ACCEPT_SEED = 2026
SQ75 = math.sqrt(0.75)

HETERO_SPEC = MediumSpec(period=1.0,
                         fourier_V=((1, 0.3, 0.1),),
                         fourier_loga=((1, 0.2, -0.1),))


ACCEPTANCE_LINES = []


def report(num, name, ok, detail=""):
    line = "CRITERION %02d %-28s %s" % (num, name, "PASS" if ok else "FAIL")
    if detail:
        line += "  (%s)" % detail
    ACCEPTANCE_LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)
    assert ok, line


@pytest.fixture(scope="module")
def hetero():
    return make_medium(HETERO_SPEC, seed=9)


@pytest.fixture(scope="module")
def hetero_kernel(hetero):
    return linear_kernel(hetero, 1.0, 1.0)


@pytest.fixture(scope="module")
def shared_ensembles(hetero, hetero_kernel):
    """pi-started ensembles of 10^4 paths at eps in {0.4, 0.2, 0.1}."""
    funcs = {"a": lambda F: F.a,
             "e2v": lambda F: np.exp(-2.0 * F.V),
             "b": lambda F: F.b}
    out = {}
    for eps in (0.4, 0.2, 0.1):
        cfg = SimConfig(eps=eps, t_max=1.0, seed=ACCEPT_SEED)
        out[eps] = simulate_ensemble(hetero, hetero_kernel, cfg, 10 ** 4,
                                     functionals=funcs, phase_law="pi")
    return out


def _pi_target(m, f):
    x = m.grid(2 ** 14)
    F = m.eval_fields(x)
    w = np.exp(-2.0 * F.V)
    return float(np.sum(w * f(F)) / np.sum(w))


def test_c01_effective_coefficient():
    m = realization(MediumSpec(period=1.0,
                               fourier_loga=cosine_profile_log_coeffs(0.5)),
                    0.0)
    t0 = time.perf_counter()
    routes = effective_A_routes(m, 4096)
    wall = time.perf_counter() - t0
    vals = np.array(sorted(routes.values()))
    ok = (abs(routes["harmonic"] - SQ75) < 1e-4
          and vals[-1] - vals[0] < 1e-8
          and wall < 5.0)
    report(1, "effective-coefficient", ok)


def test_c02_generator_identities(hetero, hetero_kernel):
    gen = assemble(hetero, hetero_kernel, 0.2, 512)
    rng_ = np.random.default_rng(ACCEPT_SEED)
    ok = gen.row_sum_residual() < 1e-10
    ok = ok and gen.self_adjoint_residual(rng_, n_pairs=100) < 1e-8
    for _ in range(10):
        f = rng_.standard_normal(gen.n)
        u = solve_resolvent(gen, 0.3, f)
        ok = ok and energy_identity_gap(gen, 0.3, f, u) < 1e-8
    report(2, "generator-identities", ok)


def test_c03_stable_exponent():
    ok = abs(stable_integral(1.0, 1.0) + math.pi) < 1e-6
    for alpha in (0.5, 1.0, 1.5):
        base = stable_integral(alpha, 1.0)
        for u in (0.5, 2.0, 3.0):
            ok = ok and abs(stable_integral(alpha, u) - base * u ** alpha) \
                < 1e-8 * abs(base * u ** alpha)
    report(3, "stable-exponent", ok)


def test_c04_constant_medium_gaussian():
    m = realization(MediumSpec(period=1.0), 0.0)
    k = linear_kernel(m, 1e-12, 1.0)
    ok = True
    for eps in (1.0, 0.25):
        cfg = SimConfig(eps=eps, t_max=1.0, seed=ACCEPT_SEED)
        res = simulate_ensemble(m, k, cfg, 10 ** 4)
        p = stats.kstest(res.at(1.0), "norm").pvalue
        ok = ok and p > 0.01
    report(4, "constant-medium-gaussian", ok)


def test_c05_pushforward_identity(hetero):
    lin = linear_kernel(hetero, 1.0, 1.0)
    tai = tail_inverted_kernel(hetero, 0.5, ConstChi(), 1.2)
    ok = True
    for k in (lin, tai):
        ok = ok and pushforward_check(k, 0.3, 10 ** 5, 0.05,
                                      seed=ACCEPT_SEED).pvalue > 0.01
        ok = ok and pushforward_check(k, 0.3, 10 ** 5, 0.05,
                                      seed=ACCEPT_SEED,
                                      corrupt_scale=1.15).pvalue < 1e-6
    report(5, "pushforward-identity", ok)


def test_c06_environment_invariance(hetero, shared_ensembles):
    ref = realization(hetero.spec, 0.0)
    funcs = {"a": lambda F: F.a, "e2v": lambda F: np.exp(-2.0 * F.V)}
    ok = True
    for eps in (0.4, 0.1):
        res = shared_ensembles[eps]
        for t in (0.25, 1.0):
            pos = res.env_positions(t)
            F = ref.eval_fields(pos)
            for name, f in funcs.items():
                vals = np.asarray(f(F), dtype=float)
                target = _pi_target(hetero, f)
                se = np.std(vals, ddof=1) / math.sqrt(len(vals))
                z = (np.mean(vals) - target) / se
                ok = ok and abs(z) < 3.0
    report(6, "environment-invariance", ok)


def test_c07_ergodic_time_average(hetero, shared_ensembles):
    target = _pi_target(hetero, lambda F: F.a)
    eps_list, per_eps = [], []
    for eps in (0.4, 0.2, 0.1):
        res = shared_ensembles[eps]
        I = res.integrals["a"][:1000]
        dev = np.max(np.abs(I - res.times[None, :] * target), axis=1)
        eps_list.append(eps)
        per_eps.append(dev)
    rep = _sup_deviation_stats(eps_list, per_eps, ACCEPT_SEED, target=target)
    report(7, "ergodic-time-average", rep.decreasing and rep.separated)


def test_c08_resolvent_ergodic(hetero, hetero_kernel):
    recs = resolvent_ergodic_limit(hetero, hetero_kernel, lambda F: F.a,
                                   [0.2, 0.1, 0.05, 0.02], N=512)
    devs = [r["deviation"] for r in recs]
    ok = all(a > b for a, b in zip(devs, devs[1:]))
    ok = ok and devs[-1] < 1e-2
    ok = ok and all(r["est_erg_ok"] for r in recs)
    report(8, "resolvent-ergodic", ok)


def test_c09_ecf_convergence(hetero, shared_ensembles):
    trip = LevyTriplet(A=effective_A(hetero, 4096), theta_bar=1.0, alpha=1.0)
    u = -3.0 + 0.25 * np.arange(25)
    reps = [ecf_test(shared_ensembles[e], trip, 1.0, u)
            for e in (0.4, 0.2, 0.1)]
    sups = [r.sup_distance for r in reps]
    # note: at n = 1e4 the sup over this grid has a Monte Carlo noise floor
    # of about 0.02, which the finite-eps bias sits below already at
    # eps = 0.4; the monotone clause is then decided by noise (see the
    # decisions ledger for the measured evidence)
    ok = all(a > b for a, b in zip(sups, sups[1:]))
    ok = ok and reps[-1].passed
    report(9, "ecf-convergence", ok,
           "sup distances %s; frac|z|>3 at smallest eps = %.3f"
           % (["%.4f" % s for s in sups],
              float(np.mean(reps[-1].z_scores > 3.0))))


def test_c10_compensator_slope(hetero):
    # heterogeneous medium with the corrector gradient folded in
    trip = LevyTriplet(A=effective_A(hetero, 4096), theta_bar=1.0, alpha=1.0)
    ref = realization(hetero.spec, 0.0)

    def builder(r):
        return linear_kernel(r, 1.0, 1.0)

    N = 512
    sol = corrector_solve(ref, builder(ref), 0.1, N)
    xs = ref.grid(N) + 0.5 * ref.spec.period / N
    out = compensator_test(hetero.spec, builder, trip, t=1.0,
                           eps_list=[0.4, 0.2, 0.1], n=400,
                           Du_grid=(xs, sol.Du), seed=ACCEPT_SEED)
    ok = out["final_rel_dev"] < 0.02

    # constant medium without jumps: the slope is exact
    flat = MediumSpec(period=1.0)
    out0 = compensator_test(flat, lambda r: linear_kernel(r, 1e-12, 1.0),
                            LevyTriplet(A=1.0, theta_bar=0.0, alpha=1.0),
                            t=0.5, eps_list=[0.5, 0.25], n=50,
                            seed=ACCEPT_SEED)
    ok = ok and all(r["rel_dev"] < 1e-9 for r in out0["rows"])
    report(10, "compensator-slope", ok)


def test_c11_drift_vanishing(hetero):
    ok = True
    for k in (linear_kernel(hetero, 1.0, 1.0),
              tail_inverted_kernel(hetero, 0.5, ConstChi(), 1.2)):
        out = drift_vanishing_test(k, [0.4, 0.2, 0.1])
        ok = ok and out["applicable"] and out["passed"]
    report(11, "drift-vanishing", ok)


def test_c12_modulus_bound(shared_ensembles):
    out = modulus_diagnostic(shared_ensembles[0.1],
                             delta_grid=[2.0 ** (-k) for k in range(2, 8)])
    report(12, "modulus-bound", out["bounded_within_3"])


def test_c13_worker_determinism(tmp_path):
    cfg = {"medium": HETERO_SPEC.to_json(),
           "kernel": {"family": "linear", "C": 1.0, "alpha": 1.0},
           "n_paths": 30, "sim": {"eps": 0.4, "t_max": 0.25}}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    outs = []
    for w in (1, 4):
        out = tmp_path / ("w%d" % w)
        rc = cli.main(["simulate", str(cfg_path), "--out", str(out),
                       "--seed", "7", "--workers", str(w)])
        assert rc == 0
        outs.append(out)
    ok = all((outs[0] / n).read_bytes() == (outs[1] / n).read_bytes()
             for n in ("ensemble.csv", "jumps_log.csv"))
    report(13, "worker-determinism", ok)
