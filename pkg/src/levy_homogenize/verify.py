"""Statistical verification harness tying simulation to theory.

Each test reduces a Monte Carlo ensemble to a statistic with a standard
error and a 3-sigma verdict.  Trend tests across a decreasing epsilon
sweep use bootstrap confidence intervals and assert direction only, never
a rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import limit_law, rng
from .jump_kernel import JumpKernel
from .medium import MediumRealization, realization
from .sde_sim import EnsembleResult, SimConfig, simulate_ensemble

__all__ = [
    "EcfReport",
    "ErgodicReport",
    "ecf_test",
    "ergodic_test",
    "jump_functional_test",
    "compensator_test",
    "drift_vanishing_test",
    "modulus_diagnostic",
    "invariance_test",
    "bootstrap_ci",
]

N_BOOTSTRAP = 1000


def bootstrap_ci(values: np.ndarray, seed: int, stat=np.mean,
                 n_resample: int = N_BOOTSTRAP, level: float = 0.95):
    """Percentile bootstrap interval for a statistic of an iid sample."""
    gen = rng.substream(seed, rng.MISC, 7)
    n = len(values)
    idx = gen.integers(0, n, size=(n_resample, n))
    reps = stat(values[idx], axis=1)
    lo, hi = np.percentile(reps, [50 * (1 - level), 50 * (1 + level)])
    return float(lo), float(hi)


@dataclass
class EcfReport:
    """Empirical characteristic function against the limiting exponent."""

    u: np.ndarray
    ecf_re: np.ndarray
    ecf_im: np.ndarray
    se: np.ndarray
    theory_re: np.ndarray
    theory_im: np.ndarray
    z_scores: np.ndarray
    sup_distance: float
    eps: float
    t: float
    n: int
    passed: bool

    def to_csv_rows(self):
        header = "u,ecf_re,ecf_im,theory_re,theory_im,se"
        rows = ["%.*g,%.*g,%.*g,%.*g,%.*g,%.*g"
                % (17, self.u[i], 17, self.ecf_re[i], 17, self.ecf_im[i],
                   17, self.theory_re[i], 17, self.theory_im[i], 17, self.se[i])
                for i in range(len(self.u))]
        return [header] + rows

    def to_json(self):
        return {
            "eps": self.eps, "t": self.t, "n": self.n,
            "sup_distance": self.sup_distance,
            "max_z": float(np.max(self.z_scores)),
            "frac_z_above_3": float(np.mean(self.z_scores > 3.0)),
            "passed": bool(self.passed),
        }


def ecf_test(ensemble: EnsembleResult, triplet: limit_law.LevyTriplet,
             t: float, u_grid) -> EcfReport:
    """Compare the ECF of X at time t with exp(t phi(u)).

    Pass verdict: at most 5% of grid points with |z| > 3.
    """
    x = ensemble.at(t)
    n = len(x)
    if n < 100:
        raise ValueError("ecf test needs at least 100 samples")
    u = np.asarray(u_grid, dtype=float)
    ph = np.outer(u, x)
    ecf_re = np.cos(ph).mean(axis=1)
    ecf_im = np.sin(ph).mean(axis=1)
    ecf = ecf_re + 1j * ecf_im
    # SE of the complex mean, conservative isotropic form
    se = np.sqrt(np.maximum(1.0 - np.abs(ecf) ** 2, 1e-12) / n)
    theory = np.exp(t * np.asarray(limit_law.exponent(triplet, u)))
    dist = np.abs(ecf - theory)
    z = dist / se
    passed = float(np.mean(z > 3.0)) <= 0.05
    return EcfReport(u=u, ecf_re=ecf_re, ecf_im=ecf_im, se=se,
                     theory_re=np.real(theory), theory_im=np.imag(theory),
                     z_scores=z, sup_distance=float(np.max(dist)),
                     eps=ensemble.cfg.eps, t=t, n=n, passed=passed)


@dataclass
class ErgodicReport:
    """Sup-deviation of a path functional from its stationary mean."""

    eps_list: list
    statistic: list
    ci_lo: list
    ci_hi: list
    target: float
    decreasing: bool
    separated: bool          # CIs of largest and smallest eps disjoint

    @property
    def passed(self):
        return self.decreasing and self.separated

    def to_csv_rows(self):
        header = "epsilon,statistic,ci_lo,ci_hi"
        rows = ["%.*g,%.*g,%.*g,%.*g" % (17, e, 17, s, 17, lo, 17, hi)
                for e, s, lo, hi in zip(self.eps_list, self.statistic,
                                        self.ci_lo, self.ci_hi)]
        return [header] + rows

    def to_json(self):
        return {
            "eps": list(self.eps_list), "statistic": list(self.statistic),
            "ci_lo": list(self.ci_lo), "ci_hi": list(self.ci_hi),
            "target": self.target, "decreasing": bool(self.decreasing),
            "separated": bool(self.separated), "passed": bool(self.passed),
        }


def _sup_deviation_stats(eps_list, stats_per_eps, seed, target=0.0):
    stats_per_eps = [np.asarray(s, dtype=float) for s in stats_per_eps]
    means = [float(np.mean(s)) for s in stats_per_eps]
    cis = [bootstrap_ci(s, seed + i) for i, s in enumerate(stats_per_eps)]
    decreasing = all(means[i] > means[i + 1] for i in range(len(means) - 1))
    separated = cis[0][0] > cis[-1][1]
    return ErgodicReport(
        eps_list=list(eps_list), statistic=means,
        ci_lo=[c[0] for c in cis], ci_hi=[c[1] for c in cis],
        target=target, decreasing=decreasing, separated=separated)


def _pi_average(m: MediumRealization, f) -> float:
    x = m.grid(2 ** 14)
    F = m.eval_fields(x)
    w = np.exp(-2.0 * F.V)
    return float(np.sum(w * np.asarray(f(F))) / np.sum(w))


def ergodic_test(m: MediumRealization, kernel: JumpKernel, f, T: float,
                 eps_list, n: int, seed: int = 0, workers: int = 1,
                 f_family=None, cfg_kw=None) -> ErgodicReport:
    """Ensemble-averaged sup deviation of the time average of f over [0, T].

    f maps field tables to values; f_family optionally maps eps to such a
    functional (converging family variant), with f still supplying the
    limiting stationary mean.
    """
    target = _pi_average(m, f)
    eps_list = sorted(np.atleast_1d(np.asarray(eps_list, dtype=float)),
                      reverse=True)
    per_eps = []
    for e in eps_list:
        fe = f_family(e) if f_family is not None else f
        cfg = SimConfig(eps=float(e), t_max=T, seed=seed, **(cfg_kw or {}))
        res = simulate_ensemble(m, kernel, cfg, n,
                                functionals={"f": fe}, phase_law="pi",
                                workers=workers)
        I = res.integrals["f"]
        dev = np.max(np.abs(I - np.outer(np.ones(n), res.times) * target),
                     axis=1)
        per_eps.append(dev)
    return _sup_deviation_stats(eps_list, per_eps, seed, target=target)


def _scalar_c_profile(kernel: JumpKernel, z_vals, probe_n: int = 9):
    """c(x, z) as a function of z only; errors out if it depends on x."""
    L = kernel.medium.spec.period
    xs = np.linspace(0.0, L, probe_n, endpoint=False)
    vals = np.array([[float(np.asarray(kernel.c(x, z))) for z in z_vals]
                     for x in xs])
    spread = np.max(np.abs(vals - vals[0]), initial=0.0)
    if spread > 1e-10 * (np.max(np.abs(vals)) + 1.0):
        raise NotImplementedError(
            "jump functionals need an x-independent kernel weight c")
    return vals[0]


def _g_weighted_nu(kernel: JumpKernel, g, eps: float) -> float:
    """int g(z) c(z / eps) nu(dz) for an x-independent weight."""
    def integrand(z):
        cz = float(np.asarray(kernel.c(0.0, z / eps)))
        return g(z) * cz * abs(z) ** (-1.0 - kernel.alpha)
    total = 0.0
    for sgn in (1.0, -1.0):
        head, _ = integrate.quad(lambda z: integrand(sgn * z), 0.0, 1.0,
                                 epsabs=1e-12, limit=400)
        tail, _ = integrate.quad(lambda z: integrand(sgn * z), 1.0, np.inf,
                                 epsabs=1e-12, limit=400)
        total += head + tail
    return total


def jump_functional_test(m: MediumRealization, kernel: JumpKernel, g,
                         t: float, eps_list, n: int, seed: int = 0,
                         workers: int = 1, cfg_kw=None) -> ErgodicReport:
    """Convergence of the accumulated small-jump functional of g.

    The limiting slope is theta_bar times int g dnu; the path integrand is
    the z-integral of g(z) c(x, z/eps) e^{2V(x)} nu(dz) evaluated along the
    environment.  g must satisfy |g(z)| <= min(1, z^2).
    """
    zp = np.concatenate([np.geomspace(1e-4, 1.0, 50),
                         np.geomspace(1.0, 1e3, 50)])
    gz = np.array([g(z) for z in zp] + [g(-z) for z in zp])
    bound = np.minimum(1.0, np.concatenate([zp, zp]) ** 2)
    if np.any(np.abs(gz) > bound * (1.0 + 1e-9)):
        raise ValueError("g violates |g(z)| <= min(1, z^2)")

    _scalar_c_profile(kernel, (0.5, 1.0, 2.0))
    limit_slope = kernel.theta_bar * _g_int_nu(g, kernel.alpha)

    eps_list = sorted(np.atleast_1d(np.asarray(eps_list, dtype=float)),
                      reverse=True)
    per_eps = []
    for e in eps_list:
        q_eps = _g_weighted_nu(kernel, g, float(e))
        func = {"jf": lambda F, q=q_eps: q * np.exp(2.0 * F.V)}
        cfg = SimConfig(eps=float(e), t_max=t, seed=seed, **(cfg_kw or {}))
        res = simulate_ensemble(m, kernel, cfg, n, functionals=func,
                                phase_law="pi", workers=workers)
        I = res.integrals["jf"]
        dev = np.max(np.abs(I - np.outer(np.ones(n), res.times) * limit_slope),
                     axis=1)
        per_eps.append(dev)
    rep = _sup_deviation_stats(eps_list, per_eps, seed, target=limit_slope)
    return rep


def _g_int_nu(g, alpha: float) -> float:
    """int g dnu for the reference measure."""
    total = 0.0
    for sgn in (1.0, -1.0):
        head, _ = integrate.quad(
            lambda z: g(sgn * z) * z ** (-1.0 - alpha), 0.0, 1.0,
            epsabs=1e-12, limit=400)
        tail, _ = integrate.quad(
            lambda z: g(sgn * z) * z ** (-1.0 - alpha), 1.0, np.inf,
            epsabs=1e-12, limit=400)
        total += head + tail
    return total


def compensator_functionals(spec, kernel_builder, Du_interp, eps: float):
    """Environment functionals accumulating the bracket of the martingale
    part under the truncation h.

    Du_interp maps absolute profile positions to the corrector gradient;
    the jump part reduces to e^{2V} times a scalar z-integral because the
    kernel weight is x-independent.
    """
    ref = realization(spec, 0.0)
    kernel = kernel_builder(ref)
    _scalar_c_profile(kernel, (0.5, 1.0, 2.0))
    a = kernel.alpha

    def h2_integrand(v):
        h = min(1.0, eps * v)
        cz = float(np.asarray(kernel.c(0.0, v)))
        return h * h * cz * v ** (-1.0 - a)

    head, _ = integrate.quad(h2_integrand, 0.0, 1.0 / eps,
                             epsabs=1e-12, limit=400)
    tail, _ = integrate.quad(h2_integrand, 1.0 / eps, np.inf,
                             epsabs=1e-12, limit=400)
    # macro-time intensity: nu(dz) at the macroscopic jump size z = eps v
    # carries a factor eps^{-alpha}, which the eps^alpha decay of the
    # truncated integral cancels in the limit
    I_eps = 2.0 * (head + tail) * eps ** (-a)

    def diffusive(x, F):
        du = Du_interp(x)
        return (1.0 + du) ** 2 * F.a

    def jump(x, F):
        return np.exp(2.0 * F.V) * I_eps

    return {"comp_d": diffusive, "comp_j": jump}


def compensator_test(spec, kernel_builder, triplet, t: float, eps_list,
                     n: int, Du_grid=None, seed: int = 0, workers: int = 1,
                     cfg_kw=None) -> dict:
    """Slope of the accumulated martingale bracket against A + tb int h^2.

    Du_grid is (positions, values) for the corrector gradient in absolute
    profile coordinates; omitted means the zero corrector (constant
    medium).
    """
    if Du_grid is not None:
        xs, vals = Du_grid
        L = float(realization(spec, 0.0).spec.period)

        def Du_interp(x):
            return np.interp(np.asarray(x) % L, xs, vals,
                             period=L)
    else:
        def Du_interp(x):
            return np.zeros_like(np.asarray(x, dtype=float))

    target = triplet.A + triplet.theta_bar * limit_law.h_squared_nu(
        triplet.alpha)
    eps_list = sorted(np.atleast_1d(np.asarray(eps_list, dtype=float)),
                      reverse=True)
    rows = []
    for e in eps_list:
        ref = realization(spec, 0.0)
        kernel = kernel_builder(ref)
        funcs = compensator_functionals(spec, kernel_builder, Du_interp,
                                        float(e))
        cfg = SimConfig(eps=float(e), t_max=t, seed=seed, **(cfg_kw or {}))
        res = simulate_ensemble(ref, kernel, cfg, n, functionals=funcs,
                                phase_law="pi", workers=workers)
        slope = (res.integrals["comp_d"][:, -1]
                 + res.integrals["comp_j"][:, -1]) / t
        mean = float(np.mean(slope))
        lo, hi = bootstrap_ci(slope, seed + int(1000 * e))
        rows.append({"eps": float(e), "slope": mean, "ci_lo": lo,
                     "ci_hi": hi, "target": target,
                     "rel_dev": abs(mean - target) / target})
    return {"rows": rows, "target": target,
            "final_rel_dev": rows[-1]["rel_dev"]}


def drift_vanishing_test(kernel: JumpKernel, eps_list,
                         n_quad: int = 4001) -> dict:
    """Principal-value drift under the truncation h per epsilon.

    g_eps(x) = pv int h(z) c(x, z/eps) e^{2V} nu(dz); for conforming (even
    weight) kernels the positive and negative z contributions cancel
    identically, and the statistic is the numerical sup of the pairing.
    """
    m = kernel.medium
    L = m.spec.period
    xs = np.linspace(0.0, L, 17, endpoint=False)
    a = kernel.alpha
    t = np.linspace(math.log(1e-8), math.log(1e4), n_quad)
    z = np.exp(t)
    h = np.clip(z, None, 1.0)
    out = {"eps": [], "sup_g": []}
    for e in np.atleast_1d(np.asarray(eps_list, dtype=float)):
        sup_g = 0.0
        for x in xs:
            cpos = np.asarray(kernel.c(x - m.phase, z / e), dtype=float)
            cneg = np.asarray(kernel.c(x - m.phase, -z / e), dtype=float)
            e2v = float(np.exp(2.0 * m.eval_fields(x - m.phase).V))
            integrand = h * (cpos - cneg) * z ** (-a) * e2v
            sup_g = max(sup_g, abs(float(np.trapezoid(integrand, t))))
        out["eps"].append(float(e))
        out["sup_g"].append(sup_g)
    out["max_sup_g"] = max(out["sup_g"])
    out["conforming"] = bool(kernel.conforming)
    out["applicable"] = out["conforming"]
    out["passed"] = (out["max_sup_g"] < 1e-8) if out["applicable"] else None
    return out


def modulus_diagnostic(ensemble: EnsembleResult, delta_grid=None,
                       name: str = "b") -> dict:
    """Continuity-modulus table for the rescaled drift integral.

    Statistic per window delta: ensemble mean of the sup over |t - s| <=
    delta of |(1/eps) int_s^t b dr|, compared with delta^{1/2} ln(1/delta).
    """
    if delta_grid is None:
        delta_grid = [2.0 ** (-k) for k in range(2, 8)]
    I = ensemble.integrals[name] / ensemble.cfg.eps
    times = ensemble.times
    dt = times[1] - times[0]
    rows = []
    for d in delta_grid:
        k = max(1, int(round(d / dt)))
        sup = np.zeros(I.shape[0])
        for off in range(1, k + 1):
            diff = np.abs(I[:, off:] - I[:, :-off])
            sup = np.maximum(sup, diff.max(axis=1))
        stat = float(np.mean(sup))
        ref = math.sqrt(d) * math.log(1.0 / d)
        rows.append({"delta": float(d), "statistic": stat,
                     "reference": ref, "ratio": stat / ref})
    ratios = [r["ratio"] for r in rows]
    lo = min(r for r in ratios if r > 0) if any(r > 0 for r in ratios) else 0.0
    out = {"rows": rows, "ratio_spread": (max(ratios) / lo) if lo else 0.0,
           "bounded_within_3": bool(lo and max(ratios) / lo <= 3.0)}
    return out


def invariance_test(m: MediumRealization, kernel: JumpKernel, eps: float,
                    f, t: float, n: int, seed: int = 0,
                    workers: int = 1, cfg_kw=None) -> dict:
    """Stationarity of the environment seen from the particle.

    With a pi-distributed start, the annealed mean of f along the
    environment at time t equals the pi average of f; reports the z-score
    of the deviation.
    """
    target = _pi_average(m, f)
    cfg = SimConfig(eps=eps, t_max=t, seed=seed, **(cfg_kw or {}))
    res = simulate_ensemble(m, kernel, cfg, n, phase_law="pi",
                            workers=workers)
    pos = res.env_positions(t)
    ref = realization(m.spec, 0.0)
    vals = np.asarray(f(ref.eval_fields(pos)), dtype=float)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) + 1e-300
    z = (mean - target) / se
    return {"eps": eps, "t": t, "n": n, "mean": mean, "target": target,
            "se": se, "z": float(z), "passed": bool(abs(z) < 3.0)}
