"""Stationary ergodic one-dimensional random media.

A medium is a randomly shifted L-periodic trigonometric profile: the
potential V and the log of the diffusion coefficient a are finite
Fourier sums, and the randomness is a single uniform phase on [0, L).
Shifting the evaluation point is the same as shifting the phase, which
makes the family exactly stationary and ergodic, and turns every
environment expectation into a one-period quadrature.

The drift is b = (1/2) a' - a V', equivalently (e^{2V}/2) (e^{-2V} a)'.
After normalization the period average of e^{-2V} equals 1, so the
weighted average pi (density e^{-2V}) is a probability measure.
"""

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import rng

DEFAULT_QUAD_NODES = 2 ** 14


class Fields(NamedTuple):
    V: np.ndarray
    DV: np.ndarray
    a: np.ndarray
    Da: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class MediumSpec:
    """Fourier description of the (V, log a) profiles.

    Harmonics are triples (k, cos_coeff, sin_coeff); k = 0 encodes a
    constant offset through the cosine coefficient.
    """

    period: float = 1.0
    fourier_V: tuple = ()
    fourier_loga: tuple = ()
    normalize_V: bool = True
    independent_phases: bool = False  # stress family, no quantitative oracles

    def __post_init__(self):
        if not (np.isfinite(self.period) and self.period > 0):
            raise ValueError("period must be a positive finite real")
        for name, harmonics in (("fourier_V", self.fourier_V),
                                ("fourier_loga", self.fourier_loga)):
            for h in harmonics:
                k, ak, bk = h
                if int(k) != k or k < 0:
                    raise ValueError(f"{name}: harmonic index {k} is not a nonnegative integer")
                if not (np.isfinite(ak) and np.isfinite(bk)):
                    raise ValueError(f"{name}: non-finite coefficient in harmonic {h}")

    @property
    def ellipticity_bound(self):
        """M with M^-1 <= a <= M, from the l1 norm of the log a coefficients."""
        total = sum(abs(a) + abs(b) for _, a, b in self.fourier_loga)
        return float(np.exp(total))

    def to_json(self):
        return {
            "period": self.period,
            "fourier_V": [list(h) for h in self.fourier_V],
            "fourier_loga": [list(h) for h in self.fourier_loga],
            "normalize_V": self.normalize_V,
        }

    @staticmethod
    def from_json(obj):
        return MediumSpec(
            period=float(obj.get("period", 1.0)),
            fourier_V=tuple(tuple(h) for h in obj.get("fourier_V", ())),
            fourier_loga=tuple(tuple(h) for h in obj.get("fourier_loga", ())),
            normalize_V=bool(obj.get("normalize_V", True)),
            independent_phases=bool(obj.get("independent_phases", False)),
        )


def _split(harmonics):
    if not harmonics:
        return np.zeros(0), np.zeros((0,)), np.zeros((0,))
    k = np.array([h[0] for h in harmonics], dtype=float)
    ac = np.array([h[1] for h in harmonics], dtype=float)
    bs = np.array([h[2] for h in harmonics], dtype=float)
    return k, ac, bs


class _TrigPoly:
    """Finite Fourier sum with analytic derivative."""

    def __init__(self, period, k, cos_c, sin_c):
        self.L = period
        self.k = k
        self.cos_c = cos_c
        self.sin_c = sin_c
        self.freq = 2.0 * np.pi * k / period

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ph = np.multiply.outer(x, self.freq)
        return np.cos(ph) @ self.cos_c + np.sin(ph) @ self.sin_c

    def deriv(self, x):
        x = np.asarray(x, dtype=float)
        ph = np.multiply.outer(x, self.freq)
        return (-np.sin(ph) * self.freq) @ self.cos_c + (np.cos(ph) * self.freq) @ self.sin_c


class MediumRealization:
    """One sampled environment: a phase plus the (possibly re-phased) profiles.

    Immutable after construction; evaluation is thread-safe.
    """

    def __init__(self, spec: MediumSpec, phase: float,
                 harmonic_offsets: Optional[tuple] = None,
                 quad_nodes: int = DEFAULT_QUAD_NODES):
        self.spec = spec
        self.phase = float(phase) % spec.period
        L = spec.period

        kV, aV, bV = _split(spec.fourier_V)
        kA, aA, bA = _split(spec.fourier_loga)
        if harmonic_offsets is not None:
            offV, offA = harmonic_offsets
            aV, bV = (aV * np.cos(offV) + bV * np.sin(offV),
                      -aV * np.sin(offV) + bV * np.cos(offV))
            aA, bA = (aA * np.cos(offA) + bA * np.sin(offA),
                      -aA * np.sin(offA) + bA * np.cos(offA))
        self._Vpoly = _TrigPoly(L, kV, aV, bV)
        self._logapoly = _TrigPoly(L, kA, aA, bA)
        self.quad_nodes = quad_nodes

        if spec.normalize_V:
            x = np.arange(quad_nodes) * (L / quad_nodes)
            self.kappa = 0.5 * float(np.log(np.mean(np.exp(-2.0 * self._Vpoly(x)))))
        else:
            self.kappa = 0.0

    # pointwise fields ----------------------------------------------------

    def V(self, x):
        return self._Vpoly(np.asarray(x, dtype=float) + self.phase) + self.kappa

    def DV(self, x):
        return self._Vpoly.deriv(np.asarray(x, dtype=float) + self.phase)

    def a(self, x):
        return np.exp(self._logapoly(np.asarray(x, dtype=float) + self.phase))

    def Da(self, x):
        xx = np.asarray(x, dtype=float) + self.phase
        return np.exp(self._logapoly(xx)) * self._logapoly.deriv(xx)

    def b(self, x):
        f = self.eval_fields(x)
        return f.b

    def eval_fields(self, x) -> Fields:
        xx = np.asarray(x, dtype=float) + self.phase
        V = self._Vpoly(xx) + self.kappa
        DV = self._Vpoly.deriv(xx)
        a = np.exp(self._logapoly(xx))
        Da = a * self._logapoly.deriv(xx)
        b = 0.5 * Da - a * DV
        return Fields(V, DV, a, Da, b)

    def shifted(self, y):
        """The realization seen from y: evaluation at x equals self at x + y."""
        return MediumRealization.__new_from(self, (self.phase + y) % self.spec.period)

    @classmethod
    def __new_from(cls, other, phase):
        obj = cls.__new__(cls)
        obj.spec = other.spec
        obj.phase = phase
        obj._Vpoly = other._Vpoly
        obj._logapoly = other._logapoly
        obj.quad_nodes = other.quad_nodes
        obj.kappa = other.kappa
        return obj

    # period grids --------------------------------------------------------

    def grid(self, n=None):
        n = n or self.quad_nodes
        return np.arange(n) * (self.spec.period / n)

    def field_tables(self, n=None):
        """All fields on a uniform period grid, for fast interpolation."""
        x = self.grid(n)
        f = self.eval_fields(x - self.phase)  # tables indexed by absolute profile position
        return x, f


def make_medium(spec: MediumSpec, seed: int,
                quad_nodes: int = DEFAULT_QUAD_NODES) -> MediumRealization:
    """Sample a realization: uniform phase from the seeded stream."""
    gen = rng.substream(seed, rng.PHASE)
    phase = gen.uniform(0.0, spec.period)
    offsets = None
    if spec.independent_phases:
        offsets = (gen.uniform(0, 2 * np.pi, size=len(spec.fourier_V)),
                   gen.uniform(0, 2 * np.pi, size=len(spec.fourier_loga)))
    return MediumRealization(spec, phase, harmonic_offsets=offsets, quad_nodes=quad_nodes)


def realization(spec: MediumSpec, phase: float = 0.0,
                quad_nodes: int = DEFAULT_QUAD_NODES) -> MediumRealization:
    """Deterministic realization at a given phase (oracle entry point)."""
    return MediumRealization(spec, phase, quad_nodes=quad_nodes)


def cosine_profile_log_coeffs(amplitude: float, n_modes: int = 30):
    """Fourier coefficients of log(1 + amplitude cos(2 pi x / L)).

    Writing 1 + beta cos t = s (1 + rho e^{it})(1 + rho e^{-it}) with
    rho/(1 + rho^2) = beta/2 gives the geometric expansion
    log s + 2 sum_k (-1)^{k+1} rho^k cos(kt) / k, so a field whose log is a
    short trig polynomial represents the profile to near machine precision.
    The constant log s rides along as the k = 0 harmonic.
    """
    beta = float(amplitude)
    if not -1.0 < beta < 1.0:
        raise ValueError("amplitude must lie in (-1, 1)")
    if beta == 0.0:
        return ()
    rho = (1.0 - float(np.sqrt(1.0 - beta * beta))) / beta
    s = 1.0 / (1.0 + rho * rho)
    coeffs = [(0, float(np.log(s)), 0.0)]
    coeffs += [(k, 2.0 * (-1.0) ** (k + 1) * rho ** k / k, 0.0)
               for k in range(1, n_modes + 1)]
    return tuple(coeffs)


def average(m, f: Callable[[Fields], np.ndarray], measure: str = "mu",
            n_nodes: int = DEFAULT_QUAD_NODES) -> float:
    """Exact environment expectation by one-period trapezoid quadrature.

    ``m`` may be a MediumSpec or a MediumRealization; the result does not
    depend on the phase.  measure "pi" weights the integrand by e^{-2V}.
    """
    if isinstance(m, MediumSpec):
        m = realization(m, 0.0, quad_nodes=n_nodes)
    x = np.arange(n_nodes) * (m.spec.period / n_nodes)
    fields = m.eval_fields(x)
    vals = np.asarray(f(fields), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = x[~np.isfinite(np.atleast_1d(vals))][:1]
        raise ValueError(f"non-finite integrand sample near x = {bad}")
    if measure == "pi":
        w = np.exp(-2.0 * fields.V)
        return float(np.mean(vals * w))
    if measure == "mu":
        return float(np.mean(vals))
    raise ValueError(f"unknown measure {measure!r}")


def pi_phase_sampler(m: MediumRealization, n_table: int = 4096):
    """Inverse-CDF sampler for a phase distributed like pi (density ~ e^{-2V})."""
    L = m.spec.period
    x = np.arange(n_table + 1) * (L / n_table)
    w = np.exp(-2.0 * m.V(x - m.phase))  # profile weights at absolute positions
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]))])
    cdf /= cdf[-1]

    def sample(gen, size=None):
        u = gen.uniform(size=size)
        return np.interp(u, cdf, x)

    return sample


# ---------------------------------------------------------------------------
# hypothesis validation

@dataclass
class ValidationEntry:
    name: str
    passed: bool
    constants: dict = field(default_factory=dict)
    detail: str = ""


@dataclass
class ValidationReport:
    entries: list

    @property
    def all_passed(self):
        return all(e.passed for e in self.entries)

    def to_json(self):
        return [
            {"hypothesis": e.name, "passed": e.passed,
             "constants": e.constants, "detail": e.detail}
            for e in self.entries
        ]

    def __getitem__(self, name):
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)


def validate_assumptions(m: MediumRealization, kernel=None,
                         n_grid: int = 10 ** 4) -> ValidationReport:
    """Check the standing hypotheses on a realization (and optionally a kernel).

    Failures become report entries, never exceptions.
    """
    entries = []
    x = np.arange(n_grid) * (m.spec.period / n_grid)
    f = m.eval_fields(x)

    a_min, a_max = float(f.a.min()), float(f.a.max())
    M_a = max(a_max, 1.0 / a_min)
    entries.append(ValidationEntry(
        "ellipticity_a", np.isfinite(M_a),
        {"M": M_a, "a_min": a_min, "a_max": a_max}))

    # smoothness proxy: analytic derivatives agree with central differences
    h = 1e-6 * m.spec.period
    dv_fd = (m.V(x + h) - m.V(x - h)) / (2 * h)
    da_fd = (m.a(x + h) - m.a(x - h)) / (2 * h)
    scale_v = max(1.0, float(np.max(np.abs(f.DV))))
    scale_a = max(1.0, float(np.max(np.abs(f.Da))))
    res = max(float(np.max(np.abs(dv_fd - f.DV))) / scale_v,
              float(np.max(np.abs(da_fd - f.Da))) / scale_a)
    entries.append(ValidationEntry(
        "smooth_fields", res < 1e-5, {"fd_residual": res}))

    # normalization of the pi weight
    wmean = float(np.mean(np.exp(-2.0 * f.V)))
    entries.append(ValidationEntry(
        "pi_normalization",
        (abs(wmean - 1.0) < 1e-8) if m.spec.normalize_V else True,
        {"mean_exp_m2V": wmean}))

    if kernel is not None:
        entries.extend(kernel.validation_entries(m, x))

    return ValidationReport(entries)
