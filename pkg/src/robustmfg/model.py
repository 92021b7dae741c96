"""Problem data for the robust ergodic mean-field game solver.

A problem instance bundles a one-dimensional controlled diffusion on (0, oo)
(drift b, volatility sigma), a proportional control cost c, a running profit
pi(x, theta) depending on the mean-field parameter theta, the interaction
pair (f, F) defining the consistency map, and the ambiguity level epsilon.

The central scalar object is the landmark function

    ell(x, theta) = -b(x) c(x) + pi(x, theta)
                    - 0.5 sigma^2(x) (eps c^2(x) + c'(x)),

whose maximiser x_hat and the first point x_hat_lower >= x_hat where ell
returns to its value at 0 bracket the reflection boundary of the optimal
policy.  This module locates those landmarks, evaluates the classical scale
density / speed measure of the uncontrolled diffusion, validates the
standing assumptions on sample grids, and builds the resource-extraction
and logistic benchmark models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

__all__ = [
    "ScalarField",
    "DiffusionSpec",
    "CostSpec",
    "ProfitSpec",
    "InteractionSpec",
    "ProblemSpec",
    "CaseStudyParams",
    "SolverSettings",
    "EllLandmarks",
    "ValidationEntry",
    "ValidationReport",
    "ModelError",
    "NoSignChange",
    "UnboundedSearch",
    "QuadratureError",
    "build_extraction_model",
    "build_logistic_model",
    "robust_problem",
    "eval_ell",
    "eval_ell_x",
    "eval_ell_robust",
    "find_landmarks",
    "find_robust_landmarks",
    "scale_density",
    "speed_measure",
    "validate_assumptions",
    "load_config",
]

# Default tolerances (overridable through SolverSettings / keyword args).
TOL_ROOT = 1e-10          # absolute x-tolerance for landmark bisection
X_MIN_REL = 1e-8          # domain floor relative to x_hat, for limits at 0
FD_STEP = 1e-5            # central-difference step scale: h = FD_STEP*(1+|x|)


class ModelError(RuntimeError):
    """Base class for solver errors raised by this package."""


class NoSignChange(ModelError):
    """A bracketing search found no sign change on the allowed interval."""


class UnboundedSearch(ModelError):
    """Geometric bracket expansion hit its cap without finding a root."""


class QuadratureError(ModelError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float, achieved: float, requested: float):
        super().__init__(f"{message} (estimate={estimate:.6g}, achieved error="
                         f"{achieved:.3g}, requested={requested:.3g})")
        self.estimate = estimate
        self.achieved = achieved
        self.requested = requested


@dataclass(frozen=True)
class ScalarField:
    """A scalar function of the state with an optional analytic derivative.

    ``value`` must accept floats and numpy arrays.  When ``derivative`` is
    None, a central difference with step h = 1e-5*(1+|x|) is used.
    """

    value: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x):
        return self.value(x)

    def d(self, x):
        if self.derivative is not None:
            return self.derivative(x)
        x = np.asarray(x, dtype=float)
        h = FD_STEP * (1.0 + np.abs(x))
        return (self.value(x + h) - self.value(x - h)) / (2.0 * h)


@dataclass(frozen=True)
class DiffusionSpec:
    b: ScalarField                 # drift, state/time
    sigma: ScalarField             # volatility, state/sqrt(time); > 0 on (0, oo)
    growth_exponent: float = 1.0   # zeta in |b| + |sigma| <= C (1 + x^zeta)


@dataclass(frozen=True)
class CostSpec:
    c: ScalarField                 # proportional control cost, nonincreasing
    c_lo: float                    # lower bound of c (>= 0; > 0 under the assumptions)
    c_hi: float                    # upper bound of c


@dataclass(frozen=True)
class ProfitSpec:
    pi: Callable[[np.ndarray, float], np.ndarray]
    pi_x: Callable[[np.ndarray, float], np.ndarray]
    pi_xtheta: Callable[[np.ndarray, float], np.ndarray]
    kappa: ScalarField             # robust limit of pi as theta -> oo
    lipschitz_delta: float         # growth exponent delta in (0,1)
    lipschitz_C: float             # Lipschitz-in-theta constant on the working range


@dataclass(frozen=True)
class InteractionSpec:
    f: ScalarField                 # moment test function, strictly increasing
    F: ScalarField                 # aggregator, strictly increasing
    delta: float


@dataclass(frozen=True)
class ProblemSpec:
    """Full game data.  Immutable; safe to share across threads."""

    diffusion: DiffusionSpec
    cost: CostSpec
    profit: ProfitSpec
    interaction: InteractionSpec
    epsilon: float                 # ambiguity level, > 0
    x_min: float = 1e-10           # numerical truncation of the state space near 0
    state_scale: float = 1.0       # characteristic state magnitude (search cap scale)
    model_tag: str = "custom"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.x_min > 0:
            raise ValueError(f"x_min must be positive, got {self.x_min}")


@dataclass(frozen=True)
class CaseStudyParams:
    """Parameters of the natural-resource extraction benchmark."""

    kappa: float = 1.0
    alpha: float = 1.0
    sigma: float = 1.0
    eta: float = 1.0
    cost: float = 1.0
    delta: float = 0.6
    epsilon: float = 1.0

    def __post_init__(self):
        for name in ("kappa", "alpha", "sigma", "eta", "cost", "epsilon"):
            v = getattr(self, name)
            if not v > 0:
                raise ValueError(f"{name} must be strictly positive, got {v}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True)
class SolverSettings:
    """Numerical knobs exposed through the configuration file."""

    x_min_rel: float = X_MIN_REL
    tol_root: float = TOL_ROOT


@dataclass(frozen=True)
class EllLandmarks:
    """Critical points of ell(., theta): maximiser and return-to-ell(0) point."""

    theta: float
    xhat: float          # unique maximiser of ell(., theta)
    xhat_lower: float    # first x >= xhat with ell(x) = ell(0)
    ell_at_zero: float


# ---------------------------------------------------------------------------
# Benchmark model builders
# ---------------------------------------------------------------------------

def build_extraction_model(params: CaseStudyParams) -> ProblemSpec:
    """Resource-extraction benchmark: mean-reverting stock, power profit.

    b(x) = alpha (kappa - x), sigma(x) = sigma x, c constant,
    pi(x, theta) = x^delta (theta^-(1+delta) + eta), f(x) = x^delta,
    F(x) = x^(1/delta); the robust profit limit is eta x^delta.
    """
    k, a, s = params.kappa, params.alpha, params.sigma
    eta, c0, d, eps = params.eta, params.cost, params.delta, params.epsilon

    diffusion = DiffusionSpec(
        b=ScalarField(lambda x: a * (k - np.asarray(x, dtype=float)),
                      lambda x: np.full_like(np.asarray(x, dtype=float), -a)),
        sigma=ScalarField(lambda x: s * np.asarray(x, dtype=float),
                          lambda x: np.full_like(np.asarray(x, dtype=float), s)),
        growth_exponent=1.0,
    )
    cost = CostSpec(
        c=ScalarField(lambda x: np.full_like(np.asarray(x, dtype=float), c0),
                      lambda x: np.zeros_like(np.asarray(x, dtype=float))),
        c_lo=c0, c_hi=c0,
    )

    def pi(x, theta):
        return np.asarray(x, dtype=float) ** d * (theta ** (-(1.0 + d)) + eta)

    def pi_x(x, theta):
        return d * np.asarray(x, dtype=float) ** (d - 1.0) * (theta ** (-(1.0 + d)) + eta)

    def pi_xtheta(x, theta):
        return -d * (1.0 + d) * np.asarray(x, dtype=float) ** (d - 1.0) * theta ** (-(2.0 + d))

    profit = ProfitSpec(
        pi=pi, pi_x=pi_x, pi_xtheta=pi_xtheta,
        kappa=ScalarField(lambda x: eta * np.asarray(x, dtype=float) ** d,
                          lambda x: eta * d * np.asarray(x, dtype=float) ** (d - 1.0)),
        lipschitz_delta=d,
        # |pi(x,t2)-pi(x,t1)| <= (1+d) theta_min^-(2+d) (1+x^d)|t2-t1|; sized
        # for theta >= 0.3, the working range of the benchmark bracket.
        lipschitz_C=(1.0 + d) * 0.3 ** (-(2.0 + d)),
    )
    interaction = InteractionSpec(
        f=ScalarField(lambda x: np.asarray(x, dtype=float) ** d,
                      lambda x: d * np.asarray(x, dtype=float) ** (d - 1.0)),
        F=ScalarField(lambda x: np.asarray(x, dtype=float) ** (1.0 / d),
                      lambda x: (1.0 / d) * np.asarray(x, dtype=float) ** (1.0 / d - 1.0)),
        delta=d,
    )
    return ProblemSpec(diffusion=diffusion, cost=cost, profit=profit,
                       interaction=interaction, epsilon=eps,
                       x_min=X_MIN_REL * k, state_scale=k, model_tag="extraction")


def build_logistic_model(params: CaseStudyParams) -> ProblemSpec:
    """Verhulst-Pearl variant: b(x) = x (kappa - alpha x), sigma(x) = sigma x.

    Kept as a validator benchmark: the landmark structure requires
    2 alpha - eps sigma^2 c < 0, which validate_assumptions checks.
    """
    base = build_extraction_model(params)
    k, a, s = params.kappa, params.alpha, params.sigma
    diffusion = DiffusionSpec(
        b=ScalarField(lambda x: np.asarray(x, dtype=float) * (k - a * np.asarray(x, dtype=float)),
                      lambda x: k - 2.0 * a * np.asarray(x, dtype=float)),
        sigma=ScalarField(lambda x: s * np.asarray(x, dtype=float),
                          lambda x: np.full_like(np.asarray(x, dtype=float), s)),
        growth_exponent=2.0,
    )
    return replace(base, diffusion=diffusion, state_scale=k / a, model_tag="logistic")


def robust_problem(spec: ProblemSpec) -> ProblemSpec:
    """The theta-free worst-case problem: profit replaced by its robust limit."""
    kappa = spec.profit.kappa

    def pi(x, theta):
        return kappa.value(x)

    def pi_x(x, theta):
        return kappa.d(x)

    def pi_xtheta(x, theta):
        return np.zeros_like(np.asarray(x, dtype=float))

    profit = replace(spec.profit, pi=pi, pi_x=pi_x, pi_xtheta=pi_xtheta)
    return replace(spec, profit=profit, model_tag=spec.model_tag + "+robust")


# ---------------------------------------------------------------------------
# Landmark function
# ---------------------------------------------------------------------------

def eval_ell(spec: ProblemSpec, x, theta: float):
    """Pointwise landmark function ell(x, theta)."""
    x = np.asarray(x, dtype=float)
    b = spec.diffusion.b(x)
    sig2 = spec.diffusion.sigma(x) ** 2
    c = spec.cost.c(x)
    cx = spec.cost.c.d(x)
    return -b * c + spec.profit.pi(x, theta) - 0.5 * sig2 * (spec.epsilon * c * c + cx)


def eval_ell_robust(spec: ProblemSpec, x):
    """Landmark function of the robust problem (profit replaced by kappa)."""
    x = np.asarray(x, dtype=float)
    b = spec.diffusion.b(x)
    sig2 = spec.diffusion.sigma(x) ** 2
    c = spec.cost.c(x)
    cx = spec.cost.c.d(x)
    return -b * c + spec.profit.kappa(x) - 0.5 * sig2 * (spec.epsilon * c * c + cx)


def eval_ell_x(spec: ProblemSpec, x, theta: float):
    """d ell/dx by central differences (c'' has no analytic handle)."""
    x = np.asarray(x, dtype=float)
    h = FD_STEP * (1.0 + np.abs(x))
    h = np.minimum(h, 0.5 * x)  # stay inside (0, oo)
    return (eval_ell(spec, x + h, theta) - eval_ell(spec, x - h, theta)) / (2.0 * h)


def _bisect(fn, lo, hi, flo, tol, max_iter=200):
    """Plain bisection on a sign change; returns the midpoint at tolerance."""
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ell_at_zero(spec: ProblemSpec, theta: float, x_ref: float,
                ell_fn=None, tol: float = 1e-8) -> float:
    """ell(0+, theta): evaluate at the domain floor, halving until stable.

    Profits with a power tail (x^delta) converge slowly, so a single
    halving check at x_min is not enough; we keep halving until two
    successive evaluations agree to `tol` relative.
    """
    ell_fn = ell_fn or (lambda x: float(eval_ell(spec, x, theta)))
    x0 = min(spec.x_min, X_MIN_REL * x_ref)
    v1 = ell_fn(x0)
    for _ in range(600):
        x0 *= 0.5
        v2 = ell_fn(x0)
        if not (math.isfinite(v1) and math.isfinite(v2)):
            break
        if abs(v1 - v2) <= tol * (1.0 + abs(v2)):
            return v2
        v1 = v2
    raise UnboundedSearch(
        f"ell(0+, theta={theta}) did not stabilise near 0: last "
        f"ell({x0:.3g})={v1!r}")


def _find_landmarks(spec: ProblemSpec, theta: float, ell_fn, ellx_fn,
                    tol_root: float) -> EllLandmarks:
    x_max_search = 100.0 * max(spec.state_scale, 1.0)

    # Maximiser: sign change of ell_x located by grid scan + bisection.
    grid = np.geomspace(max(spec.x_min, 1e-6 * spec.state_scale), x_max_search, 400)
    vals = np.array([ellx_fn(x) for x in grid])
    idx = np.nonzero((vals[:-1] > 0) & (vals[1:] <= 0))[0]
    if idx.size == 0:
        raise NoSignChange(
            f"ell_x(., theta={theta}) has no +/- sign change on "
            f"[{grid[0]:.3g}, {x_max_search:.3g}]; the landmark structure fails")
    i = idx[0]
    xhat = _bisect(ellx_fn, grid[i], grid[i + 1], vals[i], tol_root)

    ell0 = ell_at_zero(spec, theta, x_ref=xhat, ell_fn=ell_fn)

    # Return point: root of ell - ell(0) on (xhat, oo) by geometric expansion.
    g = lambda x: ell_fn(x) - ell0
    lo = xhat
    glo = g(lo)
    if glo <= 0.0:
        # The maximum itself does not exceed ell(0); degenerate but allowed.
        return EllLandmarks(theta=theta, xhat=xhat, xhat_lower=xhat, ell_at_zero=ell0)
    hi = 2.0 * xhat
    while g(hi) > 0.0:
        hi *= 2.0
        if hi > x_max_search:
            raise UnboundedSearch(
                f"ell(., theta={theta}) never returns to ell(0)={ell0:.6g} "
                f"below x={x_max_search:.3g}")
    xhat_lower = _bisect(g, max(lo, hi / 2.0), hi, g(max(lo, hi / 2.0)), tol_root)
    return EllLandmarks(theta=theta, xhat=xhat, xhat_lower=xhat_lower, ell_at_zero=ell0)


def find_landmarks(spec: ProblemSpec, theta: float,
                   tol_root: float = TOL_ROOT) -> EllLandmarks:
    """Locate x_hat (maximiser of ell) and x_hat_lower (return to ell(0))."""
    ell_fn = lambda x: float(eval_ell(spec, x, theta))
    ellx_fn = lambda x: float(eval_ell_x(spec, x, theta))
    return _find_landmarks(spec, theta, ell_fn, ellx_fn, tol_root)


def find_robust_landmarks(spec: ProblemSpec,
                          tol_root: float = TOL_ROOT) -> EllLandmarks:
    """Landmarks of the robust landmark function ell_lower (theta-free)."""
    ell_fn = lambda x: float(eval_ell_robust(spec, x))

    def ellx_fn(x):
        h = FD_STEP * (1.0 + abs(x))
        h = min(h, 0.5 * x)
        return float((eval_ell_robust(spec, x + h) - eval_ell_robust(spec, x - h)) / (2 * h))

    return _find_landmarks(spec, theta=math.inf, ell_fn=ell_fn, ellx_fn=ellx_fn,
                           tol_root=tol_root)


# ---------------------------------------------------------------------------
# Scale density and speed measure of the uncontrolled diffusion
# ---------------------------------------------------------------------------

def _quad(fn, a, b, epsabs=1e-12, epsrel=1e-10, what="integral"):
    val, err = quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=300)
    if err > max(epsabs, epsrel * abs(val)) * 100.0:
        raise QuadratureError(f"{what} quadrature did not converge", val, err,
                              max(epsabs, epsrel * abs(val)))
    return val


def scale_density(spec: ProblemSpec, x: float, x0: float) -> float:
    """S'(x) = exp(-int_{x0}^x 2 b / sigma^2 dy), the scale density."""
    integrand = lambda y: 2.0 * float(spec.diffusion.b(y)) / float(spec.diffusion.sigma(y)) ** 2
    return math.exp(-_quad(integrand, x0, x, what="scale exponent"))


def speed_measure(spec: ProblemSpec, a: float, b: float) -> float:
    """m((a, b)) = int_a^b 2 / (sigma^2 S') dy, scale referenced at b.

    With the reference at the upper endpoint the integrand decays near an
    inaccessible boundary at 0, so the limit a -> 0 is finite exactly when
    the diffusion cannot reach 0.
    """
    if not 0.0 < a <= b:
        raise ValueError(f"need 0 < a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    drift_ratio = lambda y: 2.0 * float(spec.diffusion.b(y)) / float(spec.diffusion.sigma(y)) ** 2

    def integrand(y):
        expo = -_quad(drift_ratio, y, b, what="scale exponent")
        return 2.0 / float(spec.diffusion.sigma(y)) ** 2 * math.exp(expo)

    val = _quad(integrand, a, b, epsabs=1e-12, epsrel=1e-9, what="speed measure")
    return max(val, 0.0)


# ---------------------------------------------------------------------------
# Assumption validation (advisory, never raises on failures)
# ---------------------------------------------------------------------------

@dataclass
class ValidationEntry:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)

    def add(self, name, passed, detail=""):
        self.entries.append(ValidationEntry(name, bool(passed), detail))

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failed(self):
        return [e for e in self.entries if not e.passed]


def validate_assumptions(spec: ProblemSpec, theta_grid=None, x_grid=None) -> ValidationReport:
    """Check the standing assumptions on sample grids.  Advisory only."""
    report = ValidationReport()
    if theta_grid is None:
        theta_grid = np.array([0.5, 1.0, 2.0, 4.0])
    if x_grid is None:
        x_grid = np.geomspace(1e-3 * spec.state_scale, 20.0 * spec.state_scale, 200)
    theta_grid = np.asarray(theta_grid, dtype=float)
    x_grid = np.asarray(x_grid, dtype=float)

    b, sig, c = spec.diffusion.b, spec.diffusion.sigma, spec.cost.c

    # Assumption 2.1: smooth coefficients with polynomial growth.
    sig_vals = sig(x_grid)
    report.add("diffusion.sigma_positive", np.all(sig_vals > 0),
               f"min sigma = {np.min(sig_vals):.3g}")
    growth = (np.abs(b(x_grid)) + np.abs(sig_vals)) / (1.0 + x_grid ** spec.diffusion.growth_exponent)
    report.add("diffusion.growth_bound", np.all(np.isfinite(growth)),
               f"max growth ratio C = {np.max(growth):.3g}")
    for name, fld in (("b", b), ("sigma", sig), ("cost", c)):
        if fld.derivative is not None:
            ana = fld.derivative(x_grid)
            num = (fld.value(x_grid + FD_STEP * (1 + x_grid))
                   - fld.value(x_grid - FD_STEP * (1 + x_grid))) / (2 * FD_STEP * (1 + x_grid))
            ok = np.all(np.abs(ana - num) <= 1e-6 * (1.0 + np.abs(ana)))
            report.add(f"derivative_consistency.{name}", ok,
                       f"max deviation {np.max(np.abs(ana - num)):.3g}")

    # Assumption 2.2: the speed measure stabilises as the inner endpoint -> 0.
    try:
        probe = float(np.median(x_grid))
        ms = [speed_measure(spec, x0, probe) for x0 in (1e-2, 1e-4, 1e-6)]
        stab = abs(ms[1] - ms[2]) <= 1e-6 * (1.0 + abs(ms[2]))
        report.add("speed_measure_finite_at_zero", stab,
                   f"m((x0,{probe:.3g})) for x0=1e-2,1e-4,1e-6: "
                   + ", ".join(f"{m:.8g}" for m in ms))
    except (QuadratureError, OverflowError) as exc:
        report.add("speed_measure_finite_at_zero", False, str(exc))

    # Assumption 2.4: cost bounded, nonincreasing; profit monotone concave,
    # with strictly negative cross-derivative.
    c_vals = c(x_grid)
    report.add("cost.bounded", np.all((c_vals >= spec.cost.c_lo - 1e-12)
                                      & (c_vals <= spec.cost.c_hi + 1e-12)),
               f"range [{np.min(c_vals):.3g}, {np.max(c_vals):.3g}]")
    report.add("cost.nonincreasing", np.all(np.diff(c_vals) <= 1e-12),
               f"max increment {np.max(np.diff(c_vals)):.3g}")
    ok_mono, ok_conc, ok_cross = True, True, True
    for theta in theta_grid:
        p = spec.profit.pi(x_grid, float(theta))
        px = spec.profit.pi_x(x_grid, float(theta))
        slopes = np.diff(p) / np.diff(x_grid)
        ok_mono &= bool(np.all(px >= -1e-12))
        ok_conc &= bool(np.all(np.diff(slopes) <= 1e-10))
        ok_cross &= bool(np.all(spec.profit.pi_xtheta(x_grid, float(theta)) < 0))
    report.add("profit.nondecreasing", ok_mono)
    report.add("profit.concave", ok_conc)
    report.add("profit.cross_derivative_negative", ok_cross)

    # Assumption 2.6: interaction functions strictly increasing with growth.
    f_vals, F_vals = spec.interaction.f(x_grid), spec.interaction.F(x_grid)
    report.add("interaction.strictly_increasing",
               np.all(np.diff(f_vals) > 0) and np.all(np.diff(F_vals) > 0))
    d = spec.interaction.delta
    gf = np.max(np.abs(f_vals) / (1.0 + x_grid ** d))
    gF = np.max(np.abs(F_vals) / (1.0 + x_grid ** (1.0 / d)))
    report.add("interaction.growth_bound", math.isfinite(gf) and math.isfinite(gF),
               f"C_f={gf:.3g}, C_F={gF:.3g}")

    # Landmark structure (Assumption 3.1) per sampled theta.
    for theta in theta_grid:
        try:
            lm = find_landmarks(spec, float(theta))
            below = x_grid[(x_grid > spec.x_min) & (x_grid < lm.xhat * 0.999)]
            above = x_grid[(x_grid > lm.xhat * 1.001) & (x_grid <= lm.xhat_lower)]
            ok = (np.all(eval_ell_x(spec, below, float(theta)) > 0) if below.size else True) \
                and (np.all(eval_ell_x(spec, above, float(theta)) < 0) if above.size else True)
            report.add(f"landmarks.theta={theta:g}", ok,
                       f"xhat={lm.xhat:.6g}, xhat_lower={lm.xhat_lower:.6g}")
        except ModelError as exc:
            report.add(f"landmarks.theta={theta:g}", False, str(exc))
    if spec.model_tag.startswith("logistic"):
        # Necessary condition for the logistic benchmark's landmark structure.
        x_big = x_grid[-1]
        alpha_eff = -float(spec.diffusion.b.d(x_big)) / 2.0 if False else None
        # For b(x) = x(kappa - alpha x): b'(x) = kappa - 2 alpha x, so
        # alpha = -(b'(x) - kappa)/(2x) is awkward to recover; use quadratic fit.
        xs = np.array([1.0, 2.0]) * spec.state_scale
        bs = spec.diffusion.b(xs)
        # b(x)/x = kappa - alpha x  =>  linear fit.
        coef = np.polyfit(xs, bs / xs, 1)
        alpha_fit, kappa_fit = -coef[0], coef[1]
        cond = 2.0 * alpha_fit - spec.epsilon * float(spec.diffusion.sigma(1.0)) ** 2 \
            * float(spec.cost.c(x_big))
        report.add("landmarks.logistic_condition", cond < 0,
                   f"2*alpha - eps*sigma^2*c = {cond:.6g} (must be < 0)")

    # Robust profit limit (Assumption 4.1): monotone convergence and Lipschitz.
    kap = spec.profit.kappa(x_grid)
    thetas_up = np.array([1.0, 4.0, 16.0, 64.0, 256.0])
    pis = np.array([spec.profit.pi(x_grid, float(t)) for t in thetas_up])
    mono = np.all(np.diff(pis, axis=0) <= 1e-10) and np.all(pis >= kap - 1e-10)
    conv = np.max(np.abs(pis[-1] - kap) / (1.0 + np.abs(kap)))
    report.add("profit.robust_limit", bool(mono) and conv < 1e-2,
               f"monotone={bool(mono)}, rel gap at theta=256: {conv:.3g}")
    C, dl = spec.profit.lipschitz_C, spec.profit.lipschitz_delta
    ok_lip = True
    worst = 0.0
    for t1, t2 in zip(theta_grid[:-1], theta_grid[1:]):
        ratio = np.max(np.abs(spec.profit.pi(x_grid, float(t2))
                              - spec.profit.pi(x_grid, float(t1)))
                       / ((1.0 + x_grid ** dl) * abs(t2 - t1)))
        worst = max(worst, float(ratio))
        ok_lip &= ratio <= C
    report.add("profit.theta_lipschitz", ok_lip,
               f"max ratio {worst:.3g} vs C={C:.3g}")
    return report


# ---------------------------------------------------------------------------
# Configuration file: line-oriented `key = value`
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {"model", "kappa", "alpha", "sigma", "eta", "cost", "delta",
                "epsilon", "x_min_rel", "tol_root"}


def load_config(path) -> tuple[ProblemSpec, CaseStudyParams, SolverSettings]:
    """Parse a `key = value` configuration file and build the model."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in values:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = val

    model = values.pop("model", "extraction")
    if model not in ("extraction", "logistic", "custom"):
        raise ValueError(f"unknown model {model!r}; expected extraction|logistic|custom")
    if model == "custom":
        raise ValueError("model = custom requires building a ProblemSpec through "
                         "the library API; the config file carries no function handles")

    settings = SolverSettings(
        x_min_rel=float(values.pop("x_min_rel", X_MIN_REL)),
        tol_root=float(values.pop("tol_root", TOL_ROOT)),
    )
    kwargs = {k: float(v) for k, v in values.items()}
    params = CaseStudyParams(**kwargs)
    builder = build_extraction_model if model == "extraction" else build_logistic_model
    spec = builder(params)
    spec = replace(spec, x_min=settings.x_min_rel * spec.state_scale)
    return spec, params, settings
