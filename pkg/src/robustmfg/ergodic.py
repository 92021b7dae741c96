"""Stationary distribution of the optimally reflected diffusion, and the
mean-field consistency map.

Under the worst-case measure the optimally controlled state has drift
b(x) - eps sigma^2(x) V_x(x, theta) and reflects at beta = beta_eps(theta);
its stationary density on (0, beta] is, up to normalisation,

    m(x) = (2 / sigma^2(x)) exp( -int_x^beta 2 b / sigma^2 dy
                                 + 2 eps int_x^beta V_x dy ).

With the V(beta) = 0 gauge the second integral is -V(x), so the exponent
is available directly from the integrated states of the boundary-value
solve.  Below the trusted grid of the backward solve the exponent is
continued by a forward pass of the same slope equation started on the
bounded Riccati branch: forward integration is contracting exactly where
the backward direction was expanding, so the continuation is stable and
the (exponentially small, but not always negligible) deep mass is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, solve_ivp

from .model import ModelError, ProblemSpec, ScalarField, eval_ell
from .shooting import FreeBoundarySolution, GridConfig, compute_beta, slow_manifold_phi

__all__ = [
    "QuadConfig",
    "StationaryDistribution",
    "NormalizationDiverged",
    "stationary_density",
    "moment",
    "consistency_map",
    "stationarity_residual",
]

TOL_QUAD = 1e-8


class NormalizationDiverged(ModelError):
    """The normalisation quadrature failed to stabilise (Assumption 2.2?)."""


@dataclass(frozen=True)
class QuadConfig:
    tol_quad: float = TOL_QUAD
    n_grid: int = 4096             # emitted grid size (log-spaced)


@dataclass
class StationaryDistribution:
    """Normalised stationary density on (0, beta], with cached moments."""

    theta: float
    beta: float
    grid: np.ndarray               # increasing, ends at beta
    density: np.ndarray
    cdf: np.ndarray
    norm_constant: float           # unnormalised mass nu((0, beta])
    below_mass: float              # estimated mass below grid[0] (reported, tiny)
    moment_cache: dict = field(default_factory=dict)
    _log_unnorm: Optional[Callable] = None   # x -> log unnormalised density
    _phi: Optional[np.ndarray] = None        # V_x on grid (for simulation)

    def density_at(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = (x >= self.grid[0]) & (x <= self.beta)
        if np.any(inside):
            out[inside] = np.exp(self._log_unnorm(x[inside])) / self.norm_constant
        return out

    def cdf_at(self, x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.grid, self.cdf, left=0.0, right=1.0)


def _forward_extension(spec: ProblemSpec, fbs: FreeBoundarySolution,
                       x_start: float, x_stop: float):
    """Continue (phi, exponent) below the trusted grid by a forward pass
    started on the bounded branch of the frozen Riccati quadratic."""
    theta, lam = fbs.theta, fbs.lam
    eps = spec.epsilon
    b_f, sig_f, pi_f = spec.diffusion.b, spec.diffusion.sigma, spec.profit.pi

    phi0 = float(slow_manifold_phi(spec, x_start, lam, theta))

    def rhs(x, y):
        phi = y[0]
        b = float(b_f(x))
        sig2 = float(sig_f(x)) ** 2
        dphi = (2.0 / sig2) * (lam - float(pi_f(x, theta)) - b * phi) + eps * phi * phi
        return (dphi, 2.0 * b / sig2 - 2.0 * eps * phi)

    sol = solve_ivp(rhs, (x_start, x_stop), (phi0, 0.0), method="RK45",
                    rtol=1e-11, atol=1e-13, dense_output=True)
    if sol.status != 0:
        raise NormalizationDiverged(
            f"forward continuation of the density exponent failed on "
            f"[{x_start:.3g}, {x_stop:.3g}]: {sol.message}")
    return sol.sol   # components: (phi, E2) with E2(x) = int_{x_start}^x (2b/sig^2 - 2 eps phi)


def stationary_density(spec: ProblemSpec, fbs: FreeBoundarySolution,
                       quad_cfg: Optional[QuadConfig] = None) -> StationaryDistribution:
    """Closed-form stationary density of the reflected worst-case diffusion."""
    cfg = quad_cfg or QuadConfig()
    beta, theta = fbs.beta_star, fbs.theta
    bvp = fbs.bvp
    grid_lo = float(bvp.grid[0])
    eps = spec.epsilon
    sig_f = spec.diffusion.sigma

    dense = bvp._dense   # components: phi, V, Ib (riccati_direct)

    def log_h_trusted(x):
        vals = dense(np.asarray(x, dtype=float))
        V, Ib = vals[1], vals[2]
        sig2 = np.asarray(sig_f(x), dtype=float) ** 2
        return np.log(2.0 / sig2) + (-Ib - 2.0 * eps * V)

    # Extend below the trusted grid when the solve was stability-truncated.
    ext = None
    x_dens = grid_lo
    if bvp.truncated:
        x_start = max(spec.x_min, grid_lo / 8.0)
        if x_start < grid_lo:
            ext = _forward_extension(spec, fbs, x_start, grid_lo)
            E_lo = float(-dense(grid_lo)[2] - 2.0 * eps * dense(grid_lo)[1])
            E2_lo = float(ext(grid_lo)[1])
            x_dens = x_start

            def log_h_ext(x):
                x = np.asarray(x, dtype=float)
                E2 = ext(x)[1]
                sig2 = np.asarray(sig_f(x), dtype=float) ** 2
                return np.log(2.0 / sig2) + (E_lo - (E2_lo - E2))

    def log_h(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        hi = x >= grid_lo
        if np.any(hi):
            out[hi] = log_h_trusted(x[hi])
        if np.any(~hi):
            out[~hi] = log_h_ext(x[~hi]) if ext is not None else -np.inf
        return out

    h = lambda x: np.exp(log_h(x))

    pieces = [(x_dens, grid_lo), (grid_lo, beta)] if x_dens < grid_lo else [(grid_lo, beta)]
    norm = 0.0
    err = 0.0
    for a, b in pieces:
        v, e = quad(lambda x: float(h(x)), a, b, epsabs=1e-14, epsrel=1e-11, limit=400)
        norm += v
        err += e
    if not (norm > 0.0 and math.isfinite(norm)) or err > cfg.tol_quad * norm:
        raise NormalizationDiverged(
            f"density normalisation did not stabilise: mass={norm}, "
            f"quadrature error={err:.3g}")

    # Mass below the emitted grid: bounded by width * density at the edge.
    below_mass = 0.0
    if x_dens > spec.x_min:
        below_mass = float(h(x_dens)) * x_dens / norm

    grid = np.geomspace(x_dens, beta, cfg.n_grid)
    grid[-1] = beta
    dens = h(grid) / norm
    cdf = np.concatenate([[0.0], cumulative_trapezoid(dens, grid)]) + below_mass
    cdf = np.clip(cdf, 0.0, 1.0)

    phi_grid = np.empty_like(grid)
    hi = grid >= grid_lo
    phi_grid[hi] = bvp.phi_at(grid[hi])
    if np.any(~hi) and ext is not None:
        phi_grid[~hi] = ext(grid[~hi])[0]

    return StationaryDistribution(theta=theta, beta=beta, grid=grid,
                                  density=dens, cdf=cdf, norm_constant=norm,
                                  below_mass=below_mass,
                                  _log_unnorm=log_h, _phi=phi_grid)


def moment(dist: StationaryDistribution, g, tag: Optional[str] = None) -> float:
    """Integral of g against the stationary law, cached by tag."""
    if tag is not None and tag in dist.moment_cache:
        return dist.moment_cache[tag]
    g_fn = g.value if isinstance(g, ScalarField) else g
    val, err = quad(lambda x: float(g_fn(x)) * float(dist.density_at(x)),
                    dist.grid[0], dist.beta, epsabs=1e-13, epsrel=1e-10, limit=400)
    if err > 1e-6 * (1.0 + abs(val)):
        raise NormalizationDiverged(
            f"moment quadrature did not stabilise: value={val}, error={err:.3g}")
    if tag is not None:
        dist.moment_cache[tag] = val
    return val


def consistency_map(spec: ProblemSpec, theta: float,
                    grid_cfg: Optional[GridConfig] = None,
                    quad_cfg: Optional[QuadConfig] = None,
                    tol_beta: Optional[float] = None,
                    landmarks=None, bracket=None,
                    _detail: bool = False):
    """The operator T: compute the boundary, the stationary law, and the
    aggregated moment F(<f, nu>)."""
    kwargs = {}
    if tol_beta is not None:
        kwargs["tol_beta"] = tol_beta
    fbs = compute_beta(spec, theta, grid_cfg, landmarks=landmarks,
                       bracket=bracket, **kwargs)
    dist = stationary_density(spec, fbs, quad_cfg)
    mom = moment(dist, spec.interaction.f, tag="f")
    t_val = float(spec.interaction.F(mom))
    if _detail:
        return t_val, fbs, dist
    return t_val


def stationarity_residual(spec: ProblemSpec, fbs: FreeBoundarySolution,
                          dist: StationaryDistribution,
                          n_probe: int = 200) -> float:
    """Max residual of  d/dx[ sigma^2 m / 2 ] = (b - eps sigma^2 V_x) m
    at interior points, by central differences of the computed density."""
    beta = dist.beta
    lo = max(dist.grid[0] * 1.05, fbs.bvp.grid[0] * 1.01)
    xs = np.geomspace(lo, beta * 0.999, n_probe)
    h = 1e-5 * xs

    def flux(x):
        sig2 = np.asarray(spec.diffusion.sigma(x), dtype=float) ** 2
        return 0.5 * sig2 * dist.density_at(x)

    lhs = (flux(xs + h) - flux(xs - h)) / (2 * h)
    sig2 = np.asarray(spec.diffusion.sigma(xs), dtype=float) ** 2
    b = np.asarray(spec.diffusion.b(xs), dtype=float)
    vx = fbs.bvp.phi_at(xs)
    rhs = (b - spec.epsilon * sig2 * vx) * dist.density_at(xs)
    scale = 1.0 + np.abs(rhs)
    return float(np.max(np.abs(lhs - rhs) / scale))
