"""Full-information benchmark.

Everything here assumes the duration law and the mean reward are known:

* :func:`phi` and :func:`solve_c_star` give the optimal reward per unit of
  time ``c*``, the unique root of ``c -> lam E[(r(X) - c X)_+] - c``;
* :func:`baseline_decision` is the stationary policy that accepts exactly the
  tasks whose profitability ``r(x)/x`` is at least ``c*``;
* :func:`profit_rate` is the long-run reward rate of the policy accepting
  every task of duration at least ``s``;
* :func:`solve_value_function` integrates the dynamic-programming equation of
  the finite-horizon value function backwards from ``T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import optimize

from .env import (Affine, ConfigurationError, Discrete, DomainError, EnvironmentSpec,
                  Quadratic, Uniform)

ROOT_TOL = 1e-10
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


def _poly_coeffs(spec: EnvironmentSpec) -> np.ndarray:
    if not isinstance(spec.reward, (Affine, Quadratic)):
        raise ConfigurationError("continuous durations need an affine or quadratic reward")
    return np.asarray(spec.reward.coeffs, dtype=float)


def _integrate_poly(coeffs: np.ndarray, a: float, b: float) -> float:
    """Integral of a polynomial of degree <= 7 over [a, b] (Gauss-Legendre, exact)."""
    if b <= a:
        return 0.0
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    return half * float(np.dot(_GL_WEIGHTS, P.polyval(mid + half * _GL_NODES, coeffs)))


def positive_intervals(coeffs, a: float, b: float) -> list:
    """Maximal subintervals of [a, b] on which the polynomial is positive."""
    coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
    if coeffs.size == 0:
        return []
    cuts = [a, b]
    if coeffs.size > 1:
        for z in P.polyroots(coeffs):
            if abs(z.imag) < 1e-12 and a < z.real < b:
                cuts.append(float(z.real))
    cuts.sort()
    out = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi > lo and P.polyval(0.5 * (lo + hi), coeffs) > 0:
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
    return out


def expected_positive_part(spec: EnvironmentSpec, c: float) -> float:
    """E[(r(X) - c X)_+], exact for discrete laws and polynomial rewards."""
    dist = spec.duration
    if isinstance(dist, Discrete):
        x = np.asarray(dist.points)
        g = np.asarray(spec.reward(x), dtype=float) - c * x
        return float(np.dot(dist.probs, np.maximum(g, 0.0)))
    coeffs = _poly_coeffs(spec).copy()
    coeffs = np.pad(coeffs, (0, max(0, 2 - coeffs.size)))
    coeffs[1] -= c
    total = sum(_integrate_poly(coeffs, lo, hi) for lo, hi in positive_intervals(coeffs, dist.lo, dist.hi))
    return total / (dist.hi - dist.lo)


def phi(spec: EnvironmentSpec, c: float) -> float:
    """lam E[(r(X) - c X)_+] - c, strictly decreasing in c."""
    if c < 0:
        raise DomainError(f"threshold must be non-negative, got {c!r}")
    return spec.lam * expected_positive_part(spec, c) - c


def solve_c_star(spec: EnvironmentSpec, tol: float = ROOT_TOL) -> float:
    """Root of :func:`phi` by bisection on [0, lam D]."""
    hi = spec.lam * spec.D
    if hi <= 0 or phi(spec, 0.0) <= 0:
        return 0.0
    return optimize.bisect(lambda c: phi(spec, c), 0.0, hi, xtol=tol, rtol=4 * np.finfo(float).eps)


def baseline_decision(c_star: float, x: float, r_x: float) -> bool:
    """Accept iff the task's profitability reaches ``c_star`` (ties accept)."""
    return r_x >= c_star * x


def profit_rate(spec: EnvironmentSpec, s: float) -> float:
    """Reward per unit time of the policy accepting exactly the durations >= s.

    ``lam E[r(X) 1{X >= s}] / (1 + lam E[X 1{X >= s}])``
    """
    dist = spec.duration
    if isinstance(dist, Discrete):
        x = np.asarray(dist.points)
        keep = (x >= s) * np.asarray(dist.probs)
        num = float(np.dot(keep, spec.reward(x)))
        den = float(np.dot(keep, x))
    else:
        coeffs = _poly_coeffs(spec)
        a = max(s, dist.lo)
        num = _integrate_poly(coeffs, a, dist.hi) / (dist.hi - dist.lo)
        den = _integrate_poly(np.array([0.0, 1.0]), a, dist.hi) / (dist.hi - dist.lo)
    return spec.lam * num / (1.0 + spec.lam * den)


def duration_threshold(spec: EnvironmentSpec, c: float) -> float:
    """Smallest duration whose profitability reaches ``c``.

    For non-decreasing profitability this is the optimal acceptance threshold
    ``s*`` (with ``c = c*``): accepting ``x`` iff ``x >= s*`` is optimal.
    Returns ``C`` when no duration qualifies.
    """
    dist = spec.duration
    if isinstance(dist, Discrete):
        ok = [x for x in sorted(dist.points) if spec.reward(x) >= c * x]
        return ok[0] if ok else spec.C
    coeffs = _poly_coeffs(spec).copy()
    coeffs = np.pad(coeffs, (0, max(0, 2 - coeffs.size)))
    coeffs[1] -= c
    ivs = positive_intervals(coeffs, 0.0, spec.C)
    return ivs[0][0] if ivs else spec.C


# ---------------------------------------------------------------------------
# Value function
# ---------------------------------------------------------------------------


@dataclass
class OracleSolution:
    c_star: float
    t: np.ndarray
    v: np.ndarray
    dt: float
    T: float
    C: float

    @property
    def w_slope(self) -> float:
        return self.c_star

    def w(self, t) -> np.ndarray:
        """Affine proxy c* (T - t) of the value function."""
        return self.c_star * (self.T - np.asarray(t))

    def sandwich_residuals(self) -> tuple:
        """(max of w(t) - v(t), max of v(t) - w(t - C)) over the grid; both <= 0 ideally."""
        lower = float(np.max(self.w(self.t) - self.v))
        upper = float(np.max(self.v - self.w(self.t - self.C)))
        return lower, upper


def _quadrature(spec: EnvironmentSpec, dt: float) -> tuple:
    dist = spec.duration
    if isinstance(dist, Discrete):
        return np.asarray(dist.points), np.asarray(dist.probs)
    m = max(1, int(math.ceil((dist.hi - dist.lo) / dt - 1e-9)))
    x = np.linspace(dist.lo, dist.hi, m + 1)
    w = np.full(m + 1, 1.0 / m)
    w[0] = w[-1] = 0.5 / m
    return x, w


def solve_value_function(spec: EnvironmentSpec, T: float, dt: float = 1e-3) -> OracleSolution:
    """Integrate ``v'(t) = -lam E[(r(X) + v(t + X) - v(t))_+]`` backwards from ``v(T) = 0``.

    Explicit midpoint steps on a uniform grid; ``v(t + X)`` is linearly
    interpolated from already computed grid values, and the expectation uses
    the exact support of a discrete law or a composite trapezoid rule on the
    grid spacing for a uniform law.
    """
    if T <= 0:
        raise ConfigurationError("horizon must be positive")
    if dt > spec.C / 10:
        raise ConfigurationError(f"grid step {dt} is coarser than C/10 = {spec.C / 10}")
    n_steps = int(math.ceil(T / dt - 1e-9))
    dt = T / n_steps
    c_star = solve_c_star(spec)

    x, wts = _quadrature(spec, dt)
    lam_w = spec.lam * wts
    rx = np.asarray(spec.reward(x), dtype=float)
    d = x / dt  # delays in grid units

    # u(tau) = v(T - tau), stored with zero padding for tau < 0
    pad = int(math.ceil(d.max())) + 2
    hist = np.zeros(pad + n_steps + 2)

    lo1 = np.floor(-d).astype(np.int64)
    f1 = -d - lo1
    lo2 = np.floor(0.5 - d).astype(np.int64)
    f2 = 0.5 - d - lo2

    def rhs(k_lo, frac, u_now):
        base = pad + k_lo
        delayed = (1.0 - frac) * hist[base] + frac * hist[base + 1]
        return float(np.dot(lam_w, np.maximum(rx + delayed - u_now, 0.0)))

    for k in range(n_steps):
        u_k = hist[pad + k]
        k1 = rhs(k + lo1, f1, u_k)
        u_mid = u_k + 0.5 * dt * k1
        # provisional linear extension so that interpolation inside
        # [tau_k, tau_k + dt/2] reproduces the segment from u_k to u_mid
        hist[pad + k + 1] = 2.0 * u_mid - u_k
        k2 = rhs(k + lo2, f2, u_mid)
        hist[pad + k + 1] = u_k + dt * k2

    u = hist[pad:pad + n_steps + 1]
    t = T - dt * np.arange(n_steps + 1)
    return OracleSolution(c_star=c_star, t=t[::-1].copy(), v=u[::-1].copy(), dt=dt, T=T, C=spec.C)
