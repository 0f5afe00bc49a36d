"""Factorized Lax operators, Backlund map data and the associated identities.

Conventions, fixed once for the whole package:

* The factorized ("vector") frame stores L(z)^j_i as a matrix [j, i]:

      L(z)[j, i] = sum_k phibar(z-v-eta)[lam; k, j] * phi(z-v)[lam; i, k] * t_k

  so L has its determinant zero at P_v and pole at P_{v+eta}.

* The gauge frame stores L_{k',k}(z) as a matrix [k', k]:

      L[k', k] = Phi_{z-v-eta}(lam_k - lam_k' + eta/n)
                 * prod_l theta(lam_l - lam_k' + eta/n)
                 / prod_{l != k} theta(lam_l - lam_k)  *  t_k'

  (the l = k factor of the product cancels the Phi denominator; the code
  works with the cancelled form so only genuine poles can trip the guards).

* All residual checks that involve the modification kernel s_mu are taken at
  the modification point z = u; the Lax equation itself holds for every z.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .elliptic import (
    ModelParams,
    lattice_distance,
    theta_odd,
)
from .errors import PathThroughZero, PoleAtLatticePoint, ShiftMismatch
from .intertwiners import WeightVector, phi_inverse, phi_matrix

_GL_NODES = 16
_PATH_CLEARANCE = 1e-3
_BUMP = 0.01


# ---------------------------------------------------------------------------
# phase-space records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseConfig:
    """One point (lambda, t) of the RS phase space."""

    lam: WeightVector
    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=complex).reshape(-1)
        if t.shape != (self.lam.n,):
            raise ValueError(f"expected {self.lam.n} Lax weights, got {t.shape}")
        if np.any(t == 0) or not np.all(np.isfinite(t)):
            raise ValueError("Lax weights t_k must be nonzero and finite")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class BacklundStep:
    """Record of one completed Backlund transformation (lambda,t) -> (mu,t~)."""

    source: PhaseConfig
    mu: WeightVector
    t_tilde: np.ndarray
    C: np.ndarray
    c: complex
    u: complex
    v: complex

    def __post_init__(self):
        lam, mu = self.source.lam, self.mu
        shift = self.u + lam.total - mu.total
        if abs(self.v - shift) > 1e-12 * (1.0 + abs(self.v)):
            raise ShiftMismatch(f"v={self.v} but u + sum(lambda-mu) = {shift}")
        for got, want, name in (
            (self.source.t, backlund_t(lam, mu, self.c), "t"),
            (self.t_tilde, backlund_ttilde(lam, mu, self.c), "t_tilde"),
            (self.C, backlund_C(lam, mu), "C"),
        ):
            err = np.abs(np.asarray(got) - want).max() / np.abs(want).max()
            if err > 1e-10:
                raise ValueError(f"{name} does not reproduce its defining formula ({err:.2e})")


def make_backlund_step(lam: WeightVector, mu: WeightVector, c: complex, u: complex) -> BacklundStep:
    """Assemble a consistent BacklundStep from the free data (lambda, mu, c, u)."""
    t = backlund_t(lam, mu, c)
    return BacklundStep(
        source=PhaseConfig(lam, t),
        mu=mu,
        t_tilde=backlund_ttilde(lam, mu, c),
        C=backlund_C(lam, mu),
        c=complex(c),
        u=complex(u),
        v=complex(u) + lam.total - mu.total,
    )


# ---------------------------------------------------------------------------
# Backlund coefficient formulas
# ---------------------------------------------------------------------------

def _check_generic(values, params: ModelParams, what: str) -> None:
    tol = params.torus.reduction_tol
    for val in values:
        if lattice_distance(val, params.tau) < tol:
            raise PoleAtLatticePoint(f"{what}: argument {complex(val)} is lattice-proximate")


def backlund_t(lam: WeightVector, mu: WeightVector, c: complex) -> np.ndarray:
    """t_k = e^c * prod_s theta(lambda_k - mu_s + eta/n) / theta(lambda_k - mu_s)."""
    params = lam.params
    n, eta, torus = params.n, params.eta, params.torus
    _check_generic(
        (lam.lam[k] - mu.lam[s] for k in range(n) for s in range(n)), params, "backlund_t"
    )
    out = np.empty(n, dtype=complex)
    for k in range(n):
        val = cmath.exp(c)
        for s in range(n):
            d = lam.lam[k] - mu.lam[s]
            val *= theta_odd(d + eta / n, torus) / theta_odd(d, torus)
        out[k] = val
    return out


def backlund_ttilde(lam: WeightVector, mu: WeightVector, c: complex) -> np.ndarray:
    """t~_k = e^c * prod_{m != k} theta(mu_mk - eta/n)/theta(mu_mk + eta/n)
    * prod_s theta(lambda_s - mu_k + eta/n)/theta(lambda_s - mu_k)."""
    params = lam.params
    n, eta, torus = params.n, params.eta, params.torus
    _check_generic(
        (lam.lam[s] - mu.lam[k] for k in range(n) for s in range(n)), params, "backlund_ttilde"
    )
    _check_generic(
        (mu.lam[m] - mu.lam[k] + eta / n for k in range(n) for m in range(n) if m != k),
        params,
        "backlund_ttilde",
    )
    out = np.empty(n, dtype=complex)
    for k in range(n):
        val = cmath.exp(c)
        for m in range(n):
            if m != k:
                d = mu.lam[m] - mu.lam[k]
                val *= theta_odd(d - eta / n, torus) / theta_odd(d + eta / n, torus)
        for s in range(n):
            d = lam.lam[s] - mu.lam[k]
            val *= theta_odd(d + eta / n, torus) / theta_odd(d, torus)
        out[k] = val
    return out


def backlund_C(lam: WeightVector, mu: WeightVector) -> np.ndarray:
    """C_k = prod_s theta(mu_sk - eta/n) / theta(lambda_s - mu_k)."""
    params = lam.params
    n, eta, torus = params.n, params.eta, params.torus
    _check_generic(
        (lam.lam[s] - mu.lam[k] for k in range(n) for s in range(n)), params, "backlund_C"
    )
    out = np.empty(n, dtype=complex)
    for k in range(n):
        val = 1.0 + 0j
        for s in range(n):
            val *= theta_odd(mu.lam[s] - mu.lam[k] - eta / n, torus)
            val /= theta_odd(lam.lam[s] - mu.lam[k], torus)
        out[k] = val
    return out


# ---------------------------------------------------------------------------
# Lax matrices
# ---------------------------------------------------------------------------

def lax_classical(z: complex, cfg: PhaseConfig, v: complex) -> np.ndarray:
    """Factorized-frame L(z) as a matrix [j, i]; see module docstring."""
    lam = cfg.lam
    params = lam.params
    pb = phi_inverse(z - v - params.eta, lam)  # [k, j]
    p0 = phi_matrix(z - v, lam).entries  # [i, k]
    return pb.T @ np.diag(cfg.t) @ p0.T


def lax_gauge(z: complex, cfg: PhaseConfig, v: complex) -> np.ndarray:
    """Gauge-frame L_{k',k}(z) as a matrix [k', k]; rows carry t_{k'}."""
    lam = cfg.lam
    params = lam.params
    n, eta, torus = params.n, params.eta, params.torus
    big_z = z - v - eta
    if lattice_distance(big_z, params.tau) < torus.reduction_tol:
        raise PoleAtLatticePoint(f"lax_gauge: z-v-eta={complex(big_z)} is lattice-proximate")
    th_z = theta_odd(big_z, torus)
    out = np.empty((n, n), dtype=complex)
    for kp in range(n):
        num = np.prod(
            [theta_odd(lam.lam[l] - lam.lam[kp] + eta / n, torus) for l in range(n)]
        )
        for k in range(n):
            val = theta_odd(big_z + lam.lam[k] - lam.lam[kp] + eta / n, torus) / th_z
            val *= num / theta_odd(lam.lam[k] - lam.lam[kp] + eta / n, torus)
            for l in range(n):
                if l != k:
                    val /= theta_odd(lam.lam[l] - lam.lam[k], torus)
            out[kp, k] = val * cfg.t[kp]
    return out


def m_matrix(
    z: complex,
    lam: WeightVector,
    mu: WeightVector,
    u: complex,
    v: complex,
) -> np.ndarray:
    """Gauge-frame M_{k',k}(z) = Phi_{z-v-eta}(lam_k - mu_k' + eta/n)
    * prod_l theta(lam_l - mu_k' + eta/n) / prod_{l != k} theta(lam_lk) * C_k'.
    """
    params = lam.params
    n, eta, torus = params.n, params.eta, params.torus
    shift = u + lam.total - mu.total
    if abs(v - shift) > 1e-10 * (1.0 + abs(v)):
        raise ShiftMismatch(f"v={complex(v)} but u + sum(lambda-mu) = {shift}")
    big_z = z - v - eta
    if lattice_distance(big_z, params.tau) < torus.reduction_tol:
        raise PoleAtLatticePoint(f"m_matrix: z-v-eta={complex(big_z)} is lattice-proximate")
    cvec = backlund_C(lam, mu)
    th_z = theta_odd(big_z, torus)
    out = np.empty((n, n), dtype=complex)
    for kp in range(n):
        num = np.prod(
            [theta_odd(lam.lam[l] - mu.lam[kp] + eta / n, torus) for l in range(n)]
        )
        for k in range(n):
            val = theta_odd(big_z + lam.lam[k] - mu.lam[kp] + eta / n, torus) / th_z
            val *= num / theta_odd(lam.lam[k] - mu.lam[kp] + eta / n, torus)
            for l in range(n):
                if l != k:
                    val /= theta_odd(lam.lam[l] - lam.lam[k], torus)
            out[kp, k] = val * cvec[kp]
    return out


# ---------------------------------------------------------------------------
# residual checks
# ---------------------------------------------------------------------------

def s_mu(x: complex, mu: WeightVector) -> complex:
    """Kernel section s_mu(x) = prod_l theta(x - mu_l)."""
    torus = mu.params.torus
    val = 1.0 + 0j
    for m in mu.lam:
        val *= theta_odd(x - m, torus)
    return val


def lax_equation_residual(z: complex, step: BacklundStep) -> float:
    """Max-norm of M(z) L(z) - L~(z) M(z) in the gauge frame, relative."""
    lam = step.source.lam
    lg = lax_gauge(z, step.source, step.v)
    ltg = lax_gauge(z, PhaseConfig(step.mu, step.t_tilde), step.v)
    mg = m_matrix(z, lam, step.mu, step.u, step.v)
    lhs = mg @ lg
    return float(np.abs(lhs - ltg @ mg).max() / np.abs(lhs).max())


def eigenvector_residual(step: BacklundStep) -> float:
    """Residual of sum_k L(u)_{k',k} s_mu(lam_k + eta/n) = e^c s_mu(lam_k' + eta/n)."""
    lam = step.source.lam
    eta = lam.params.eta
    n = lam.n
    psi = np.array([s_mu(lam.lam[k] + eta / n, step.mu) for k in range(n)])
    lg = lax_gauge(step.u, step.source, step.v)
    rhs = cmath.exp(step.c) * psi
    return float(np.abs(lg @ psi - rhs).max() / np.abs(rhs).max())


def kernel_residual(step: BacklundStep) -> float:
    """Residual of sum_k M(u)_{k',k} s_mu(lam_k + eta/n) = 0.

    Scaled by the row magnitudes with the z-dependent theta factor stripped,
    so the n = 1 collapse (where that single factor itself vanishes and the
    1x1 matrix M(u) is identically zero) stays a meaningful check.
    """
    lam = step.source.lam
    params = lam.params
    n, eta, torus = params.n, params.eta, params.torus
    psi = np.array([s_mu(lam.lam[k] + eta / n, step.mu) for k in range(n)])
    mg = m_matrix(step.u, lam, step.mu, step.u, step.v)
    big_z = step.u - step.v - eta
    factors = np.array([
        [theta_odd(big_z + lam.lam[k] - step.mu.lam[kp] + eta / n, torus)
         for k in range(n)]
        for kp in range(n)
    ])
    theta_scale = max(1.0, float(np.abs(factors).max()))
    safe = np.where(np.abs(factors) < 1e-150, 1.0, factors)
    stripped = np.abs(mg / safe) * np.abs(psi)[None, :]
    scale = float(stripped.sum(axis=1).max()) * theta_scale
    return float(np.abs(mg @ psi).max() / (scale + 1e-300))


def ks_identity_residual(xvec, yvec, xi: complex, kprime: int, params: ModelParams) -> float:
    """Residual of the closing theta identity

    sum_k theta(z + x_k'k - xi) prod_s theta(x_k - y_s + xi)
          prod_{l != k} theta(x_k'l - xi)/theta(x_kl)
        = theta(z) prod_s theta(x_k' - y_s),   z = n*xi + sum_k (x_k - y_k).
    """
    torus = params.torus
    xs = np.asarray(xvec, dtype=complex).reshape(-1)
    ys = np.asarray(yvec, dtype=complex).reshape(-1)
    n = xs.size
    if ys.size != n:
        raise ValueError("xvec and yvec must have the same length")
    z = n * xi + np.add.reduce(xs - ys)
    lhs = 0j
    for k in range(n):
        term = theta_odd(z + xs[kprime] - xs[k] - xi, torus)
        for s in range(n):
            term *= theta_odd(xs[k] - ys[s] + xi, torus)
        for l in range(n):
            if l != k:
                term *= theta_odd(xs[kprime] - xs[l] - xi, torus)
                term /= theta_odd(xs[k] - xs[l], torus)
        lhs += term
    rhs = theta_odd(z, torus)
    for s in range(n):
        rhs *= theta_odd(xs[kprime] - ys[s], torus)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# generating function
# ---------------------------------------------------------------------------

def _segment_clearance(a: complex, b: complex, tau: complex) -> tuple[float, complex]:
    """(distance, point) of the lattice point nearest to the segment [a, b]."""
    best = (np.inf, 0j)
    lo_q = int(np.floor(min(a.imag, b.imag) / tau.imag)) - 1
    hi_q = int(np.ceil(max(a.imag, b.imag) / tau.imag)) + 1
    d = b - a
    dd = (d * d.conjugate()).real
    for q in range(lo_q, hi_q + 1):
        re_lo = int(np.floor(min((a - q * tau).real, (b - q * tau).real))) - 1
        re_hi = int(np.ceil(max((a - q * tau).real, (b - q * tau).real))) + 1
        for p in range(re_lo, re_hi + 1):
            g = p + q * tau
            t = 0.0 if dd == 0 else ((g - a) * d.conjugate()).real / dd
            t = min(1.0, max(0.0, t))
            dist = abs(a + t * d - g)
            if dist < best[0]:
                best = (dist, g)
    return best


def _deformed_path(a: complex, b: complex, tau: complex) -> list[complex]:
    """Straight path from a to b, with a midpoint bump away from any lattice
    zero that sits within _PATH_CLEARANCE of the segment."""
    for endpoint, name in ((a, "start"), (b, "end")):
        if lattice_distance(endpoint, tau) < _PATH_CLEARANCE:
            raise PathThroughZero(
                f"log-theta path {name}point {endpoint} is within "
                f"{_PATH_CLEARANCE} of a lattice zero"
            )
    dist, g = _segment_clearance(a, b, tau)
    if dist >= _PATH_CLEARANCE:
        return [a, b]
    direction = (b - a) / abs(b - a)
    normal = 1j * direction
    side = ((g - a) * direction.conjugate()).imag  # >0: zero on +normal side
    bump = -_BUMP * normal if side >= 0 else _BUMP * normal
    mid = (a + b) / 2 + bump
    for seg in ((a, mid), (mid, b)):
        if _segment_clearance(*seg, tau)[0] < _PATH_CLEARANCE:
            raise PathThroughZero(
                f"cannot deform path {a} -> {b} away from lattice zero near {g}"
            )
    return [a, mid, b]


def _log_theta_antiderivative(end: complex, params: ModelParams) -> complex:
    """S(end) = int_{1/2}^{end} log theta(x) dx along an (almost) straight path.

    The branch of log theta is tracked continuously from the base point 1/2,
    so repeated calls are consistent up to the common base constant.
    """
    torus = params.torus
    tau = params.tau
    path = _deformed_path(0.5 + 0j, complex(end), tau)
    nodes, weights = np.polynomial.legendre.leggauss(_GL_NODES)
    total = 0j
    offset = 0.0
    prev = None
    for a, b in zip(path[:-1], path[1:]):
        length = abs(b - a)
        if length == 0:
            continue
        # node spacing must stay below the clearance so unwrapping cannot slip
        panels = max(4, int(np.ceil(length * 24)))
        for panel in range(panels):
            t0 = panel / panels
            t1 = (panel + 1) / panels
            zs = a + (b - a) * (t0 + (t1 - t0) * (nodes + 1) / 2)
            vals = np.array([cmath.log(theta_odd(zz, torus)) for zz in zs])
            for idx in range(vals.size):
                cur = vals[idx].imag + offset
                if prev is not None:
                    while cur - prev > np.pi:
                        offset -= 2 * np.pi
                        cur -= 2 * np.pi
                    while cur - prev < -np.pi:
                        offset += 2 * np.pi
                        cur += 2 * np.pi
                prev = cur
                vals[idx] = complex(vals[idx].real, cur)
            total += (b - a) * (t1 - t0) / 2 * np.add.reduce(vals * weights)
    return total


def generating_function(lam: WeightVector, mu: WeightVector, c: complex, u: complex) -> complex:
    """Scalar potential F of the Backlund map, with

        exp( dF/dlambda_k) = t_k,
        exp(-dF/dmu_k)     = t~_k,
        dF/dc              = u + sum_k (lambda_k - mu_k) = v.

    F = sum_{k,k'} [S(lam_k - mu_k' + eta/n) - S(lam_k - mu_k')]
        + sum_{k<k'} [S(mu_kk' - eta/n) - S(mu_kk' + eta/n)]
        + c * (u + sum_k (lam_k - mu_k)),      S(x) = int_{1/2}^x log theta.

    The mu-mu part is written as an ordered sum (each pair once) so that every
    S enters with an integer coefficient and the exponentiated gradients are
    free of half-winding sign ambiguities.
    """
    params = lam.params
    n, eta = params.n, params.eta
    S = lambda x: _log_theta_antiderivative(x, params)
    total = 0j
    for k in range(n):
        for kp in range(n):
            d = lam.lam[k] - mu.lam[kp]
            total += S(d + eta / n) - S(d)
    for k in range(n):
        for kp in range(k + 1, n):
            d = mu.lam[k] - mu.lam[kp]
            total += S(d - eta / n) - S(d + eta / n)
    total += c * (u + lam.total - mu.total)
    return total
