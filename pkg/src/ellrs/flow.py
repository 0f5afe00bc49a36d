"""Discrete-time evolution driven by the Backlund map.

One step solves the coupling condition

    t_k = e^c * prod_s theta(lambda_k - mu_s + eta/n) / theta(lambda_k - mu_s)

for the next positions mu = lambda(a+1) (damped Newton on the multiplicative
residual, analytic Jacobian through zeta), then updates the Lax weights via
the companion product formula.  mu is only defined as an unordered set, so
components are matched across steps by nearest assignment modulo the lattice.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .elliptic import ModelParams, lattice_distance, theta_odd, zeta_log
from .errors import DegenerateSolution, DegenerateWeights, NoConvergence
from .intertwiners import WeightVector
from .lax import backlund_ttilde

# Newton steps longer than this (per component) are rescaled; keeps trial
# points inside a couple of lattice cells where theta stays representable
_MAX_NEWTON_STEP = 0.45


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the Newton solver behind solve_next."""

    tol: float = 1e-11
    max_iter: int = 50
    damping: float = 1.0
    multistart: int = 5

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class StepState:
    """One time slice (a, lambda(a), t(a), c(a)) of a trajectory."""

    a: int
    lam: WeightVector
    t: np.ndarray
    c: complex


@dataclass(frozen=True)
class Trajectory:
    """Ordered Backlund steps interpreted as discrete time evolution."""

    steps: tuple[StepState, ...]
    params: ModelParams
    u_sequence: tuple[complex, ...] = ()

    @classmethod
    def initial(cls, lam: WeightVector, t, c: complex) -> "Trajectory":
        t = np.asarray(t, dtype=complex).reshape(-1)
        return cls((StepState(0, lam, t, complex(c)),), lam.params)

    @property
    def last(self) -> StepState:
        return self.steps[-1]


# ---------------------------------------------------------------------------
# assignment modulo the lattice
# ---------------------------------------------------------------------------

def lattice_mod_distance_matrix(a, b, tau: complex) -> np.ndarray:
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    out = np.empty((a.size, b.size))
    for i in range(a.size):
        for j in range(b.size):
            out[i, j] = lattice_distance(a[i] - b[j], tau)
    return out


def nearest_assignment(a, b, tau: complex) -> tuple[np.ndarray, float]:
    """Match components of a to components of b modulo the lattice.

    Greedy matching on pairwise lattice distances, with the Hungarian
    assignment as a fallback whenever it beats the greedy total (n <= 8
    stays cheap).  Returns (perm, max_distance) with a[i] ~ b[perm[i]].
    """
    dist = lattice_mod_distance_matrix(a, b, tau)
    n = dist.shape[0]
    perm = np.full(n, -1, dtype=int)
    used: set[int] = set()
    order = np.argsort(dist.min(axis=1))
    for i in order:
        best_j = min((j for j in range(n) if j not in used), key=lambda j: dist[i, j])
        perm[i] = best_j
        used.add(best_j)
    greedy_total = dist[np.arange(n), perm].sum()
    if n <= 8:
        rows, cols = linear_sum_assignment(dist)
        if dist[rows, cols].sum() < greedy_total:
            perm = np.empty(n, dtype=int)
            perm[rows] = cols
    return perm, float(dist[np.arange(n), perm].max())


# ---------------------------------------------------------------------------
# Newton solve for the next positions
# ---------------------------------------------------------------------------

def _flow_residual(mu: np.ndarray, lam: np.ndarray, t: np.ndarray, c: complex,
                   params: ModelParams) -> np.ndarray:
    eta, n, torus = params.eta, params.n, params.torus
    out = np.empty(n, dtype=complex)
    for k in range(n):
        val = cmath.exp(c)
        for s in range(n):
            d = lam[k] - mu[s]
            val *= theta_odd(d + eta / n, torus) / theta_odd(d, torus)
        out[k] = val - t[k]
    return out


def _flow_jacobian(mu: np.ndarray, lam: np.ndarray, c: complex,
                   params: ModelParams) -> np.ndarray:
    eta, n, torus = params.eta, params.n, params.torus
    jac = np.empty((n, n), dtype=complex)
    for k in range(n):
        prod = cmath.exp(c)
        for s in range(n):
            d = lam[k] - mu[s]
            prod *= theta_odd(d + eta / n, torus) / theta_odd(d, torus)
        for s in range(n):
            d = lam[k] - mu[s]
            # d/dmu_s of log of the s-th factor
            jac[k, s] = prod * (zeta_log(d, torus) - zeta_log(d + eta / n, torus))
    return jac


def _fd_jacobian(mu, lam, t, c, params, h=1e-7):
    n = params.n
    jac = np.empty((n, n), dtype=complex)
    for s in range(n):
        dm = np.zeros(n, dtype=complex)
        dm[s] = h
        jac[:, s] = (_flow_residual(mu + dm, lam, t, c, params)
                     - _flow_residual(mu - dm, lam, t, c, params)) / (2 * h)
    return jac


def solve_next(
    lam: WeightVector,
    t,
    c: complex,
    cfg: SolverConfig = SolverConfig(),
    guess: WeightVector | None = None,
    fd_jacobian: bool = False,
) -> WeightVector:
    """Solve the step equation for mu = lambda(a+1).

    Newton iteration on r_k(mu) = e^c prod_s(...) - t_k with damped steps and
    deterministic multistart (guess perturbed by 0.05-scale offsets drawn from
    a fixed per-attempt seed).  Convergence criterion: max_k |r_k|/|t_k| < tol.
    """
    params = lam.params
    n = params.n
    t = np.asarray(t, dtype=complex).reshape(-1)
    if t.shape != (n,):
        raise ValueError(f"expected {n} Lax weights, got {t.shape}")
    if np.any(t == 0) or not np.all(np.isfinite(t)):
        raise ValueError("Lax weights t_k must be nonzero and finite")
    base_guess = guess.lam if guess is not None else lam.lam - params.eta / n
    lam_arr = lam.lam

    failure = None
    for attempt in range(max(1, cfg.multistart)):
        mu = np.array(base_guess, dtype=complex)
        if attempt > 0:
            rng = np.random.default_rng([attempt, 0xB1])
            mu = mu + 0.05 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        mu = _newton(mu, lam_arr, t, c, params, cfg, fd_jacobian)
        if mu is None:
            failure = "Newton iteration stalled"
            continue
        # mu is defined only as an unordered set; order it along the guess
        perm, _ = nearest_assignment(base_guess, mu, params.tau)
        try:
            return WeightVector(mu[perm], params)
        except DegenerateWeights as exc:
            # converged onto a degenerate root; retry from a perturbed start
            failure = str(exc)
            continue
    if failure == "Newton iteration stalled":
        raise NoConvergence(
            f"solve_next failed after {max(1, cfg.multistart)} starts x {cfg.max_iter} iterations"
        )
    raise DegenerateSolution(f"solve_next converged onto degenerate weights: {failure}")


def _newton(mu, lam_arr, t, c, params, cfg, fd_jacobian):
    scale = np.abs(t)
    for _ in range(cfg.max_iter):
        try:
            res = _flow_residual(mu, lam_arr, t, c, params)
        except Exception:
            return None
        if np.max(np.abs(res) / scale) < cfg.tol:
            return mu
        try:
            if fd_jacobian:
                jac = _fd_jacobian(mu, lam_arr, t, c, params)
            else:
                jac = _flow_jacobian(mu, lam_arr, c, params)
            delta = np.linalg.solve(jac, -res)
        except Exception:
            return None
        big = np.max(np.abs(delta))
        if big > _MAX_NEWTON_STEP:
            delta *= _MAX_NEWTON_STEP / big
        # halve the step until the residual actually decreases
        factor = cfg.damping
        base = np.max(np.abs(res))
        for _ in range(24):
            try:
                trial = np.max(np.abs(_flow_residual(mu + factor * delta, lam_arr, t, c, params)))
            except Exception:
                trial = np.inf
            if trial < base:
                break
            factor /= 2
        mu = mu + factor * delta
    try:
        res = _flow_residual(mu, lam_arr, t, c, params)
        if np.max(np.abs(res) / scale) < cfg.tol:
            return mu
    except Exception:
        pass
    return None


# ---------------------------------------------------------------------------
# trajectory stepping and residuals
# ---------------------------------------------------------------------------

def step(traj: Trajectory, c_next: complex, cfg: SolverConfig = SolverConfig(),
         u_next: complex = 0j) -> Trajectory:
    """Append one time slice: solve for lambda(a+1), update t by the companion
    formula, install c(a+1) = c_next.

    The Newton guess is the linear extrapolation 2*lambda(a) - lambda(a-1)
    when history exists, else the free-flow shift lambda - eta/n.
    """
    if not traj.steps:
        raise ValueError("trajectory is empty")
    cur = traj.last
    params = traj.params
    guess = None
    if len(traj.steps) >= 2:
        # slices stay aligned by construction, so plain extrapolation works
        prev = traj.steps[-2]
        try:
            guess = WeightVector(2 * cur.lam.lam - prev.lam.lam, params)
        except DegenerateWeights:
            guess = None
    nxt = solve_next(cur.lam, cur.t, cur.c, cfg, guess=guess)
    t_next = backlund_ttilde(cur.lam, nxt, cur.c)
    state = StepState(cur.a + 1, nxt, t_next, complex(c_next))
    return Trajectory(traj.steps + (state,), params, traj.u_sequence + (complex(u_next),))


def discrete_rs_residual(
    lam_prev: WeightVector,
    lam_cur: WeightVector,
    lam_next: WeightVector,
    c_prev: complex,
    c_cur: complex,
) -> float:
    """Relative residual of the second-order discrete equation of motion

    e^{c(a)-c(a-1)} prod_{m != k} theta(lam_mk(a)+eta/n)/theta(lam_mk(a)-eta/n)
      = prod_s theta(lam_k(a)-lam_s(a+1))/theta(lam_k(a)-lam_s(a+1)+eta/n)
               * theta(lam_k(a)-lam_s(a-1)-eta/n)/theta(lam_k(a)-lam_s(a-1))

    maximized over k, each side scaled by |LHS| + |RHS|.
    """
    params = lam_cur.params
    n, eta, torus = params.n, params.eta, params.torus
    worst = 0.0
    for k in range(n):
        lhs = cmath.exp(c_cur - c_prev)
        for m in range(n):
            if m != k:
                d = lam_cur.lam[m] - lam_cur.lam[k]
                lhs *= theta_odd(d + eta / n, torus) / theta_odd(d - eta / n, torus)
        rhs = 1.0 + 0j
        for s in range(n):
            dn = lam_cur.lam[k] - lam_next.lam[s]
            rhs *= theta_odd(dn, torus) / theta_odd(dn + eta / n, torus)
            dp = lam_cur.lam[k] - lam_prev.lam[s]
            rhs *= theta_odd(dp - eta / n, torus) / theta_odd(dp, torus)
        worst = max(worst, abs(lhs - rhs) / (abs(lhs) + abs(rhs)))
    return worst


def trajectory_residuals(traj: Trajectory) -> list[float]:
    """discrete_rs_residual for every interior time slice of the trajectory."""
    out = []
    for idx in range(1, len(traj.steps) - 1):
        prev, cur, nxt = traj.steps[idx - 1], traj.steps[idx], traj.steps[idx + 1]
        out.append(discrete_rs_residual(prev.lam, cur.lam, nxt.lam, prev.c, cur.c))
    return out


def backlund_commutativity_residual(
    lam: WeightVector,
    t,
    c1: complex,
    c2: complex,
    cfg: SolverConfig = SolverConfig(),
) -> float:
    """Compose B_{c1} then B_{c2} and in the opposite order; return the larger
    of the lambda mismatch (nearest assignment mod lattice) and the t mismatch.
    """
    params = lam.params

    def apply(lam_in: WeightVector, t_in, c: complex):
        mu = solve_next(lam_in, t_in, c, cfg)
        return mu, backlund_ttilde(lam_in, mu, c)

    l1, t1 = apply(lam, t, c1)
    l12, t12 = apply(l1, t1, c2)
    l2, t2 = apply(lam, t, c2)
    l21, t21 = apply(l2, t2, c1)
    perm, lam_dist = nearest_assignment(l12.lam, l21.lam, params.tau)
    t_dist = float(np.abs(t12 - t21[perm]).max())
    return max(lam_dist, t_dist)
