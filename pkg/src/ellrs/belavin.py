"""Belavin's Z_n-symmetric elliptic R-matrix and its Yang-Baxter check.

Entries (all indices mod n):

    R(z)[i j, i' j'] = delta_{i+j, i'+j'} * theta^(i'-j')(z + eta)
                       / (theta^(i'-i)(eta) * theta^(i-j')(z))
                       * prod_{k=0}^{n-1} theta^(k)(z) / prod_{k=1}^{n-1} theta^(k)(0)

The Yang-Baxter equation is checked in the standard difference form
R12(z-w) R13(z) R23(w) = R23(w) R13(z) R12(z-w); that convention is fixed
here once and pinned by a loop-oracle test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import ModelParams, lattice_distance, theta_band
from .errors import PoleAtLatticePoint


@dataclass(frozen=True)
class RTensor:
    """R(z) as an (n,n,n,n) array: entries[i, j, i2, j2] = R(z)^{ij}_{i2 j2}."""

    entries: np.ndarray
    z: complex
    params: ModelParams


def _band_zero_distance(k: int, w: complex, params: ModelParams) -> float:
    """Distance of w from the zero set of theta^(k): w = k*tau mod (1, n*tau)."""
    return lattice_distance(w - (k % params.n) * params.tau, params.n * params.tau)


def _check_band_generic(w: complex, params: ModelParams, what: str) -> None:
    tol = params.torus.reduction_tol
    for k in range(params.n):
        if _band_zero_distance(k, w, params) < tol:
            raise PoleAtLatticePoint(
                f"r_matrix: {what}={complex(w)} hits the zero set of theta^({k})"
            )


def r_matrix(z: complex, params: ModelParams) -> RTensor:
    """Build the Belavin R-matrix at spectral parameter z.

    The theta^(i-j')(z) denominator always cancels against the matching factor
    of prod_k theta^(k)(z), so the entries are computed in the cancelled form

        R[i j, i' j'] = delta * theta^(i'-j')(z+eta) / theta^(i'-i)(eta)
                        * prod_{k != i-j'} theta^(k)(z) / prod_{k>=1} theta^(k)(0)

    which stays regular in z everywhere; in particular R(0) is the permutation
    operator.  The eta denominators never vanish for a valid ModelParams
    (their zero set is exactly the lattice eta is excluded from), but they are
    still guarded here.
    """
    n = params.n
    eta = params.eta
    _check_band_generic(eta, params, "eta")
    band_z = [theta_band(k, z, params) for k in range(n)]
    band_eta = [theta_band(k, eta, params) for k in range(n)]
    band_ze = [theta_band(k, z + eta, params) for k in range(n)]
    denom0 = np.prod([theta_band(k, 0.0, params) for k in range(1, n)])
    entries = np.zeros((n, n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            for i2 in range(n):
                j2 = (i + j - i2) % n  # delta_{i+j, i'+j'} sparsity
                skip = (i - j2) % n
                num = 1.0 + 0j
                for k in range(n):
                    if k != skip:
                        num *= band_z[k]
                entries[i, j, i2, j2] = (
                    band_ze[(i2 - j2) % n] * num / (band_eta[(i2 - i) % n] * denom0)
                )
    entries.setflags(write=False)
    return RTensor(entries, complex(z), params)


def _ybe_sides(r12: np.ndarray, r13: np.ndarray, r23: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Triple contractions of both YBE orderings over C^n x C^n x C^n.

    Tensor legs are ordered (space1, space2, space3), flattened row-major; an
    operator product A.B contracts A's input indices with B's output indices.
    With R[out1, out2, in1, in2]:

      LHS[a,b,c; s,t,u] = sum_{x,y,r} R12[a,b,x,y] R13[x,c,s,r] R23[y,r,t,u]
      RHS[a,b,c; s,t,u] = sum_{x,y,w} R23[b,c,y,w] R13[a,w,x,u] R12[x,y,s,t]
    """
    lhs = np.einsum("abxy,xcsr,yrtu->abcstu", r12, r13, r23)
    rhs = np.einsum("bcyw,awxu,xyst->abcstu", r23, r13, r12)
    return lhs, rhs


def ybe_residual(z: complex, w: complex, params: ModelParams) -> float:
    """Max-norm difference of the two YBE contractions, relative to max |entry|."""
    r12 = r_matrix(z - w, params).entries
    r13 = r_matrix(z, params).entries
    r23 = r_matrix(w, params).entries
    lhs, rhs = _ybe_sides(r12, r13, r23)
    scale = np.abs(lhs).max()
    return float(np.abs(lhs - rhs).max() / scale)
