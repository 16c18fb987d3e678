"""Brute-force reference values computed with the QZ algorithm.

This path never touches the canonical structures used by the bounds: it
eigendecomposes the linearized pencils with ``scipy.linalg.eig(A, B)`` and
obtains group subspaces from reordered generalized Schur forms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from ..linalg import chordal_distance, match_spectra, sin_theta_norm
from ..qep import QepPerturbation, embed_eigvec, linearize

AMBIGUOUS_COST = 0.5


def qz_eig(pair) -> tuple[np.ndarray, np.ndarray]:
    """Generalized eigenvalues and unit eigenvectors of ``(A, B)`` by QZ."""
    w, v = sla.eig(pair.A, pair.B)
    v = v / np.linalg.norm(v, axis=0)
    return w, v


def deflating_subspace(pair, targets, tol_scale: float = 1.0) -> np.ndarray:
    """Orthonormal basis of the right deflating subspace for the eigenvalues
    nearest to ``targets`` (one eigenvalue per target)."""
    w = sla.eigvals(pair.A, pair.B)
    targets = np.asarray(targets, dtype=complex)
    k = len(targets)
    chosen = set()
    for t in targets:
        order = np.argsort([chordal_distance(t, x) for x in w])
        chosen.add(next(j for j in order if j not in chosen))
    picked = w[sorted(chosen)]

    def select(alpha, beta):
        lam = np.where(beta != 0, alpha / np.where(beta == 0, 1, beta), np.inf)
        out = np.zeros(len(lam), dtype=bool)
        for p in picked:
            d = np.array([chordal_distance(p, x) for x in lam])
            d[out] = np.inf
            out[int(np.argmin(d))] = True
        return out

    *_, Z = sla.ordqz(pair.A, pair.B, sort=select, output="complex")
    return Z[:, :k]


def nearest_distinct(values, targets) -> list[int]:
    """Greedy nearest indices into ``values``, never reusing an index."""
    used: list[int] = []
    for t in targets:
        d = np.abs(np.asarray(values) - t)
        d[used] = np.inf
        used.append(int(np.argmin(d)))
    return used


@dataclass
class OracleRecord:
    """Exact quantities for one perturbation, indexed like ``lam``."""

    lam: np.ndarray
    lam_pert: np.ndarray
    vectors: np.ndarray
    vectors_pert: np.ndarray
    max_cost: float
    rel_err: np.ndarray
    rel_err_pert: np.ndarray
    sin_vec: np.ndarray
    sin_embedded: np.ndarray
    subspace_sin: float | None

    def index_of(self, target: complex) -> int:
        return int(np.argmin(np.abs(self.lam - target)))


def _embedded(v, lam: complex) -> np.ndarray:
    """``[x; lam x]`` from the leading block; the raw column for an infinite eigenvalue."""
    n = v.shape[0] // 2
    if not np.isfinite(lam) or not np.any(v[:n]):
        return v
    return embed_eigvec(v[:n], lam)


def oracle_exact(qp: QepPerturbation, group=None, linearization: str = "L1") -> OracleRecord:
    """Exact eigenvalue errors and eigenvector angles of a perturbed triple.

    ``group`` lists original eigenvalues spanning a subspace whose ``||sin Theta||_F``
    against its perturbed counterpart is also returned.
    """
    n = qp.base.n
    P, Pt = linearize(qp.base, linearization), linearize(qp.perturbed, linearization)
    lam, V = qz_eig(P)
    lam_t, Vt = qz_eig(Pt)
    perm = match_spectra(lam, lam_t)
    lam_t, Vt = lam_t[perm], Vt[:, perm]
    costs = [chordal_distance(a, b) for a, b in zip(lam, lam_t)]
    max_cost = float(max(costs))
    if max_cost > AMBIGUOUS_COST:
        warnings.warn(f"eigenvalue matching is ambiguous (cost {max_cost:.3g})")
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(lam_t - lam) / np.abs(lam)
        rel_t = np.abs(lam_t - lam) / np.abs(lam_t)
    x, xt = V[:n], Vt[:n]
    sin_vec = np.array([sin_theta_norm(x[:, i], xt[:, i], "2") for i in range(2 * n)])
    sin_emb = np.array([sin_theta_norm(_embedded(V[:, i], lam[i]), _embedded(Vt[:, i], lam_t[i]), "2")
                        for i in range(2 * n)])
    sub = None
    if group is not None and len(group):
        group = np.asarray(group, dtype=complex)
        idx = nearest_distinct(lam, group)
        X1 = deflating_subspace(P, group)
        Xt1 = deflating_subspace(Pt, lam_t[idx])
        sub = sin_theta_norm(X1, Xt1, "fro")
    return OracleRecord(lam, lam_t, V, Vt, max_cost, rel, rel_t, sin_vec, sin_emb, sub)
