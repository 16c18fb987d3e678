"""Hermitian quadratic eigenvalue problems, their linearizations and bounds."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from . import mmio
from .canonical import EigStructure, Kind, structure_from_pair
from .errors import NotApplicableError, RankDeficientError, SingularMatrixError
from .linalg import (
    MatrixPair,
    check_hermitian,
    eig_pair,
    fro_norm,
    is_singular,
    match_spectra,
    sin_theta_norm,
    spec_norm,
)
from .pair_bounds import (
    BoundEntry,
    PairPerturbation,
    _upper_block_eig,
    eig_bound_jordan,
    sin_theta_bound_B_nonsingular,
)


@dataclass(frozen=True)
class HermitianTriple:
    """Coefficients of ``lambda^2 M + lambda C + K``."""

    M: np.ndarray
    C: np.ndarray
    K: np.ndarray

    def __post_init__(self):
        m = check_hermitian(self.M, "M")
        c = check_hermitian(self.C, "C")
        k = check_hermitian(self.K, "K")
        if not (m.shape == c.shape == k.shape):
            raise ValueError("M, C and K must have the same shape")
        if is_singular(m):
            raise SingularMatrixError("M is numerically singular")
        if is_singular(k):
            raise SingularMatrixError("K is numerically singular")
        object.__setattr__(self, "M", m)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "K", k)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def residual(self, lam: complex, x) -> float:
        q = lam**2 * self.M + lam * self.C + self.K
        scale = abs(lam) ** 2 * spec_norm(self.M) + abs(lam) * spec_norm(self.C) + spec_norm(self.K)
        return float(np.linalg.norm(q @ x) / (scale * np.linalg.norm(x)))


@dataclass(frozen=True)
class QepPerturbation:
    """A triple together with Hermitian perturbations of its coefficients."""

    base: HermitianTriple
    dM: np.ndarray
    dC: np.ndarray
    dK: np.ndarray
    eta: float = 0.0
    seed: int = 0

    @property
    def perturbed(self) -> HermitianTriple:
        return HermitianTriple(self.base.M + self.dM, self.base.C + self.dC, self.base.K + self.dK)

    @classmethod
    def zero(cls, base: HermitianTriple) -> "QepPerturbation":
        z = np.zeros_like(base.M)
        return cls(base, z, z.copy(), z.copy())


def linearize(t: HermitianTriple, which: str = "L1") -> MatrixPair:
    """Hermitian linearization with eigenvectors ``[x; lambda x]``."""
    n = t.n
    Z = np.zeros((n, n), dtype=complex)
    if which == "L1":
        return MatrixPair(np.block([[-t.K, Z], [Z, t.M]]), np.block([[t.C, t.M], [t.M, Z]]))
    if which == "L2":
        # -C in the (2,2) block keeps [x; lambda x] an eigenvector for the same lambda
        return MatrixPair(np.block([[Z, -t.K], [-t.K, -t.C]]), np.block([[-t.K, Z], [Z, t.M]]))
    raise ValueError(f"unknown linearization {which!r}")


def embed_eigvec(x, lam: complex) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if not np.isfinite(lam):
        raise ValueError("eigenvalue must be finite")
    return np.concatenate([x, lam * x])


def extract_angle(xfull, yfull) -> tuple[float, float]:
    """``(sin of embedded-vector angle, sin of leading-block angle)``."""
    xfull = np.asarray(xfull, dtype=complex)
    yfull = np.asarray(yfull, dtype=complex)
    n = xfull.shape[0] // 2
    x, y = xfull[:n], yfull[:n]
    if np.linalg.norm(x) == 0 or np.linalg.norm(y) == 0:
        raise RankDeficientError("leading block is zero; the angle is undefined")
    return sin_theta_norm(xfull, yfull, "2"), sin_theta_norm(x, y, "2")


def _minv(t: HermitianTriple):
    return np.linalg.inv(t.M), np.linalg.inv(t.K)


def qep_deltas_frobenius(qp: QepPerturbation) -> tuple[float, float]:
    """``(da_F, db_F)``, equal to ``||A^-1 dA||_F`` and ``||B^-1 dB||_F`` of the L1 pair."""
    Mi, Ki = _minv(qp.base)
    mdm = Mi @ qp.dM
    da = np.hypot(fro_norm(Ki @ qp.dK), fro_norm(mdm))
    db = np.sqrt(2 * fro_norm(mdm) ** 2 + fro_norm(Mi @ qp.dC - Mi @ qp.base.C @ mdm) ** 2)
    return float(da), float(db)


def qep_deltas(qp: QepPerturbation, norm: str = "fro") -> dict:
    """``delta a``, ``delta b``, ``delta c`` of the semi-simple eigenvalue bound."""
    nf = fro_norm if norm == "fro" else spec_norm
    Mi, Ki = _minv(qp.base)
    mdm = Mi @ qp.dM
    return {
        "delta_a": max(nf(Ki @ qp.dK), nf(mdm)),
        "delta_b": nf(mdm),
        "delta_c": nf(Mi @ qp.dC) + nf(Mi @ qp.base.C @ mdm),
    }


def delta_d_printed(qp: QepPerturbation, x, xt, lam: complex, lam_t: complex) -> float:
    """``|(conj(lam) lam~ - 1) x^H M^-1 dM x~ + conj(lam) x^H M^-1 dC x~ - conj(lam) x^H M^-1 C M^-1 dM x~|``."""
    Mi, _ = _minv(qp.base)
    x = np.asarray(x, dtype=complex)
    xt = np.asarray(xt, dtype=complex)
    lb = np.conj(lam)
    v = ((lb * lam_t - 1) * np.vdot(x, Mi @ qp.dM @ xt)
         + lb * np.vdot(x, Mi @ qp.dC @ xt)
         - lb * np.vdot(x, Mi @ qp.base.C @ Mi @ qp.dM @ xt))
    return float(abs(v))


def _pp(qp: QepPerturbation) -> PairPerturbation:
    return PairPerturbation(linearize(qp.base), linearize(qp.perturbed))


def qep_sin_bound(qp: QepPerturbation, orig: EigStructure, pert: EigStructure,
                  i: int | None = None, gap_tol: float = 1e-6) -> BoundEntry:
    """``kappa(X) kappa(X~) (alpha1 da_F + alpha2 db_F)`` for the group-1 subspace of the L1 pair."""
    pp = _pp(qp)
    e = sin_theta_bound_B_nonsingular(pp, orig, pert, gap_tol)
    e.name = "qep_subspace"
    if e.status != "ok":
        return e
    da, db = qep_deltas_frobenius(qp)
    f = e.factors
    e.value = float(f["kappa"] * f["kappa_pert"] * (f["alpha1"] * da + f["alpha2"] * db))
    ku = _unit_column_cond(orig.X) * _unit_column_cond(pert.X)
    f.update({"da_F": da, "db_F": db, "index": i, "kappa_unit_product": ku,
              "value_unit_columns": float(ku * (f["alpha1"] * da + f["alpha2"] * db))})
    return e


def _unit_column_cond(X) -> float:
    # diagnostic only: these columns are not a canonical congruence
    return float(np.linalg.cond(X / np.linalg.norm(X, axis=0)))


def qep_eig_bound_semisimple(qp: QepPerturbation, orig: EigStructure, pert: EigStructure,
                             orig_block: int, pert_block: int, norm: str = "fro") -> BoundEntry:
    """Relative bound for a semi-simple nonzero eigenvalue of the quadratic problem.

    ``gamma <= s (da + db + dc) / (|y^H B x~| - s (db + dc))`` with
    ``s = ||X^-1|| ||X~||`` and ``y`` the left partner of ``lambda`` in the
    canonical ``X`` of the L1 pair. The expression ``delta_d_printed`` is
    recorded as a factor but is not used as the denominator: it is of the
    order of the perturbation and would make every row vacuous.
    """
    name = "qep_eig_semisimple"
    pp = _pp(qp)
    bo, bp = orig.blocks[orig_block], pert.blocks[pert_block]
    if bo.size != 1 or bp.size != 1 or Kind.R1 in (bo.kind, bp.kind):
        return BoundEntry(name, float("nan"), "not-applicable", {}, "blocks must be semi-simple and finite")
    if bo.kind is Kind.R2:
        return BoundEntry(name, float("nan"), "not-applicable", {}, "eigenvalue must be nonzero")
    y, x, lam = _upper_block_eig(orig, orig_block)
    _, xt, lam_t = _upper_block_eig(pert, pert_block)
    n = qp.base.n
    y, x, xt = y[:, 0], x[:, 0], xt[:, 0]
    d = qep_deltas(qp, norm)
    s = spec_norm(np.linalg.inv(orig.X)) * spec_norm(pert.X)
    coupling = abs(np.vdot(y, pp.orig.B @ xt))
    ddp = delta_d_printed(qp, x[:n] / np.linalg.norm(x[:n]), xt[:n] / np.linalg.norm(xt[:n]), lam, lam_t)
    num = s * (d["delta_a"] + d["delta_b"] + d["delta_c"])
    den = coupling - s * (d["delta_b"] + d["delta_c"])
    f = {"lam": lam, "lam_pert": lam_t, "scale": s, "yBx": coupling,
         "delta_d_printed": ddp, "norm_X_inv": s / spec_norm(pert.X), "norm_Xt": spec_norm(pert.X),
         "kappa": float(np.linalg.cond(orig.X)), "kappa_pert": float(np.linalg.cond(pert.X)), **d}
    if num == 0:
        return BoundEntry(name, 0.0, "ok", f, "zero perturbation")
    if den <= 0:
        return BoundEntry(name, float("nan"), "vacuous", f, "denominator not positive")
    return BoundEntry(name, float(num / den), "ok", f)


def qep_eig_bound_jordan(qp: QepPerturbation, orig: EigStructure, pert: EigStructure,
                         orig_block: int, pert_block: int) -> BoundEntry:
    """Jordan-block eigenvalue bound with ``da_F, db_F`` in place of the pair norms."""
    pp = _pp(qp)
    e = eig_bound_jordan(pp, orig, pert, orig_block, pert_block)
    e.name = "qep_eig_jordan"
    if e.status == "not-applicable":
        return e
    f = e.factors
    da, db = qep_deltas_frobenius(qp)
    lead = 2 * f["norm_X_inv"] * f["norm_Xt"] / f["coupling"]
    e.value = float(lead * np.hypot(f["binom1"] * da, f["binom2"] * db))
    f.update({"da_F": da, "db_F": db,
              "rhs_swapped_binomials": float(lead * np.hypot(f["binom2"] * da, f["binom1"] * db))})
    return e


def _definite_factor(h, name):
    """``(s, L)`` with ``h = s L L^H``; raises when ``h`` is indefinite."""
    for s in (1.0, -1.0):
        try:
            return s, np.linalg.cholesky(s * h)
        except np.linalg.LinAlgError:
            continue
    raise NotApplicableError(f"{name} is not definite")


def hyperbolic_pair(t: HermitianTriple, s: float, LK, LM) -> MatrixPair:
    """Pair ``(A0, J)`` whose eigenvalues are the reciprocals ``1/lambda``."""
    n = t.n
    LKi = np.linalg.inv(LK)
    A0 = np.block([[LKi @ t.C @ LKi.conj().T, LKi @ LM], [LM.conj().T @ LKi.conj().T, np.zeros((n, n))]])
    J = np.block([[-s * np.eye(n), np.zeros((n, n))], [np.zeros((n, n)), np.eye(n)]])
    return MatrixPair(A0, J)


def hyperbolicity_certificate(t: HermitianTriple) -> float | None:
    """Return ``mu`` with ``Q(mu)`` negative definite, or ``None``.

    Requires ``M`` positive definite and a real spectrum; ``mu`` is taken
    between the ``n``-th and ``(n+1)``-th eigenvalues in ascending order.
    """
    try:
        np.linalg.cholesky(t.M)
    except np.linalg.LinAlgError:
        return None
    vals = eig_pair(linearize(t)).values
    if np.any(np.abs(vals.imag) > 1e-8 * np.maximum(1.0, np.abs(vals))):
        return None
    r = np.sort(vals.real)
    n = t.n
    if r[n] - r[n - 1] <= 0:
        return None
    mu = 0.5 * (r[n - 1] + r[n])
    q = mu**2 * t.M + mu * t.C + t.K
    if np.linalg.eigvalsh(q).max() < 0:
        return float(mu)
    return None


def hyperbolic_bound(qp: QepPerturbation, i: int) -> BoundEntry:
    """Comparison bound for hyperbolic problems on the reciprocal pair ``(A0, J)``.

    ``kappa(X) kappa(X~) (||A0^-1 dA0||_F / g + ||J dJ||_F / g~)`` with the
    relative gaps ``g = min_{j != i} |lam_i - lam~_j| / |lam_i|`` and
    ``g~ = min_{j != i} |lam_i - lam~_j| / |lam~_j|``. ``i`` indexes the
    eigenvalues of the L1 pair in :func:`eig_pair` order.
    """
    name = "hyperbolic"
    t, tp = qp.base, qp.perturbed
    if hyperbolicity_certificate(t) is None or hyperbolicity_certificate(tp) is None:
        return BoundEntry(name, float("nan"), "not-applicable", {}, "problem is not hyperbolic")
    try:
        s, LK = _definite_factor(t.K, "K")
        _, LM = _definite_factor(t.M, "M")
    except NotApplicableError as exc:
        return BoundEntry(name, float("nan"), "not-applicable", {}, str(exc))
    LKi, LMi = np.linalg.inv(LK), np.linalg.inv(LM)
    n = t.n
    Z = np.zeros((n, n))
    dA0 = np.block([[LKi @ qp.dC @ LKi.conj().T, LKi @ qp.dM @ LMi.conj().T],
                    [LMi @ qp.dM @ LKi.conj().T, Z]])
    dJ = np.block([[-LKi @ qp.dK @ LKi.conj().T, Z], [Z, LMi @ qp.dM @ LMi.conj().T]])
    P = hyperbolic_pair(t, s, LK, LM)
    Pt = MatrixPair(P.A + dA0, P.B + dJ)
    lam = eig_pair(linearize(t)).values
    lam_t = eig_pair(linearize(tp)).values
    lam_t = lam_t[match_spectra(lam, lam_t)]
    others = [j for j in range(len(lam)) if j != i]
    g = min(abs(lam[i] - lam_t[j]) / abs(lam[i]) for j in others)
    gt = min(abs(lam[i] - lam_t[j]) / abs(lam_t[j]) for j in others)
    if g <= 0 or gt <= 0:
        return BoundEntry(name, float("nan"), "not-applicable", {}, "relative gap vanished")
    st = structure_from_pair(P)
    stt = structure_from_pair(Pt)
    kx, kxt = float(np.linalg.cond(st.X)), float(np.linalg.cond(stt.X))
    a0 = fro_norm(np.linalg.solve(P.A, dA0))
    jj = fro_norm(P.B @ dJ)
    value = kx * kxt * (a0 / g + jj / gt)
    # exact angle between the matched eigenvectors of the reciprocal pairs
    mu = st.column_eigenvalues()
    mut = stt.column_eigenvalues()
    k = int(np.argmin(np.abs(mu - 1 / lam[i])))
    kt = int(np.argmin(np.abs(mut - 1 / lam_t[i])))
    exact = sin_theta_norm(st.X[:, k], stt.X[:, kt], "2")
    f = {"kappa": kx, "kappa_pert": kxt, "A0_rel": a0, "J_rel": jj, "gap": g, "gap_pert": gt,
         "sign_K": s, "exact_reciprocal_angle": exact, "lam": lam[i]}
    return BoundEntry(name, float(value), "ok", f)


def save_triple(directory, t: HermitianTriple, transform: str = "none") -> str:
    """Write ``M, C, K`` as Matrix Market files plus a JSON manifest; return its path."""
    os.makedirs(directory, exist_ok=True)
    paths = {}
    for key, mat in (("M", t.M), ("C", t.C), ("K", t.K)):
        p = os.path.join(directory, f"{key}.mtx")
        mmio.write_mm(p, mat, hermitian=True)
        paths[key] = f"{key}.mtx"
    manifest = os.path.join(directory, "manifest.json")
    with open(manifest, "w") as fh:
        json.dump({**paths, "transform": transform}, fh, indent=1)
    return manifest


def load_triple(manifest) -> HermitianTriple:
    """Read a manifest; ``transform = "gyro"`` maps ``(M, C, K)`` to ``(M, iC, -K)``."""
    with open(manifest) as fh:
        spec = json.load(fh)
    base = os.path.dirname(os.path.abspath(manifest))
    mats = {}
    for key in ("M", "C", "K"):
        p = spec[key]
        mats[key] = mmio.read_mm(p if os.path.isabs(p) else os.path.join(base, p))
    tr = spec.get("transform", "none")
    if tr == "gyro":
        return HermitianTriple(mats["M"], 1j * mats["C"], -mats["K"])
    if tr != "none":
        raise ValueError(f"unknown transform {tr!r}")
    return HermitianTriple(mats["M"], mats["C"], mats["K"])
