"""Relative perturbation bounds for Hermitian pairs.

All bounds take the original and perturbed canonical structures (with their
group-1 selections) and return a :class:`BoundEntry` recording the value
together with every factor that went into it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .canonical import EigStructure, Kind, validate_assumptions
from .errors import NotApplicableError
from .linalg import (
    MatrixPair,
    fro_norm,
    is_singular,
    pinv,
    sigma_min,
    spec_norm,
)
from .sylvester import alpha_max

JORDAN_GAP_LIMIT = (5 - math.sqrt(17)) / 4


@dataclass(frozen=True)
class PairPerturbation:
    orig: MatrixPair
    pert: MatrixPair

    def __post_init__(self):
        if self.orig.A.shape != self.pert.A.shape:
            raise ValueError("original and perturbed pairs differ in size")

    @property
    def dA(self) -> np.ndarray:
        return self.pert.A - self.orig.A

    @property
    def dB(self) -> np.ndarray:
        return self.pert.B - self.orig.B


@dataclass
class BoundEntry:
    """One evaluated bound.

    ``status`` is ``ok``, ``fallback`` (a weaker variant was used),
    ``vacuous`` (a denominator was not positive), ``not-applicable`` or
    ``precondition-violated``; ``value`` is ``nan`` unless the bound holds.
    """

    name: str
    value: float
    status: str = "ok"
    factors: dict = field(default_factory=dict)
    note: str = ""

    @property
    def valid(self) -> bool:
        return self.status in ("ok", "fallback") and np.isfinite(self.value)


def _norm(a, norm: str) -> float:
    if norm == "fro":
        return fro_norm(a)
    if norm in ("2", "spec"):
        return spec_norm(a)
    raise ValueError(f"unknown norm {norm!r}")


def relative_terms(pp: PairPerturbation, norm: str = "fro") -> dict:
    """``||A^+ dA||``, ``||B^-1 dB||`` (or ``||B^+ dB||``) and ``||B~^+ dB||``."""
    a = _norm(pinv(pp.orig.A) @ pp.dA, norm)
    if is_singular(pp.orig.B):
        b = _norm(pinv(pp.orig.B) @ pp.dB, norm)
    else:
        b = _norm(np.linalg.solve(pp.orig.B, pp.dB), norm)
    bt = _norm(pinv(pp.pert.B) @ pp.dB, norm)
    return {"a": a, "b": b, "b_pert": bt}


def _not_applicable(name, report) -> BoundEntry:
    return BoundEntry(name, float("nan"), "not-applicable",
                      {"failed": report.failures()}, "assumption check failed")


def _coefficients(orig: EigStructure, pert: EigStructure):
    g1 = [pert.blocks[i] for i in pert.group_blocks(1)]
    g2 = [orig.blocks[i] for i in orig.group_blocks(2)]
    return alpha_max(g1, g2)


def _conds(orig: EigStructure, pert: EigStructure) -> dict:
    X, Xt = orig.X, pert.X
    nx, nxi = spec_norm(X), spec_norm(np.linalg.inv(X))
    nxt, nxti = spec_norm(Xt), spec_norm(np.linalg.inv(Xt))
    return {
        "norm_X": nx, "norm_X_inv": nxi, "norm_Xt": nxt, "norm_Xt_inv": nxti,
        "kappa": nx * nxi, "kappa_pert": nxt * nxti,
    }


def sin_theta_bound_regular(pp: PairPerturbation, orig: EigStructure, pert: EigStructure,
                            gap_tol: float = 1e-6) -> BoundEntry:
    """Subspace bound valid for regular pairs with possibly singular ``B``.

    ``alpha1 kappa(X) kappa(X~) ||A^+ dA||_F + alpha2 ||X||^2 ||X~^-1||^2 ||B~^+ dB||_F``.
    """
    name = "subspace_regular"
    rep = validate_assumptions(orig, pert, gap_tol)
    if not rep.ok:
        return _not_applicable(name, rep)
    coef = _coefficients(orig, pert)
    t = relative_terms(pp)
    c = _conds(orig, pert)
    value = (coef.alpha1 * c["kappa"] * c["kappa_pert"] * t["a"]
             + coef.alpha2 * c["norm_X"] ** 2 * c["norm_Xt_inv"] ** 2 * t["b_pert"])
    return BoundEntry(name, float(value), "ok",
                      {"alpha1": coef.alpha1, "alpha2": coef.alpha2, **t, **c})


def sin_theta_bound_B_nonsingular(pp: PairPerturbation, orig: EigStructure, pert: EigStructure,
                                  gap_tol: float = 1e-6) -> BoundEntry:
    """``kappa(X) kappa(X~) (alpha1 ||A^+ dA||_F + alpha2 ||B^-1 dB||_F)``."""
    name = "subspace"
    if is_singular(pp.orig.B):
        e = sin_theta_bound_regular(pp, orig, pert, gap_tol)
        if e.status == "ok":
            e.status = "fallback"
        e.note = "B is singular; used the general regular-pair bound"
        return e
    rep = validate_assumptions(orig, pert, gap_tol)
    if not rep.ok:
        return _not_applicable(name, rep)
    coef = _coefficients(orig, pert)
    t = relative_terms(pp)
    c = _conds(orig, pert)
    value = c["kappa"] * c["kappa_pert"] * (coef.alpha1 * t["a"] + coef.alpha2 * t["b"])
    return BoundEntry(name, float(value), "ok",
                      {"alpha1": coef.alpha1, "alpha2": coef.alpha2, **t, **c})


@dataclass(frozen=True)
class GapParameters:
    """Certified gap ``(alpha, delta)`` and the exponent ``p``.

    ``config`` is 1 when ``||Om2 Lam2|| <= alpha`` and
    ``sigma_min(Om~1 Lam~1) >= alpha + delta``, and 2 for the mirrored case.
    """

    alpha: float
    delta: float
    p: float = 2.0
    config: int = 1

    def __post_init__(self):
        if not (self.alpha >= 0 and self.delta > 0 and self.p >= 1):
            raise ValueError("need alpha >= 0, delta > 0 and p >= 1")
        if self.config not in (1, 2):
            raise ValueError("config must be 1 or 2")

    @property
    def q(self) -> float:
        return math.inf if self.p == 1 else self.p / (self.p - 1)

    @property
    def mu(self) -> float:
        a, d, p = self.alpha, self.delta, self.p
        return d / (a**p + (a + d) ** p) ** (1 / p)


def certify_gap(orig: EigStructure, pert: EigStructure, p: float = 2.0) -> GapParameters:
    """Gap parameters from the assembled canonical blocks; raises if none holds."""
    lam2, om2 = orig.assembled(2)
    lam1, om1 = pert.assembled(1)
    s2, s1 = om2 @ lam2, om1 @ lam1
    if s1.size == 0 or s2.size == 0:
        raise NotApplicableError("both groups must be nonempty")
    a = spec_norm(s2)
    lo = sigma_min(s1)
    if lo > a:
        return GapParameters(a, lo - a, p, 1)
    a = spec_norm(s1)
    lo = sigma_min(s2)
    if lo > a:
        return GapParameters(a, lo - a, p, 2)
    raise NotApplicableError("no gap configuration separates the two groups")


def _holder(a: float, b: float, q: float) -> float:
    if math.isinf(q):
        return max(a, b)
    return (a**q + b**q) ** (1 / q)


def sin_theta_bound_ui(pp: PairPerturbation, orig: EigStructure, pert: EigStructure,
                       gp: GapParameters | None = None, norm: str = "fro",
                       gap_tol: float = 1e-6) -> tuple[BoundEntry, BoundEntry]:
    """Gap-based bounds for a unitarily invariant norm: ``(mu_form, split_form)``.

    ``mu_form = kappa kappa~ (||A^-1 dA||^q + ||B^-1 dB||^q)^(1/q) / mu`` and
    ``split_form = kappa kappa~ (||A^-1 dA|| alpha/delta + ||B^-1 dB|| (alpha+delta)/delta)``;
    in the mirrored configuration the two weights of the split form swap.
    """
    names = ("subspace_ui_mu", "subspace_ui_split")
    if is_singular(pp.orig.B) or is_singular(pp.pert.B):
        return tuple(BoundEntry(n, float("nan"), "not-applicable", {}, "B or B~ singular")
                     for n in names)
    rep = validate_assumptions(orig, pert, gap_tol)
    if not rep.ok:
        return tuple(_not_applicable(n, rep) for n in names)
    if gp is None:
        try:
            gp = certify_gap(orig, pert)
        except NotApplicableError as exc:
            return tuple(BoundEntry(n, float("nan"), "not-applicable", {}, str(exc)) for n in names)
    t = relative_terms(pp, norm)
    c = _conds(orig, pert)
    kk = c["kappa"] * c["kappa_pert"]
    a, b = t["a"], t["b"]
    mu_form = kk * _holder(a, b, gp.q) / gp.mu
    w_small, w_large = gp.alpha / gp.delta, (gp.alpha + gp.delta) / gp.delta
    if gp.config == 1:
        split = kk * (a * w_small + b * w_large)
    else:
        split = kk * (a * w_large + b * w_small)
    f = {"alpha_gap": gp.alpha, "delta_gap": gp.delta, "p": gp.p, "config": gp.config,
         "mu": gp.mu, **t, **c}
    return (BoundEntry(names[0], float(mu_form), "ok", dict(f)),
            BoundEntry(names[1], float(split), "ok", dict(f)))


def eigen_columns(st: EigStructure, block: int) -> tuple[np.ndarray, np.ndarray, complex]:
    """``(left, right, eigenvalue)`` columns of one block.

    For a conjugate-pair block the right columns belong to the stored
    eigenvalue and the left columns to its conjugate, so that
    ``left^H B right`` is the identity pattern of the canonical form.
    """
    b = st.blocks[block]
    cols = st.block_columns(block)
    X = st.X
    if b.kind is Kind.R4:
        m = b.size
        return X[:, cols[:m]], X[:, cols[m:]], b.eig
    return X[:, cols], X[:, cols], b.eig


def _upper_block_eig(st: EigStructure, block: int):
    left, right, lam = eigen_columns(st, block)
    if lam.imag < 0:
        right, left, lam = left, right, lam.conjugate()
    return left, right, lam


def eig_bound_semisimple(pp: PairPerturbation, orig: EigStructure, pert: EigStructure,
                         orig_block: int, pert_block: int, norm: str = "fro") -> BoundEntry:
    """Relative eigenvalue bound for a semi-simple nonzero eigenvalue.

    ``gamma = |lam~ - lam| / |lam|`` is bounded by
    ``||X^-1|| ||X~|| (a + b) / (|y^H B x~| - ||X^-1|| ||X~|| b)``, where ``y``
    is the left partner column of ``lam`` in the canonical ``X``. The variant
    with ``|y^H B~ x~|`` in the denominator is recorded as ``value_pert``.
    """
    name = "eig_semisimple"
    bo, bp = orig.blocks[orig_block], pert.blocks[pert_block]
    if bo.size != 1 or bp.size != 1 or bo.kind is Kind.R1 or bp.kind is Kind.R1:
        return BoundEntry(name, float("nan"), "not-applicable", {}, "blocks must be semi-simple and finite")
    if bo.kind is Kind.R2:
        return BoundEntry(name, float("nan"), "not-applicable", {}, "eigenvalue must be nonzero")
    y, _, lam = _upper_block_eig(orig, orig_block)
    _, xt, lam_t = _upper_block_eig(pert, pert_block)
    y, xt = y[:, 0], xt[:, 0]
    t = relative_terms(pp, norm)
    c = _conds(orig, pert)
    s = c["norm_X_inv"] * c["norm_Xt"]
    d0 = abs(np.vdot(y, pp.orig.B @ xt))
    d1 = abs(np.vdot(y, pp.pert.B @ xt))
    den = d0 - s * t["b"]
    f = {"lam": lam, "lam_pert": lam_t, "yBx": d0, "yBx_pert": d1, "scale": s, **t, **c,
         "value_pert": float(s * (t["a"] + t["b"]) / d1) if d1 > 0 else float("inf")}
    if den <= 0:
        return BoundEntry(name, float("nan"), "vacuous", f, "denominator not positive")
    return BoundEntry(name, float(s * (t["a"] + t["b"]) / den), "ok", f)


def jordan_gaps(lam: complex, lam_t: complex) -> tuple[float, float]:
    d = abs(lam_t - lam)
    return d / abs(lam), d / abs(lam_t)


def jordan_lhs(gamma: float, gamma_t: float, ell: int, ell_t: int) -> float:
    """``gamma^ell gamma~^ell~ / sqrt(gamma^2 + gamma~^2)``; 0 when both vanish."""
    den = math.hypot(gamma, gamma_t)
    if den == 0:
        return 0.0
    return gamma**ell * gamma_t**ell_t / den


def eig_bound_jordan(pp: PairPerturbation, orig: EigStructure, pert: EigStructure,
                     orig_block: int, pert_block: int) -> BoundEntry:
    """Bound for an eigenvalue of a Jordan block of size ``ell`` perturbed into one of size ``ell~``.

    Returns an entry whose ``value`` is the right-hand side; the left-hand side
    ``gamma^ell gamma~^ell~ / sqrt(gamma^2 + gamma~^2)`` is stored as factor
    ``lhs``. Both relative gaps must not exceed ``(5 - sqrt(17)) / 4``.
    """
    name = "eig_jordan"
    bo, bp = orig.blocks[orig_block], pert.blocks[pert_block]
    if bo.kind not in (Kind.R3, Kind.R4) or bp.kind not in (Kind.R3, Kind.R4):
        return BoundEntry(name, float("nan"), "not-applicable", {}, "eigenvalues must be finite and nonzero")
    ell, ell_t = bo.size, bp.size
    y, _, lam = _upper_block_eig(orig, orig_block)
    _, xt, lam_t = _upper_block_eig(pert, pert_block)
    g, gt = jordan_gaps(lam, lam_t)
    t = relative_terms(pp, "fro")
    c = _conds(orig, pert)
    coupling = fro_norm(y.conj().T @ pp.orig.B @ xt)
    c1 = math.comb(ell_t + ell - 1, ell)
    c2 = math.comb(ell_t + ell - 1, ell_t)
    rhs = (2 * c["norm_X_inv"] * c["norm_Xt"] / coupling
           * math.hypot(c1 * t["a"], c2 * t["b"]))
    lhs = jordan_lhs(g, gt, ell, ell_t)
    f = {"lam": lam, "lam_pert": lam_t, "gamma": g, "gamma_pert": gt, "lhs": lhs,
         "coupling": coupling, "binom1": c1, "binom2": c2, "ell": ell, "ell_pert": ell_t, **t, **c}
    if g > JORDAN_GAP_LIMIT or gt > JORDAN_GAP_LIMIT:
        return BoundEntry(name, float(rhs), "precondition-violated", f,
                          "relative gap exceeds (5 - sqrt(17))/4")
    return BoundEntry(name, float(rhs), "ok", f)
