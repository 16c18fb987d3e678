"""Structured Sylvester equations between canonical blocks and their norm bounds.

For a block ``(Lam, Om)`` with eigenvalue ``lam`` and a block ``(Lam', Om')``
with eigenvalue ``lam'`` the continuous form is

    (Om' Lam')^H Y - Y (Om Lam) = -(Om' Lam')^H M + N (Om Lam)

and, when ``lam'`` is infinite,

    Y - (Lam' Om')^H Y (Om Lam) = -M + (Lam' Om')^H N (Om Lam).

With column-stacking ``vec`` the solution is
``vec Y = -W1^H vec M + W2^H vec N``; the coefficients ``alpha1, alpha2``
bound ``||W1||_2`` and ``||W2||_2``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .canonical import MAX_BLOCK, BlockSpec, Kind, build_block
from .errors import DisjointnessError, GapCollapseError, SizeLimitError

ALPHA_ONE_TOL = 1e-8
MAX_KRON = 4096
SOLVE_TOL = 1e-10


def _check_phi(a: float, m: int):
    if m < 0:
        raise ValueError("m must be nonnegative")
    if not a > 0:
        raise ValueError("alpha must be positive")


def phi_minus(a: float, m: int) -> float:
    """``a^(1-m) (1 - a^m) / (1 - a)``, i.e. ``sum_{i=1}^m a^(1-i)``; 0 for ``m = 0``."""
    _check_phi(a, m)
    if m == 0:
        return 0.0
    if abs(a - 1.0) < ALPHA_ONE_TOL:
        return float(sum(a ** (1 - i) for i in range(1, m + 1)))
    return float(a ** (1 - m) * (1 - a**m) / (1 - a))


def phi_plus(a: float, m: int) -> float:
    """``a^(-m) (1 + a - 2 a^m) / (1 - a)``, equal to ``2 sum_{i=1}^{m-1} a^-i + a^-m``."""
    _check_phi(a, m)
    if abs(a - 1.0) < ALPHA_ONE_TOL:
        return float(2 * sum(a ** (-i) for i in range(1, m)) + a ** (-m))
    return float(a ** (-m) * (1 + a - 2 * a**m) / (1 - a))


def rel_gaps(lam: complex, lam_p: complex) -> tuple[float, float]:
    """Relative distances of ``lam`` to ``{lam', conj(lam')}`` scaled by ``|lam|`` and ``|lam'|``."""
    if lam == 0 or lam_p == 0 or not (np.isfinite(lam) and np.isfinite(lam_p)):
        raise ValueError("relative gaps need finite nonzero eigenvalues")
    d = min(abs(lam_p - lam), abs(np.conj(lam_p) - lam))
    return float(d / abs(lam)), float(d / abs(lam_p))


@dataclass(frozen=True)
class EigClass:
    """Eigenvalue of one canonical block together with its Jordan size."""

    value: complex
    size: int
    kind: Kind

    @classmethod
    def from_block(cls, b: BlockSpec) -> "EigClass":
        return cls(b.eig, b.size, b.kind)

    @property
    def is_infinite(self) -> bool:
        return self.kind is Kind.R1

    @property
    def is_zero(self) -> bool:
        return self.kind is Kind.R2


def _check_size(m: int):
    if not 1 <= m <= MAX_BLOCK:
        raise SizeLimitError(f"block size {m} outside 1..{MAX_BLOCK}")


def alpha_coeffs(lam: EigClass, lam_p: EigClass) -> tuple[float, float]:
    """Bounds ``(alpha1, alpha2)`` on ``||W1||_2, ||W2||_2`` for one block pair.

    ``lam`` belongs to the block on the right of ``Y`` and must be finite;
    ``lam_p`` belongs to the block on the left and may be infinite.
    """
    n, npr = lam.size, lam_p.size
    _check_size(n)
    _check_size(npr)
    if lam.is_infinite:
        raise DisjointnessError("the right-hand block must have a finite eigenvalue")
    if lam.is_zero and lam_p.is_zero:
        raise DisjointnessError("both blocks carry the zero eigenvalue")
    if lam_p.is_infinite:
        if lam.is_zero:
            k = min(n, npr)
            return float(k), float(k - 1)
        r = abs(lam.value)
        a = 2 * r * phi_minus(1 / (2 * r), npr - 1)
        return a + 1.0, a
    if lam.is_zero:
        r = abs(lam_p.value)
        a = math.comb(npr + n - 1, n) / r * phi_minus(r, n - 1)
        return a + 1.0, a
    if lam_p.is_zero:
        r = abs(lam.value)
        a = math.comb(npr + n - 1, npr) / r * phi_minus(r, npr - 1)
        return a, a + 1.0
    g, gp = rel_gaps(lam.value, lam_p.value)
    if g == 0.0:
        raise GapCollapseError(f"eigenvalues {lam.value} and {lam_p.value} coincide")
    a1 = math.comb(npr + n - 1, n) * phi_minus(g, n) * phi_plus(gp, npr)
    a2 = math.comb(npr + n - 1, npr) * phi_minus(gp, npr) * phi_plus(g, n)
    return float(a1), float(a2)


@dataclass(frozen=True)
class BoundCoefficients:
    """Maxima of ``alpha1, alpha2`` over all block pairs, with the maximizing pairs."""

    alpha1: float
    alpha2: float
    arg1: tuple = field(default=())
    arg2: tuple = field(default=())


def alpha_max(group1_pert, group2_orig) -> BoundCoefficients:
    """Maximise the coefficients over perturbed group-1 and original group-2 blocks."""
    best1 = best2 = -np.inf
    arg1 = arg2 = ()
    for i, a in enumerate(group1_pert):
        a = a if isinstance(a, EigClass) else EigClass.from_block(a)
        for j, b in enumerate(group2_orig):
            b = b if isinstance(b, EigClass) else EigClass.from_block(b)
            c1, c2 = alpha_coeffs(a, b)
            if c1 > best1:
                best1, arg1 = c1, (i, j)
            if c2 > best2:
                best2, arg2 = c2, (i, j)
    if best1 == -np.inf:
        best1 = best2 = 0.0
    return BoundCoefficients(float(best1), float(best2), arg1, arg2)


def _form(block_p: BlockSpec, form):
    if form is None:
        return "disc" if block_p.kind is Kind.R1 else "cont"
    if form not in ("cont", "disc"):
        raise ValueError(f"unknown form {form!r}")
    return form


def _systems(block: BlockSpec, block_p: BlockSpec, form=None):
    form = _form(block_p, form)
    lam, om = build_block(block)
    lam_p, om_p = build_block(block_p)
    d, dp = block.dim, block_p.dim
    if d * dp > MAX_KRON:
        raise SizeLimitError(f"Kronecker system of order {d * dp} exceeds {MAX_KRON}")
    s = om @ lam
    if form == "cont":
        sp = (om_p @ lam_p).conj().T
        left = np.kron(np.eye(d), sp)
        right = np.kron(s.T, np.eye(dp))
        K = left - right
        return form, K, left, right, s, sp
    t = (lam_p @ om_p).conj().T
    right = np.kron(s.T, t)
    K = np.eye(d * dp) - right
    return form, K, np.eye(d * dp), right, s, t


def _factor(K):
    s = np.linalg.svd(K, compute_uv=False)
    if s[-1] <= 1e-14 * max(1.0, s[0]):
        raise DisjointnessError("the Sylvester operator is singular (shared eigenvalue)")
    return sla.lu_factor(K)


def solve_structured_sylvester(block: BlockSpec, block_p: BlockSpec, M, N, form=None) -> np.ndarray:
    """Solve the structured equation for ``Y`` (shape ``dim(block_p) x dim(block)``)."""
    form, K, left, right, s, sp = _systems(block, block_p, form)
    M = np.asarray(M, dtype=complex)
    N = np.asarray(N, dtype=complex)
    shape = (block_p.dim, block.dim)
    if M.shape != shape or N.shape != shape:
        raise ValueError(f"M and N must have shape {shape}")
    lu = _factor(K)
    vm, vn = M.reshape(-1, order="F"), N.reshape(-1, order="F")
    y = sla.lu_solve(lu, -left @ vm + right @ vn)
    Y = y.reshape(shape, order="F")
    if form == "cont":
        lhs = sp @ Y - Y @ s
        rhs = -sp @ M + N @ s
    else:
        lhs = Y - sp @ Y @ s
        rhs = -M + sp @ N @ s
    scale = max(1.0, np.linalg.norm(rhs), np.linalg.norm(Y) * (np.linalg.norm(s) + np.linalg.norm(sp)))
    if np.linalg.norm(lhs - rhs) > SOLVE_TOL * scale:
        raise DisjointnessError("Sylvester residual check failed (near-singular operator)")
    return Y


def w_matrices(block: BlockSpec, block_p: BlockSpec, form=None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(W1, W2)``; ``W1 - W2 = I`` holds identically."""
    form, K, left, right, _, _ = _systems(block, block_p, form)
    lu = _factor(K)
    w1h = sla.lu_solve(lu, left)
    w2h = sla.lu_solve(lu, right)
    return w1h.conj().T, w2h.conj().T


CASE_LABELS = {
    (Kind.R3, Kind.R3): "cont-1",
    (Kind.R4, Kind.R4): "cont-2",
    (Kind.R2, Kind.R3): "cont-3",
    (Kind.R2, Kind.R4): "cont-4",
    (Kind.R3, Kind.R4): "cont-5",
    (Kind.R3, Kind.R2): "cont-6",
    (Kind.R4, Kind.R2): "cont-7",
    (Kind.R4, Kind.R3): "cont-8",
    (Kind.R2, Kind.R1): "disc-1",
    (Kind.R3, Kind.R1): "disc-2",
    (Kind.R4, Kind.R1): "disc-3",
}


@dataclass(frozen=True)
class CaseEstimate:
    """Per-case norm estimates for ``W1`` and ``W2``."""

    case: str
    w1: float
    w2: float
    printed_alt: tuple | None = None


def case_estimates(block: BlockSpec, block_p: BlockSpec) -> CaseEstimate:
    """Closed-form norm estimates for the block pair, labelled by case.

    Every case reduces to :func:`alpha_coeffs`. The zero-versus-non-real case
    also carries an alternative pair of expressions, ``C phi_-(|lam'|, n)`` and
    ``C phi_-(|lam'|, n') - 1``, in ``printed_alt``; the second one is not a
    valid bound in general and is kept only for diagnosis.
    """
    key = (block.kind, block_p.kind)
    if key not in CASE_LABELS:
        raise DisjointnessError(f"no estimate for block kinds {key}")
    a1, a2 = alpha_coeffs(EigClass.from_block(block), EigClass.from_block(block_p))
    alt = None
    if key == (Kind.R2, Kind.R4):
        n, npr, r = block.size, block_p.size, abs(block_p.eig)
        c = math.comb(npr + n - 1, n)
        alt = (c * phi_minus(r, n), c * phi_minus(r, npr) - 1.0)
    return CaseEstimate(CASE_LABELS[key], a1, a2, alt)


@dataclass
class AuditCase:
    index: int
    block: BlockSpec
    block_p: BlockSpec
    case: str
    w1: float
    w2: float
    est1: float
    est2: float
    identity_defect: float
    y_norm: float = 0.0
    y_bound: float = 0.0

    @property
    def slack(self) -> float:
        """Smallest relative margin ``(est - actual) / max(1, est)`` over ``W1``, ``W2`` and ``Y``."""
        s1 = (self.est1 - self.w1) / max(1.0, self.est1)
        s2 = (self.est2 - self.w2) / max(1.0, self.est2)
        s3 = (self.y_bound - self.y_norm) / max(1.0, self.y_bound)
        return float(min(s1, s2, s3))


@dataclass
class AuditResult:
    cases: list
    min_slack: float
    max_identity_defect: float
    per_case: dict
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


_KIND_PAIRS = list(CASE_LABELS)


def _random_eig(rng, kind: Kind, lo: float, hi: float) -> complex:
    r = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    if kind is Kind.R3:
        return complex(r * rng.choice([-1.0, 1.0]))
    if kind is Kind.R4:
        th = rng.uniform(0.05, np.pi - 0.05)
        return complex(r * np.exp(1j * th))
    return 0j


def random_case(seed: int, index: int, max_size: int = 4, min_gap: float = 0.05,
                lo: float = 0.1, hi: float = 10.0) -> tuple[BlockSpec, BlockSpec]:
    """Deterministic random block pair; kind pairs cycle through every case."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    k, kp = _KIND_PAIRS[index % len(_KIND_PAIRS)]
    max_size = max(1, min(max_size, MAX_BLOCK))
    while True:
        n = int(rng.integers(1, max_size + 1))
        npr = int(rng.integers(1, max_size + 1))
        lam = _random_eig(rng, k, lo, hi)
        lam_p = _random_eig(rng, kp, lo, hi)
        if k not in (Kind.R1, Kind.R2) and kp not in (Kind.R1, Kind.R2):
            g, gp = rel_gaps(lam, lam_p)
            if min(g, gp) < min_gap:
                continue
        b = BlockSpec(k, n, int(rng.choice([-1, 1])) if k is not Kind.R4 else 1, lam)
        bp = BlockSpec(kp, npr, int(rng.choice([-1, 1])) if kp is not Kind.R4 else 1, lam_p)
        return b, bp


def _unit_fro(rng, shape) -> np.ndarray:
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return z / np.linalg.norm(z)


def _audit_one(seed, index, max_size) -> AuditCase:
    b, bp = random_case(seed, index, max_size)
    w1, w2 = w_matrices(b, bp)
    est = case_estimates(b, bp)
    rng = np.random.default_rng(np.random.SeedSequence([seed, index, 1]))
    shape = (bp.dim, b.dim)
    M, N = _unit_fro(rng, shape), _unit_fro(rng, shape)
    Y = solve_structured_sylvester(b, bp, M, N)
    return AuditCase(
        index=index,
        block=b,
        block_p=bp,
        case=est.case,
        w1=float(np.linalg.norm(w1, 2)),
        w2=float(np.linalg.norm(w2, 2)),
        est1=est.w1,
        est2=est.w2,
        identity_defect=float(np.abs(w1 - w2 - np.eye(w1.shape[0])).max()),
        y_norm=float(np.linalg.norm(Y)),
        y_bound=est.w1 + est.w2,
    )


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("QEP_PERTURB_THREADS", "1")))
    except ValueError:
        return 1


def audit(cases: int, max_size: int = 4, seed: int = 0, slack_tol: float = -1e-10,
          threads: int | None = None) -> AuditResult:
    """Compare ``||W1||_2, ||W2||_2`` and ``||Y||_F`` (unit-Frobenius ``M, N``)
    with the closed-form estimates on random cases."""
    threads = threads or thread_count()
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(lambda i: _audit_one(seed, i, max_size), range(cases)))
    else:
        results = [_audit_one(seed, i, max_size) for i in range(cases)]
    per_case: dict = {}
    for r in results:
        c = per_case.setdefault(r.case, {"count": 0, "min_slack": np.inf})
        c["count"] += 1
        c["min_slack"] = min(c["min_slack"], r.slack)
    failures = [r for r in results if r.slack < slack_tol or r.identity_defect > 1e-10]
    return AuditResult(
        cases=results,
        min_slack=min((r.slack for r in results), default=np.inf),
        max_identity_defect=max((r.identity_defect for r in results), default=0.0),
        per_case=per_case,
        failures=failures,
    )
