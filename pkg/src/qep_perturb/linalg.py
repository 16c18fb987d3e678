"""Dense linear-algebra helpers shared by the bound and harness modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import (
    AccuracyError,
    NotHermitianError,
    RankDeficientError,
    SingularMatrixError,
)

HERM_TOL = 1e-12
RANK_TOL = 1e-12
EIG_TOL = 1e-8
STRUCT_TOL = 1e-8


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_square(a, name: str = "matrix") -> np.ndarray:
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def flip_matrix(m: int) -> np.ndarray:
    """Anti-identity of order ``m`` (ones on the anti-diagonal)."""
    if m < 1:
        raise ValueError("order must be positive")
    return np.fliplr(np.eye(m))


def shift_matrix(m: int) -> np.ndarray:
    """Anti-diagonal just above the main anti-diagonal.

    ``shift_matrix(m) @ flip_matrix(m)`` is the nilpotent superdiagonal shift.
    """
    if m < 1:
        raise ValueError("order must be positive")
    g = np.zeros((m, m))
    for i in range(m - 1):
        g[i, m - 2 - i] = 1.0
    return g


def jordan_block(lam: complex, m: int) -> np.ndarray:
    """Upper Jordan block ``lam*I + N`` of order ``m``."""
    return lam * np.eye(m, dtype=complex) + shift_matrix(m) @ flip_matrix(m)


def hermitian_defect(h) -> float:
    """Relative deviation of ``h`` from its Hermitian part (Frobenius)."""
    h = np.asarray(h)
    nrm = np.linalg.norm(h)
    if nrm == 0:
        return 0.0
    return float(np.linalg.norm(h - h.conj().T) / nrm)


def check_hermitian(h, name: str = "matrix", tol: float = HERM_TOL) -> np.ndarray:
    """Validate and symmetrize a nearly Hermitian matrix."""
    h = as_square(h, name)
    d = hermitian_defect(h)
    if d > tol:
        raise NotHermitianError(f"{name} is not Hermitian (relative defect {d:.3e})")
    return (h + h.conj().T) / 2


def fro_norm(a) -> float:
    return float(np.linalg.norm(a, "fro"))


def spec_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def sigma_min(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return np.inf
    return float(np.linalg.svd(a, compute_uv=False)[-1])


def cond2(a) -> float:
    """Spectral condition number ``sigma_max / sigma_min``."""
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    if s[0] == 0 or s[-1] <= RANK_TOL * s[0]:
        raise SingularMatrixError("matrix is numerically singular")
    return float(s[0] / s[-1])


def is_singular(a, tol: float = RANK_TOL) -> bool:
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    return bool(s[0] == 0 or s[-1] <= tol * s[0])


def pinv(a, tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse with a relative singular-value cutoff."""
    return np.linalg.pinv(np.asarray(a), rcond=tol)


def inv_checked(a, name: str = "matrix") -> np.ndarray:
    if is_singular(a):
        raise SingularMatrixError(f"{name} is numerically singular")
    return np.linalg.inv(a)


def kron(a, b) -> np.ndarray:
    return np.kron(a, b)


def chordal_distance(a: complex, b: complex) -> float:
    """Chordal distance on the Riemann sphere; handles infinities."""
    ainf, binf = np.isinf(a), np.isinf(b)
    if ainf and binf:
        return 0.0
    if ainf:
        return 1.0 / np.sqrt(1.0 + abs(b) ** 2)
    if binf:
        return 1.0 / np.sqrt(1.0 + abs(a) ** 2)
    return abs(a - b) / (np.sqrt(1.0 + abs(a) ** 2) * np.sqrt(1.0 + abs(b) ** 2))


def match_spectra(ref, other) -> np.ndarray:
    """Optimal one-to-one matching of two spectra under the chordal metric.

    Returns ``perm`` with ``other[perm[i]]`` matched to ``ref[i]``.
    """
    ref = np.asarray(ref, dtype=complex)
    other = np.asarray(other, dtype=complex)
    if ref.shape != other.shape:
        raise ValueError("spectra must have equal length")
    cost = np.array([[chordal_distance(a, b) for b in other] for a in ref])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(len(ref), dtype=int)
    perm[rows] = cols
    return perm


@dataclass(frozen=True)
class MatrixPair:
    """A Hermitian pencil ``A - lambda*B``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        a = check_hermitian(self.A, "A")
        b = check_hermitian(self.B, "B")
        if a.shape != b.shape:
            raise ValueError("A and B must have the same shape")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def b_nonsingular(self) -> bool:
        return not is_singular(self.B)

    def is_regular(self, samples: int = 3) -> bool:
        """Probabilistic regularity test: ``A - z*B`` nonsingular at random ``z``."""
        rng = np.random.default_rng(12345)
        scale = max(spec_norm(self.A), spec_norm(self.B), 1.0)
        for _ in range(samples):
            z = complex(rng.normal(), rng.normal())
            s = np.linalg.svd(self.A - z * self.B, compute_uv=False)
            if s[-1] > RANK_TOL * scale * (1 + abs(z)):
                return True
        return False


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (descending modulus, conjugates adjacent) and unit eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def _order(values: np.ndarray, tol: float) -> list[int]:
    idx = sorted(
        range(len(values)),
        key=lambda k: (-round(abs(values[k]), 12), -values[k].real, -values[k].imag),
    )
    out: list[int] = []
    left = list(idx)
    while left:
        k = left.pop(0)
        out.append(k)
        lam = values[k]
        if abs(lam.imag) > tol * max(1.0, abs(lam)) and left:
            j = min(left, key=lambda q: abs(values[q] - np.conj(lam)))
            if abs(values[j] - np.conj(lam)) <= 1e-6 * max(1.0, abs(lam)):
                left.remove(j)
                out.append(j)
    return out


def _residual_ok(a, b, lam, v) -> bool:
    r = np.linalg.norm(a @ v - lam * (b @ v))
    scale = (spec_norm(a) + abs(lam) * spec_norm(b)) * np.linalg.norm(v)
    return r <= EIG_TOL * scale


def eig_pair(pair: MatrixPair) -> EigenDecomposition:
    """Eigen-decomposition of a pencil with nonsingular ``B``.

    Eigenvectors are unit 2-norm. Any column failing the residual test gets
    one step of shifted inverse iteration before an ``AccuracyError`` is raised.
    """
    a, b = pair.A, pair.B
    if is_singular(b):
        raise SingularMatrixError("B is numerically singular")
    if not (np.any(a.imag) or np.any(b.imag)):
        a, b = a.real, b.real
    w, v = np.linalg.eig(np.linalg.solve(b, a))
    w = w.astype(complex)
    v = v.astype(complex)
    for k in range(len(w)):
        x = v[:, k]
        if not _residual_ok(a, b, w[k], x):
            shift = w[k] + 1e-10 * max(1.0, abs(w[k]))
            x = np.linalg.solve(a - shift * b, b @ x)
            x = x / np.linalg.norm(x)
            if not _residual_ok(a, b, w[k], x):
                raise AccuracyError(f"eigenpair {k} failed the residual check")
        v[:, k] = x / np.linalg.norm(x)
    order = _order(w, EIG_TOL)
    return EigenDecomposition(values=w[order], vectors=v[:, order])


def orth_basis(x, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of ``range(x)``; raises if ``x`` is rank deficient."""
    x = np.asarray(x, dtype=complex)
    if x.ndim == 1:
        x = x[:, None]
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    if s[0] == 0 or s[-1] <= tol * s[0]:
        raise RankDeficientError("basis is rank deficient")
    return u


def sin_theta(x, y) -> np.ndarray:
    """Diagonal of ``sin Theta`` between ``range(x)`` and ``range(y)``.

    Entries are the sines of the canonical angles, largest first.
    """
    qx, qy = orth_basis(x), orth_basis(y)
    if qx.shape != qy.shape:
        raise ValueError("subspaces must have equal dimension")
    s = np.linalg.svd(qy - qx @ (qx.conj().T @ qy), compute_uv=False)
    s = np.clip(s, 0.0, 1.0)
    return s


def sin_theta_norm(x, y, norm: str = "fro") -> float:
    s = sin_theta(x, y)
    if norm == "fro":
        return float(np.linalg.norm(s))
    if norm == "2":
        return float(s.max(initial=0.0))
    raise ValueError(f"unknown norm {norm!r}")


def nullspace(a, tol: float = 1e-8) -> np.ndarray:
    return sla.null_space(a, rcond=tol)
