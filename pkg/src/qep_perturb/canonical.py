"""Canonical blocks of Hermitian pairs and congruence normalisation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import scipy.linalg as sla

from .errors import CannotNormalizeError, InvalidBlockError
from .linalg import (
    EIG_TOL,
    RANK_TOL,
    STRUCT_TOL,
    MatrixPair,
    eig_pair,
    flip_matrix,
    shift_matrix,
    spec_norm,
)

MAX_BLOCK = 20


class Kind(str, Enum):
    """Block kinds: infinite, zero, nonzero real and non-real eigenvalue."""

    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"


@dataclass(frozen=True)
class BlockSpec:
    """One canonical block.

    ``eig`` is ignored for R1 (infinite) and must be 0 for R2. For R4 it holds
    one member of the conjugate pair; the structure extractor stores the
    upper-half-plane member.
    """

    kind: Kind
    size: int
    sign: int = 1
    eig: complex = 0j

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError as exc:
            raise InvalidBlockError(f"unknown block kind {self.kind!r}") from exc
        object.__setattr__(self, "kind", kind)
        if not isinstance(self.size, (int, np.integer)) or not 1 <= self.size <= MAX_BLOCK:
            raise InvalidBlockError(f"block size must be in 1..{MAX_BLOCK}, got {self.size}")
        object.__setattr__(self, "size", int(self.size))
        if self.sign not in (1, -1):
            raise InvalidBlockError(f"sign must be +1 or -1, got {self.sign}")
        object.__setattr__(self, "sign", int(self.sign))
        lam = complex(self.eig)
        if kind is Kind.R1:
            lam = complex(np.inf)
        elif kind is Kind.R2:
            if lam != 0:
                raise InvalidBlockError("R2 blocks carry the zero eigenvalue")
        elif kind is Kind.R3:
            if lam.imag != 0 or lam.real == 0 or not np.isfinite(lam.real):
                raise InvalidBlockError(f"R3 needs a nonzero finite real eigenvalue, got {lam}")
        elif lam.imag == 0 or not np.isfinite(lam):
            raise InvalidBlockError(f"R4 needs a finite non-real eigenvalue, got {lam}")
        object.__setattr__(self, "eig", lam)

    @property
    def dim(self) -> int:
        return 2 * self.size if self.kind is Kind.R4 else self.size

    @property
    def eigenvalue(self) -> complex:
        return self.eig

    def column_eigenvalues(self) -> list[complex]:
        """Eigenvalue attached to each column of the block, in column order."""
        if self.kind is Kind.R4:
            return [self.eig.conjugate()] * self.size + [self.eig] * self.size
        return [self.eig] * self.size

    def upper(self) -> "BlockSpec":
        """Same block with the upper-half-plane member stored."""
        if self.kind is Kind.R4 and self.eig.imag < 0:
            return replace(self, eig=self.eig.conjugate())
        return self

    def to_dict(self) -> dict:
        lam = self.eig if self.kind is not Kind.R1 else 0j
        return {
            "kind": self.kind.value,
            "size": self.size,
            "sign": self.sign,
            "eig": [float(lam.real), float(lam.imag)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BlockSpec":
        eig = d.get("eig", [0.0, 0.0])
        return cls(Kind(d["kind"]), int(d["size"]), int(d.get("sign", 1)), complex(eig[0], eig[1]))


def blocks_to_json(blocks) -> str:
    return json.dumps([b.to_dict() for b in blocks])


def blocks_from_json(text: str) -> list[BlockSpec]:
    return [BlockSpec.from_dict(d) for d in json.loads(text)]


def build_block(spec: BlockSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Lambda, Omega)`` for one canonical block."""
    m, s = spec.size, spec.sign
    F, G = flip_matrix(m), shift_matrix(m)
    if spec.kind is Kind.R1:
        return s * F.astype(complex), s * G.astype(complex)
    if spec.kind is Kind.R2:
        return s * G.astype(complex), s * F.astype(complex)
    if spec.kind is Kind.R3:
        a = spec.eig.real
        return s * (a * F + abs(a) * G).astype(complex), s * F.astype(complex)
    b = spec.eig
    S = b * F + abs(b) * G
    Z = np.zeros((m, m), dtype=complex)
    lam = np.block([[Z, S], [S.conj().T, Z]])
    return lam, flip_matrix(2 * m).astype(complex)


def scaling_diag(value: complex, m: int) -> np.ndarray:
    """``diag(|v|^((m-1)/2 - i))`` for ``i = 0..m-1``."""
    if m < 1:
        raise InvalidBlockError("scaling size must be at least 1")
    v = abs(value)
    if v == 0 or not np.isfinite(v):
        raise InvalidBlockError("scaling needs a finite nonzero value")
    return np.diag([v ** ((m - 1) / 2 - i) for i in range(m)])


def modified_scaling(spec, m: int | None = None) -> np.ndarray:
    """Diagonal ``T`` with ``T^H F T = F`` and ``T^H G T = |v| G``.

    Accepts a :class:`BlockSpec` (identity for R1 and R2, doubled for R4)
    or a value ``v`` together with the size ``m``.
    """
    if not isinstance(spec, BlockSpec):
        if m is None:
            raise TypeError("size m is required when a value is given")
        return scaling_diag(spec, m)
    if spec.kind in (Kind.R1, Kind.R2):
        return np.eye(spec.dim)
    t = scaling_diag(spec.eig, spec.size)
    if spec.kind is Kind.R4:
        return sla.block_diag(t, t)
    return t


def assemble(blocks) -> tuple[np.ndarray, np.ndarray]:
    """Direct sum of the blocks as ``(Lambda, Omega)``."""
    parts = [build_block(b) for b in blocks]
    if not parts:
        return np.zeros((0, 0), complex), np.zeros((0, 0), complex)
    return sla.block_diag(*[p[0] for p in parts]), sla.block_diag(*[p[1] for p in parts])


def pair_from_structure(blocks, X) -> MatrixPair:
    """Pair ``(A, B)`` with ``X^H (A, B) X`` equal to the assembled blocks."""
    lam, om = assemble(blocks)
    Xi = np.linalg.inv(np.asarray(X, dtype=complex))
    return MatrixPair(Xi.conj().T @ lam @ Xi, Xi.conj().T @ om @ Xi)


def _offsets(blocks) -> list[int]:
    out, k = [], 0
    for b in blocks:
        out.append(k)
        k += b.dim
    return out


@dataclass(frozen=True)
class EigStructure:
    """Congruence ``X`` and the canonical blocks it produces, with a grouping.

    ``group1`` holds block indices; every other block belongs to group 2.
    """

    blocks: tuple
    X: np.ndarray
    group1: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        X = np.asarray(self.X, dtype=complex)
        if X.shape != (sum(b.dim for b in self.blocks),) * 2:
            raise ValueError("X does not match the block dimensions")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "group1", frozenset(int(i) for i in self.group1))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def with_group1(self, group1) -> "EigStructure":
        return replace(self, group1=frozenset(group1))

    def block_columns(self, i: int) -> list[int]:
        off = _offsets(self.blocks)[i]
        return list(range(off, off + self.blocks[i].dim))

    def group_blocks(self, g: int) -> list[int]:
        if g == 1:
            return sorted(self.group1)
        return [i for i in range(len(self.blocks)) if i not in self.group1]

    def group_columns(self, g: int) -> list[int]:
        return [c for i in self.group_blocks(g) for c in self.block_columns(i)]

    def column_eigenvalues(self) -> np.ndarray:
        return np.array([v for b in self.blocks for v in b.column_eigenvalues()], dtype=complex)

    def group_eigenvalues(self, g: int) -> list[complex]:
        return [v for i in self.group_blocks(g) for v in self.blocks[i].column_eigenvalues()]

    def assembled(self, g: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        if g is None:
            return assemble(self.blocks)
        return assemble([self.blocks[i] for i in self.group_blocks(g)])

    def canonical_residual(self, pair: MatrixPair) -> float:
        """Relative deviation of ``X^H (A, B) X`` from the assembled blocks."""
        lam, om = self.assembled()
        X = self.X
        ra = np.linalg.norm(X.conj().T @ pair.A @ X - lam)
        rb = np.linalg.norm(X.conj().T @ pair.B @ X - om)
        scale = max(1.0, np.linalg.norm(lam), np.linalg.norm(om))
        return float(max(ra, rb) / scale)


def _normalize_real(pair, x, what):
    x = x / np.linalg.norm(x)
    q = np.vdot(x, pair.B @ x).real
    if abs(q) <= RANK_TOL * spec_norm(pair.B):
        raise CannotNormalizeError(f"{what}: x^H B x vanishes")
    return x / np.sqrt(abs(q)), 1 if q > 0 else -1


def canonical_rescale(X, pair: MatrixPair, blocks) -> tuple[np.ndarray, list[BlockSpec]]:
    """Scale eigenvector columns so that ``X^H (A, B) X`` is canonical.

    Semi-simple blocks only. Real or zero eigenvalues get
    ``x <- x / sqrt(|x^H B x|)`` and the sign of ``x^H B x`` is recorded.
    A conjugate pair with columns ``[y, x]`` (eigenvalues ``conj(b)``, ``b``)
    is scaled to ``y^H B x = 1`` with ``||y|| = ||x||``.
    """
    X = np.array(X, dtype=complex)
    out_blocks = []
    col = 0
    for b in blocks:
        if b.size != 1:
            raise CannotNormalizeError("only semi-simple blocks can be rescaled from data")
        if b.kind is Kind.R1:
            raise CannotNormalizeError("infinite eigenvalues need a declared structure")
        if b.kind in (Kind.R2, Kind.R3):
            X[:, col], sgn = _normalize_real(pair, X[:, col], f"column {col}")
            out_blocks.append(replace(b, sign=sgn))
            col += 1
            continue
        y = X[:, col] / np.linalg.norm(X[:, col])
        x = X[:, col + 1] / np.linalg.norm(X[:, col + 1])
        c = np.vdot(y, pair.B @ x)
        if abs(c) <= RANK_TOL * spec_norm(pair.B):
            raise CannotNormalizeError(f"columns {col}, {col + 1}: y^H B x vanishes")
        X[:, col] = y / np.sqrt(abs(c))
        X[:, col + 1] = x * np.sqrt(abs(c)) / c
        out_blocks.append(replace(b, sign=1))
        col += 2
    return X, out_blocks


def structure_from_pair(pair: MatrixPair, zero_tol: float = 1e-10) -> EigStructure:
    """Semi-simple canonical structure of a pair with nonsingular ``B``.

    Blocks follow the eigenvalue order of :func:`eig_pair`; each conjugate
    pair becomes one R4 block storing its upper-half-plane member.
    """
    dec = eig_pair(pair)
    vals, vecs = dec.values, dec.vectors
    scale = max(1.0, max(abs(vals), default=1.0))
    blocks, cols = [], []
    k = 0
    while k < len(vals):
        lam = vals[k]
        if abs(lam) <= zero_tol * scale:
            blocks.append(BlockSpec(Kind.R2, 1))
            cols.append(vecs[:, k])
            k += 1
        elif abs(lam.imag) <= EIG_TOL * abs(lam):
            blocks.append(BlockSpec(Kind.R3, 1, 1, complex(lam.real, 0.0)))
            cols.append(vecs[:, k])
            k += 1
        else:
            if k + 1 >= len(vals):
                raise CannotNormalizeError("unpaired non-real eigenvalue")
            up, lo = (k, k + 1) if lam.imag > 0 else (k + 1, k)
            beta = vals[up]
            blocks.append(BlockSpec(Kind.R4, 1, 1, beta))
            cols.extend([vecs[:, lo], vecs[:, up]])
            k += 2
    X, blocks = canonical_rescale(np.column_stack(cols), pair, blocks)
    st = EigStructure(tuple(blocks), X)
    if st.canonical_residual(pair) > STRUCT_TOL * max(1.0, _cond_scale(X, pair)):
        raise CannotNormalizeError("congruence residual exceeds tolerance")
    return st


def _cond_scale(X, pair) -> float:
    return float(np.linalg.norm(X, 2) ** 2 * max(spec_norm(pair.A), spec_norm(pair.B)))


def block_index_of(structure: EigStructure, target: complex) -> int:
    """Index of the block whose eigenvalue (or its conjugate) is nearest ``target``."""
    best, bi = np.inf, -1
    for i, b in enumerate(structure.blocks):
        for v in {b.eig, b.eig.conjugate()}:
            d = abs(v - target) if np.isfinite(v) else np.inf
            if d < best:
                best, bi = d, i
    return bi


@dataclass(frozen=True)
class AssumptionReport:
    """Per-condition pass/fail with the offending eigenvalue pairs."""

    checks: dict

    @property
    def ok(self) -> bool:
        return all(passed for passed, _ in self.checks.values())

    def failures(self) -> list[str]:
        return [k for k, (passed, _) in self.checks.items() if not passed]


def _close(a: complex, b: complex, tol: float) -> bool:
    ainf, binf = np.isinf(a), np.isinf(b)
    if ainf or binf:
        return bool(ainf and binf)
    if a == 0 or b == 0:
        return abs(a - b) <= tol
    return abs(a - b) <= tol * max(abs(a), abs(b))


def _clashes(s1, s2, tol):
    return [(complex(a), complex(b)) for a in s1 for b in s2 if _close(a, b, tol)]


def validate_assumptions(orig: EigStructure, pert: EigStructure, gap_tol: float = 1e-6) -> AssumptionReport:
    """Check block alignment, spectral disjointness and the 0/infinity exclusions."""
    o1, o2 = orig.group_eigenvalues(1), orig.group_eigenvalues(2)
    p1, p2 = pert.group_eigenvalues(1), pert.group_eigenvalues(2)
    checks = {}
    dims = (len(o1) == len(p1) and len(o2) == len(p2) and orig.n == pert.n)
    checks["aligned_groups"] = (dims and len(o1) > 0, [] if dims else [(len(o1), len(p1))])
    for name, a, b in (
        ("disjoint_orig", o1, o2),
        ("disjoint_pert", p1, p2),
        ("disjoint_orig1_pert2", o1, p2),
        ("disjoint_orig2_pert1", o2, p1),
    ):
        bad = _clashes(a, b, gap_tol)
        checks[name] = (not bad, bad)
    for name, vals, excl in (
        ("no_infinity_orig1", o1, np.inf),
        ("no_zero_orig2", o2, 0.0),
        ("no_infinity_pert1", p1, np.inf),
        ("no_zero_pert2", p2, 0.0),
    ):
        bad = [(complex(v), complex(excl)) for v in vals if _close(v, excl, gap_tol)]
        checks[name] = (not bad, bad)
    return AssumptionReport(checks)
