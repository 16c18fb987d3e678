"""Test problems: the wiresaw gyroscopic model, a brake-squeal model and a
2x2 problem with a defective eigenvalue."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..canonical import BlockSpec, EigStructure, Kind
from ..qep import HermitianTriple, linearize

EXAMPLES = ("wiresaw1", "brake", "jordan")

# published single-draw values, used only as a reference column in reports
REFERENCE = {
    ("wiresaw1", "qep_subspace", 0.9): 4.9283e-5,
    ("wiresaw1", "hyperbolic", 0.9): 1.1908e-6,
    ("wiresaw1", "qep_subspace", 1.0019): 8.5756e-6,
    ("brake", "qep_subspace", None): 6.9547e-6,
    ("brake", "qep_eig_semisimple", "0.0438±3.4550i"): 6.9836e-7,
    ("brake", "qep_eig_semisimple", "0.0224±2.3223i"): 3.3994e-7,
    ("brake", "qep_eig_semisimple", "0.0197±1.6640i"): 2.5006e-7,
    ("brake", "qep_eig_semisimple", "0.0183±0.8543i"): 3.3075e-7,
    ("jordan", "qep_eig_semisimple", "-3.4142"): 2.7405e-5,
    ("jordan", "qep_eig_semisimple", "-0.5858"): 8.0671e-7,
    ("jordan", "qep_eig_jordan", "-1.0000"): 5.2899e-6,
    ("jordan", "qep_subspace", None): 7.9620e-2,
}


def gen_wiresaw(n: int = 5, nu: float = 0.9) -> HermitianTriple:
    """Gyroscopic wiresaw model in Hermitian form ``(M, iC, -K)``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if nu < 0 or nu == 1:
        raise ValueError("nu must be nonnegative and different from 1")
    j = np.arange(1, n + 1)
    M = 0.5 * np.eye(n)
    K = math.pi**2 * (1 - nu**2) / 2 * np.diag(j.astype(float) ** 2)
    C = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            ja, jb = a + 1, b + 1
            if (ja + jb) % 2 == 1:
                C[a, b] = 4 * ja * jb / (ja**2 - jb**2) * nu
    return HermitianTriple(M, 1j * C, -K)


def wiresaw_skew_damping(n: int, nu: float) -> np.ndarray:
    """Real skew-symmetric damping matrix of the wiresaw model."""
    return (gen_wiresaw(n, nu).C / 1j).real


def gen_brake(n: int = 4, gamma: float = 0.1) -> HermitianTriple:
    """Mass ``diag(1..n)``, damping ``-gamma I`` and tridiagonal stiffness ``(-5, 10, -5)``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    M = np.diag(np.arange(1, n + 1, dtype=float))
    K = 10 * np.eye(n) - 5 * (np.eye(n, k=1) + np.eye(n, k=-1))
    return HermitianTriple(M, -gamma * np.eye(n), K)


def gen_jordan() -> tuple[HermitianTriple, list[BlockSpec]]:
    """2x2 problem whose L1 pair has a size-2 Jordan block at -1."""
    M = np.diag([1.0, 2.0])
    K = 2 * np.eye(2)
    t = HermitianTriple(M, 2 * K, K)
    r2 = math.sqrt(2)
    blocks = [
        BlockSpec(Kind.R3, 1, -1, -2 - r2),
        BlockSpec(Kind.R3, 1, 1, -2 + r2),
        BlockSpec(Kind.R3, 2, 1, -1.0),
    ]
    return t, blocks


def jordan_structure() -> EigStructure:
    """Analytic canonical congruence for the L1 pair of :func:`gen_jordan`."""
    _, blocks = gen_jordan()
    r2 = math.sqrt(2)
    X = np.zeros((4, 4))
    for col, lam in enumerate((-2 - r2, -2 + r2)):
        v = np.array([1.0, 0.0, lam, 0.0])
        X[:, col] = v / math.sqrt(abs(4 + 2 * lam))
    s = 1 / r2
    X[:, 2] = [0.0, 0.0, 0.0, s]
    X[:, 3] = [0.0, s, 0.0, -s]
    return EigStructure(tuple(blocks), X, frozenset({2}))


@dataclass(frozen=True)
class ProblemSpec:
    """A named test problem and its parameters (``nu`` or ``gamma``)."""

    name: str
    n: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EXAMPLES:
            raise ValueError(f"unknown example {self.name!r}")
        if self.name == "jordan" and self.n not in (None, 2):
            raise ValueError("the jordan example has n = 2")

    @property
    def size(self) -> int:
        if self.name == "jordan":
            return 2
        return self.n or (5 if self.name == "wiresaw1" else 4)

    @property
    def param(self) -> float | None:
        if self.name == "wiresaw1":
            return float(self.params.get("nu", 0.9))
        if self.name == "brake":
            return float(self.params.get("gamma", 0.1))
        return None

    def triple(self) -> HermitianTriple:
        if self.name == "wiresaw1":
            return gen_wiresaw(self.size, self.param)
        if self.name == "brake":
            return gen_brake(self.size, self.param)
        return gen_jordan()[0]

    def declared_structure(self) -> EigStructure | None:
        return jordan_structure() if self.name == "jordan" else None

    def default_target(self, eigenvalues) -> complex:
        """Eigenvalue whose eigenvector the subspace bound follows by default."""
        ev = np.asarray(eigenvalues)
        if self.name == "wiresaw1":
            r = np.abs(ev).max()
            return complex(r if self.param < 1 else -r)
        if self.name == "brake":
            return complex(0.0251, 1.1701)
        return complex(-1.0)

    def label(self) -> str:
        if self.name == "jordan":
            return "jordan"
        key = "nu" if self.name == "wiresaw1" else "gamma"
        return f"{self.name}(n={self.size}, {key}={self.param:g})"

    def reference(self, bound: str, label: str | None) -> float | None:
        if (self.name == "wiresaw1" and self.size != 5) or (
            self.name == "brake" and (self.size != 4 or self.param != 0.1)
        ):
            return None
        if self.name == "wiresaw1" and bound in ("qep_subspace", "hyperbolic"):
            return REFERENCE.get((self.name, bound, self.param)) if label == "group1" else None
        if bound == "qep_subspace":
            return REFERENCE.get((self.name, bound, None)) if label == "group1" else None
        return REFERENCE.get((self.name, bound, label))


@dataclass(frozen=True)
class TripleProblem:
    """A user-supplied triple, e.g. loaded from a manifest; no reference values."""

    name: str
    t: HermitianTriple = field(compare=False)

    def triple(self) -> HermitianTriple:
        return self.t

    def declared_structure(self) -> None:
        return None

    def default_target(self, eigenvalues) -> complex:
        return complex(np.asarray(eigenvalues)[0])

    def label(self) -> str:
        return self.name

    def reference(self, bound: str, label: str | None) -> None:
        return None


def l1_pair(spec: ProblemSpec):
    return linearize(spec.triple())
