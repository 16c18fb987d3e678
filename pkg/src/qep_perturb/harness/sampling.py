"""Seeded, entrywise-relative Hermitian perturbations of a triple."""

from __future__ import annotations

import numpy as np

from ..errors import SingularMatrixError
from ..linalg import is_singular
from ..qep import HermitianTriple, QepPerturbation

TAGS = {"M": 0, "C": 1, "K": 2}
MAX_ATTEMPTS = 10


def _stream(seed: int, trial: int, tag: int, attempt: int) -> np.random.Generator:
    # one independent Philox stream per (seed, trial, matrix, attempt)
    ss = np.random.SeedSequence([int(seed), int(trial), int(tag), int(attempt)])
    return np.random.Generator(np.random.Philox(ss))


def relative_factors(n: int, seed: int, trial: int, tag: int, attempt: int = 0) -> np.ndarray:
    """Upper-triangular factors: real uniform on [-1, 1] on the diagonal,
    uniform on the closed unit disk above it. Entry ``k`` of the row-major
    upper triangle always consumes draw ``k`` of the stream."""
    rng = _stream(seed, trial, tag, attempt)
    iu = np.triu_indices(n)
    u = rng.random(len(iu[0]))
    v = rng.random(len(iu[0]))
    diag = iu[0] == iu[1]
    r = np.where(diag, 2 * u - 1, np.sqrt(u) * np.exp(2j * np.pi * v))
    R = np.zeros((n, n), dtype=complex)
    R[iu] = r
    return R


def perturb_hermitian(H, eta: float, R) -> np.ndarray:
    """``dH_ij = eta r_ij H_ij`` on and above the diagonal, mirrored Hermitian below."""
    up = np.triu(eta * R * H)
    d = up + np.triu(up, 1).conj().T
    d[np.diag_indices_from(d)] = d.diagonal().real
    return d


def sample_perturbation(t: HermitianTriple, eta: float, seed: int, trial: int = 0) -> QepPerturbation:
    """Random ``dM, dC, dK`` with ``|dH_ij| <= eta |H_ij|`` and Hermitian symmetry."""
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    n = t.n
    for attempt in range(MAX_ATTEMPTS):
        deltas = {
            key: perturb_hermitian(getattr(t, key), eta, relative_factors(n, seed, trial, tag, attempt))
            for key, tag in TAGS.items()
        }
        if not (is_singular(t.M + deltas["M"]) or is_singular(t.K + deltas["K"])):
            return QepPerturbation(t, deltas["M"], deltas["C"], deltas["K"], float(eta), int(seed))
    raise SingularMatrixError("perturbed M or K singular after repeated sampling")
