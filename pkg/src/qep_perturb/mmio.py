"""Matrix Market I/O for dense complex matrices (``array`` format)."""

from __future__ import annotations

import numpy as np
import scipy.io


def read_mm(path) -> np.ndarray:
    """Read a dense Matrix Market file as a complex array."""
    a = scipy.io.mmread(path)
    if hasattr(a, "toarray"):
        a = a.toarray()
    return np.asarray(a, dtype=complex)


def write_mm(path, a, hermitian: bool = False) -> None:
    """Write ``a`` as ``array complex general`` or ``array complex hermitian``."""
    a = np.asarray(a, dtype=complex)
    scipy.io.mmwrite(path, a, field="complex", symmetry="hermitian" if hermitian else "general")
