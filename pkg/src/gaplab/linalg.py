"""Dense complex linear algebra for small Hermitian problems.

Everything downstream (model construction, penalty terms, diagnostics)
is built on the four primitives here: Hermiticity checking, spectral
decomposition with a fixed phase convention, the operator norm, and
energy mean/std expectation values.
"""

from dataclasses import dataclass

import numpy as np

HERMITICITY_RTOL = 1e-12
STATE_NORM_ATOL = 1e-9
DEGENERACY_RTOL = 1e-10


class HermiticityError(ValueError):
    """Input matrix is not Hermitian within tolerance."""


class EigenConvergenceError(RuntimeError):
    """The eigensolver failed to converge."""


def check_hermitian(H):
    """Validate and return H as a square complex array.

    Raises HermiticityError if max-abs(H - H^dag) exceeds
    HERMITICITY_RTOL * (1 + max-abs entry).
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    scale = 1.0 + np.abs(H).max(initial=0.0)
    dev = np.abs(H - H.conj().T).max(initial=0.0)
    if dev > HERMITICITY_RTOL * scale:
        raise HermiticityError(
            f"matrix is not Hermitian: |H - H^dag| = {dev:.3e} "
            f"exceeds {HERMITICITY_RTOL * scale:.3e}"
        )
    return H


def fix_phase(v):
    """Rotate a nonzero vector by a global phase.

    The entry of largest magnitude (lowest index on ties) becomes real
    and nonnegative.  Idempotent.
    """
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    k = int(np.argmax(mags))
    if mags[k] == 0.0:
        raise ValueError("cannot fix the phase of a zero vector")
    return v * (v[k].conjugate() / mags[k])


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and phase-fixed orthonormal eigenvectors.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def vector(self, i):
        return self.eigenvectors[:, i]

    def reconstruct(self):
        """Sum_i E_i |v_i><v_i| as a dense matrix."""
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def eigendecompose(H) -> SpectralDecomposition:
    """Full spectral decomposition of a Hermitian matrix.

    Eigenvalues ascend; eigenvectors are orthonormal and phase fixed
    (largest-magnitude entry real nonnegative).  Within a degenerate
    cluster, vectors are ordered by their leading-entry index.
    Deterministic for a fixed input.
    """
    H = check_hermitian(H)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise EigenConvergenceError(f"eigh failed to converge: {exc}") from exc
    V = np.asarray(V, dtype=complex)
    for i in range(w.shape[0]):
        V[:, i] = fix_phase(V[:, i])
    _order_degenerate_clusters(w, V)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=V)


def _order_degenerate_clusters(w, V):
    # Reproducible ordering inside degenerate clusters: ascending index
    # of the (phase-fixed) leading entry.  In-place on w, V.
    tol = DEGENERACY_RTOL * max(1.0, np.abs(w).max(initial=0.0))
    i = 0
    n = w.shape[0]
    while i < n:
        j = i + 1
        while j < n and w[j] - w[j - 1] <= tol:
            j += 1
        if j - i > 1:
            leading = [int(np.argmax(np.abs(V[:, c]))) for c in range(i, j)]
            perm = np.argsort(leading, kind="stable") + i
            V[:, i:j] = V[:, perm]
            w[i:j] = w[perm]
        i = j


def operator_norm(H) -> float:
    """Spectral norm max_i |E_i| of a Hermitian matrix."""
    H = check_hermitian(H)
    try:
        w = np.linalg.eigvalsh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise EigenConvergenceError(f"eigvalsh failed to converge: {exc}") from exc
    return float(np.abs(w).max(initial=0.0))


def expectation_and_std(H, psi):
    """Return (<psi|H|psi>, energy standard deviation) for a state psi.

    psi must be normalized to within STATE_NORM_ATOL.  The variance is
    clamped at zero to absorb round-off.
    """
    H = check_hermitian(H)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (H.shape[0],):
        raise ValueError(f"dimension mismatch: H is {H.shape}, psi is {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > STATE_NORM_ATOL:
        raise ValueError(f"psi is not normalized: |psi| = {norm!r}")
    Hpsi = H @ psi
    mean_c = np.vdot(psi, Hpsi)
    if abs(mean_c.imag) > 1e-10:
        raise HermiticityError(f"imaginary expectation residue {mean_c.imag:.3e}")
    mean = mean_c.real
    second = np.vdot(Hpsi, Hpsi).real
    var = max(second - mean * mean, 0.0)
    return mean, float(np.sqrt(var))
