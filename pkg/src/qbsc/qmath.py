"""
Dense complex linear algebra and quantum-state primitives.

Matrices are plain ``numpy`` complex128 arrays; pure states are 1-D arrays and
density matrices are 2-D arrays. The validators at the bottom of this module
enforce the numerical invariants at API boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.stats import unitary_group

from .errors import ValidationError

__all__ = [
    "HADAMARD",
    "SpectralDecomposition",
    "tensor",
    "tensor_power",
    "partial_trace",
    "eig_hermitian",
    "jacobi_eigh",
    "hermitian_function",
    "mat_sqrt",
    "mat_inv_sqrt",
    "projector",
    "support_projector",
    "trace_distance",
    "pure_trace_distance",
    "fidelity",
    "purify",
    "uhlmann_unitary",
    "haar_unitary",
    "basis_state",
    "check_hermitian",
    "check_density_matrix",
    "check_pure_state",
    "check_unitary",
    "matrix_to_json",
    "matrix_from_json",
]

HERM_TOL = 1e-9
PSD_TOL = 1e-9
TRACE_TOL = 1e-9
SUPPORT_CUTOFF = 1e-10
JACOBI_TOL = 1e-12

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def tensor_power(a, k: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex) if np.ndim(a) == 2 else np.ones(1, dtype=complex)
    for _ in range(k):
        out = np.kron(out, a)
    return out


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Reduce ``m`` on subsystems of sizes ``dims`` to the indices in ``keep``.

    The kept subsystems appear in ascending order in the result.
    """
    m = _as_matrix(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims)) if dims else 1
    if m.shape != (total, total):
        raise ValidationError(f"matrix shape {m.shape} does not match subsystem dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValidationError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    nsys = len(dims)
    t = m.reshape(dims + dims)
    traced = [i for i in range(nsys) if i not in keep]
    # Contract each traced pair; indices shift as axes disappear.
    for count, i in enumerate(traced):
        ax = i - count
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    kd = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(kd, kd)


def check_hermitian(m, tol: float = HERM_TOL) -> np.ndarray:
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"matrix is not square: {m.shape}")
    if m.size and np.max(np.abs(m - m.conj().T)) > tol:
        raise ValidationError("matrix is not Hermitian within tolerance")
    return m


def eig_hermitian(m, backend: str = "lapack") -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    ``backend="jacobi"`` uses the in-house cyclic Jacobi solver instead of
    LAPACK; both satisfy the same reconstruction contract.
    """
    m = check_hermitian(m)
    h = (m + m.conj().T) / 2
    if backend == "jacobi":
        w, v = jacobi_eigh(h)
    elif backend == "lapack":
        w, v = np.linalg.eigh(h)
    else:
        raise ValueError(f"unknown eigensolver backend {backend!r}")
    order = np.argsort(-w, kind="stable")
    return SpectralDecomposition(w[order], v[:, order])


def jacobi_eigh(m, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Cyclic complex Jacobi eigensolver for Hermitian ``m``.

    Each pivot removes the phase of the off-diagonal entry with a diagonal
    unitary and then applies a real plane rotation. Stops once the
    off-diagonal Frobenius mass drops below ``tol * max(1, ||m||_F)``.
    Returns ``(eigenvalues, eigenvectors)`` in no particular order.
    """
    a = np.array(m, dtype=complex)
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                theta = 0.5 * np.arctan2(2 * mag, (a[q, q] - a[p, p]).real)
                c, s = np.cos(theta), np.sin(theta)
                # rot = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                a[:, [p, q]] = a[:, [p, q]] @ rot
                a[[p, q], :] = rot.conj().T @ a[[p, q], :]
                a[p, q] = a[q, p] = 0.0
                v[:, [p, q]] = v[:, [p, q]] @ rot
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.real(np.diag(a)).copy(), v


def hermitian_function(m, f: Callable[[np.ndarray], np.ndarray], support_cutoff: float = SUPPORT_CUTOFF,
                       psd: bool = False) -> np.ndarray:
    """Apply ``f`` to the spectrum of Hermitian ``m``.

    Eigenvalues ``<= support_cutoff`` map to zero, so inverse powers act as
    pseudo-functions on the support. With ``psd=True`` an eigenvalue below
    ``-1e-9`` is rejected.
    """
    dec = eig_hermitian(m)
    w = dec.eigenvalues
    if psd and w.size and w[-1] < -PSD_TOL:
        raise ValidationError(f"matrix is not positive semidefinite (min eigenvalue {w[-1]:.3e})")
    fw = np.zeros_like(w)
    mask = w > support_cutoff
    fw[mask] = f(w[mask])
    v = dec.eigenvectors
    return (v * fw) @ v.conj().T


def mat_sqrt(m, support_cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    return hermitian_function(m, np.sqrt, support_cutoff, psd=True)


def mat_inv_sqrt(m, support_cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    return hermitian_function(m, lambda w: 1 / np.sqrt(w), support_cutoff, psd=True)


def support_projector(m, support_cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    return hermitian_function(m, np.ones_like, support_cutoff, psd=True)


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    return np.outer(v, v.conj())


def basis_state(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def _same_shape(r, s):
    r, s = _as_matrix(r), _as_matrix(s)
    if r.shape != s.shape:
        raise ValidationError(f"dimension mismatch: {r.shape} vs {s.shape}")
    return r, s


def trace_distance(r, s) -> float:
    """Half the trace norm of ``r - s``."""
    r, s = _same_shape(r, s)
    diff = r - s
    w = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(min(1.0, 0.5 * np.sum(np.abs(w))))


def pure_trace_distance(phi, psi) -> float:
    """Trace distance between the projectors onto unit vectors ``phi`` and ``psi``."""
    phi, psi = np.asarray(phi).ravel(), np.asarray(psi).ravel()
    if phi.shape != psi.shape:
        raise ValidationError(f"dimension mismatch: {phi.shape} vs {psi.shape}")
    ov = abs(np.vdot(phi, psi)) ** 2
    return float(np.sqrt(max(0.0, 1.0 - ov)))


def fidelity(r, s) -> float:
    """Root fidelity ``Tr sqrt(sqrt(r) s sqrt(r))``, computed as ``||sqrt(r) sqrt(s)||_1``."""
    r, s = _same_shape(r, s)
    sv = np.linalg.svd(mat_sqrt(r) @ mat_sqrt(s), compute_uv=False)
    return float(min(1.0, np.sum(sv)))


def purify(r) -> np.ndarray:
    """Canonical purification ``sum_i sqrt(l_i) |i>|v_i>`` of a density matrix.

    The purifying register is the first tensor factor. Eigenvalues are in
    descending order and each eigenvector is rephased so its first nonzero
    component is real and positive.
    """
    r = check_density_matrix(r)
    d = r.shape[0]
    dec = eig_hermitian(r)
    w = np.clip(dec.eigenvalues, 0.0, None)
    v = dec.eigenvectors.copy()
    for i in range(d):
        col = v[:, i]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            ph = col[nz[0]] / abs(col[nz[0]])
            v[:, i] = col / ph
    # amplitude matrix A[i, e] = sqrt(l_i) * v_i[e]
    amp = np.sqrt(w)[:, None] * v.T
    return amp.reshape(d * d)


def uhlmann_unitary(phi0, phi1, local_dim: int) -> np.ndarray:
    """Unitary ``U`` on the first (local) factor maximizing ``|<phi0|(U ⊗ 1)|phi1>|``.

    With amplitude matrices ``A0, A1`` (local x env), the overlap is
    ``Tr(U A1 A0^dagger)``; writing ``A1 A0^dagger = W S V^dagger`` the
    optimum is ``U = V W^dagger`` and the overlap equals the fidelity of the
    environment marginals.
    """
    phi0 = np.asarray(phi0, dtype=complex).ravel()
    phi1 = np.asarray(phi1, dtype=complex).ravel()
    if phi0.shape != phi1.shape:
        raise ValidationError(f"state dimension mismatch: {phi0.shape} vs {phi1.shape}")
    if local_dim < 1 or phi0.size % local_dim:
        raise ValidationError(f"state dimension {phi0.size} does not factor with local dim {local_dim}")
    a0 = phi0.reshape(local_dim, -1)
    a1 = phi1.reshape(local_dim, -1)
    w, _, vh = np.linalg.svd(a1 @ a0.conj().T)
    return vh.conj().T @ w.conj().T


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary (Ginibre QR with phase correction)."""
    if d < 1:
        raise ValidationError(f"dimension must be >= 1, got {d}")
    if d == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return np.asarray(unitary_group.rvs(d, random_state=rng), dtype=complex)


def check_density_matrix(r, tol: float = TRACE_TOL) -> np.ndarray:
    r = check_hermitian(r)
    if r.shape[0] == 0:
        raise ValidationError("density matrix must have positive dimension")
    tr = np.trace(r)
    if abs(tr - 1) > tol:
        raise ValidationError(f"density matrix trace is {tr.real:.12g}, expected 1")
    w = np.linalg.eigvalsh((r + r.conj().T) / 2)
    if w[0] < -PSD_TOL:
        raise ValidationError(f"density matrix is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    return r


def check_pure_state(v, tol: float = 1e-9) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise ValidationError(f"pure state must be a vector, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1) > tol:
        raise ValidationError(f"pure state norm is {np.linalg.norm(v):.12g}, expected 1")
    return v


def check_unitary(u, tol: float = 1e-9) -> np.ndarray:
    u = _as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ValidationError(f"unitary must be square, got {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > tol:
        raise ValidationError("matrix is not unitary within tolerance")
    return u


def matrix_to_json(m) -> dict:
    """``{"rows", "cols", "entries": [[re, im], ...]}`` in row-major order."""
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in a.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, entries = int(obj["rows"]), int(obj["cols"]), obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"matrix JSON needs rows, cols and entries: {exc}") from None
    if len(entries) != rows * cols:
        raise ValidationError(f"matrix JSON has {len(entries)} entries, expected rows*cols = {rows * cols}")
    try:
        flat = np.array([complex(float(re), float(im)) for re, im in entries], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"matrix entries must be [re, im] pairs: {exc}") from None
    if not np.all(np.isfinite(flat)):
        raise ValidationError("matrix JSON has non-finite entries")
    return flat.reshape(rows, cols)
