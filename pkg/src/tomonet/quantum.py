"""Complex linear algebra primitives for qubit states and channels.

Everything here operates on plain complex numpy arrays.  A density matrix
is a Hermitian, unit-trace, PSD ``(2**n, 2**n)`` array; a channel is a list
of Kraus operators.  The Pauli-string basis used throughout the package is
fixed here: index ``s`` in ``range(4**n)`` is read as a base-4 number whose
most significant digit addresses qubit 0 (the leftmost tensor factor), with
digit order I < X < Y < Z.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
UNITARY_TOL = 1e-10
COMPLETENESS_TOL = 1e-9

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULIS = (SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z)
PAULI_CHARS = "IXYZ"


def kron_all(mats) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left to right."""
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def n_qubits_of(mat: np.ndarray) -> int:
    d = mat.shape[0]
    n = d.bit_length() - 1
    if mat.shape != (d, d) or 2**n != d:
        raise ValueError(f"matrix shape {mat.shape} is not (2^n, 2^n)")
    return n


@lru_cache(maxsize=8)
def pauli_strings(n_qubits: int) -> np.ndarray:
    """All 4^n Pauli-string matrices, shape (4^n, 2^n, 2^n), canonical order."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    mats = np.empty((4**n_qubits, 2**n_qubits, 2**n_qubits), dtype=complex)
    for s in range(4**n_qubits):
        digits = [(s >> (2 * (n_qubits - 1 - q))) & 3 for q in range(n_qubits)]
        mats[s] = kron_all(PAULIS[d] for d in digits)
    mats.setflags(write=False)
    return mats


@lru_cache(maxsize=8)
def pauli_labels(n_qubits: int) -> tuple[str, ...]:
    """Labels like ("II", "IX", ...) matching :func:`pauli_strings` order."""
    labels = []
    for s in range(4**n_qubits):
        digits = [(s >> (2 * (n_qubits - 1 - q))) & 3 for q in range(n_qubits)]
        labels.append("".join(PAULI_CHARS[d] for d in digits))
    return tuple(labels)


def check_hermitian(mat: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if np.max(np.abs(mat - mat.conj().T)) > tol:
        raise ValueError("matrix is not Hermitian")


def check_density_matrix(rho: np.ndarray) -> None:
    """Raise if rho is not a physical state (Hermitian, unit trace, PSD)."""
    check_hermitian(rho)
    if abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise ValueError(f"trace {np.trace(rho)} != 1")
    if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
        raise ValueError("negative eigenvalue beyond tolerance")


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> None:
    d = u.shape[0]
    if np.max(np.abs(u.conj().T @ u - np.eye(d))) > tol:
        raise ValueError("matrix is not unitary")


def pauli_expand(rho: np.ndarray) -> np.ndarray:
    """Coefficients a_s = Tr(rho P_s) / 2^n, real vector of length 4^n.

    Inverse of :func:`pauli_reconstruct` on Hermitian input.
    """
    n = n_qubits_of(rho)
    P = pauli_strings(n)
    return np.real(np.einsum("sij,ji->s", P, rho)) / 2**n


def pauli_reconstruct(coeffs: np.ndarray) -> np.ndarray:
    """Sum_s coeffs[s] P_s; Hermitian by construction, no PSD projection."""
    coeffs = np.asarray(coeffs, dtype=float)
    nsq = coeffs.shape[0]
    n = (nsq.bit_length() - 1) // 2
    if 4**n != nsq:
        raise ValueError(f"coefficient length {nsq} is not 4^n")
    P = pauli_strings(n)
    return np.einsum("s,sij->ij", coeffs, P)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized Hilbert-Schmidt overlap |Tr(a b†)| / sqrt(Tr(a†a) Tr(b†b)).

    Applies unchanged to density matrices and process matrices.  Raises on a
    zero-norm argument, for which the value is undefined.
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    na = np.trace(a.conj().T @ a).real
    nb = np.trace(b.conj().T @ b).real
    if na <= 0.0 or nb <= 0.0:
        raise ValueError("fidelity undefined for zero-norm matrix")
    return float(abs(np.trace(a @ b.conj().T)) / np.sqrt(na * nb))


def apply_unitary(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    if rho.shape != u.shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {u.shape}")
    return u @ rho @ u.conj().T


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators E_k of a channel rho -> sum_k E_k rho E_k†."""

    ops: tuple = field()
    trace_preserving: bool = True

    def __init__(self, ops, trace_preserving: bool = True):
        object.__setattr__(self, "ops", tuple(np.asarray(E, dtype=complex) for E in ops))
        object.__setattr__(self, "trace_preserving", trace_preserving)
        if not self.ops:
            raise ValueError("empty Kraus set")
        d = self.ops[0].shape[0]
        if trace_preserving:
            total = sum(E.conj().T @ E for E in self.ops)
            if np.max(np.abs(total - np.eye(d))) > COMPLETENESS_TOL:
                raise ValueError("Kraus completeness sum E†E = I violated")

    @property
    def n_qubits(self) -> int:
        return n_qubits_of(self.ops[0])


def apply_kraus(rho: np.ndarray, ks: KrausSet) -> np.ndarray:
    if rho.shape != ks.ops[0].shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {ks.ops[0].shape}")
    out = np.zeros_like(rho)
    for E in ks.ops:
        out += E @ rho @ E.conj().T
    return out


def chi_from_kraus(ks: KrausSet) -> np.ndarray:
    """Process matrix chi in the Pauli-string operator basis.

    Each Kraus operator is expanded as E_k = sum_m c_km P_m with
    c_km = Tr(P_m E_k) / 2^n, giving chi = sum_k c_k c_k†.  With this basis
    the identity channel has a single unit entry at (II..I, II..I) and the
    correlated flip channels are 2-sparse.
    """
    n = ks.n_qubits
    P = pauli_strings(n)
    c = np.array([np.einsum("sij,ji->s", P, E) for E in ks.ops]) / 2**n
    return c.T @ c.conj()


def apply_chi(chi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Channel action sum_mn chi_mn P_m rho P_n†."""
    n = n_qubits_of(rho)
    P = pauli_strings(n)
    return np.einsum("mn,mij,jk,nlk->il", chi, P, rho, P.conj())


def random_unitary(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    d = 2**n_qubits
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def truncated_pinv(a: np.ndarray, cutoff: float = 1e-10) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with singular values below cutoff dropped."""
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    return (vt.T * inv) @ u.T


def project_to_physical(mat: np.ndarray) -> np.ndarray:
    """Nearest physical state: Hermitize, clip negative eigenvalues, renormalize."""
    h = (mat + mat.conj().T) / 2
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0.0:
        # degenerate prediction; fall back to the maximally mixed state
        d = mat.shape[0]
        return np.eye(d, dtype=complex) / d
    w /= w.sum()
    return (v * w) @ v.conj().T
