"""NMR-style tomographic readout model and linear-inversion state tomography.

Each tomography setting rotates the state and reads out every single-quantum
coherence (one "peak" per pair of computational basis states differing in
exactly one qubit), contributing a real and an imaginary amplitude.  For two
qubits the four standard settings give a 33-long data vector (32 amplitudes
plus the unit-trace row); for three qubits the seven settings give 169.

The peak enumeration order is fixed: qubit index major (qubit 0 first),
spectator bit pattern ascending, and within a pair the lower basis index
first.  The coefficient matrix A maps the Pauli-coefficient vector of a
state to its data vector, so b = A x holds exactly for noiseless data.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quantum import (
    SIGMA_X,
    SIGMA_Y,
    kron_all,
    n_qubits_of,
    pauli_strings,
    truncated_pinv,
    pauli_reconstruct,
)

STANDARD_SETTING_LABELS = {
    2: ("II", "IX", "IY", "XX"),
    3: ("III", "IIY", "IYY", "YII", "XYX", "XXY", "XXX"),
}

PINV_CUTOFF = 1e-10

_ROT_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": (np.eye(2) - 1j * SIGMA_X) / np.sqrt(2),  # 90 deg x rotation
    "Y": (np.eye(2) - 1j * SIGMA_Y) / np.sqrt(2),  # 90 deg y rotation
}


@dataclass(frozen=True)
class TomographySetting:
    """A labeled product rotation applied before readout."""

    label: str
    rotation: np.ndarray

    @property
    def n_qubits(self) -> int:
        return len(self.label)


def setting_from_label(label: str) -> TomographySetting:
    if any(ch not in _ROT_1Q for ch in label):
        raise ValueError(f"bad setting label {label!r}")
    return TomographySetting(label, kron_all(_ROT_1Q[ch] for ch in label))


def standard_settings(n_qubits: int) -> list[TomographySetting]:
    """The standard NMR tomography sets for 2 and 3 qubits, in fixed order."""
    if n_qubits not in STANDARD_SETTING_LABELS:
        raise ValueError(f"no standard settings for n_qubits={n_qubits}")
    return [setting_from_label(lab) for lab in STANDARD_SETTING_LABELS[n_qubits]]


@lru_cache(maxsize=8)
def single_quantum_transitions(n_qubits: int) -> tuple[tuple[int, int], ...]:
    """Basis index pairs (r, c), r < c, differing in exactly one qubit."""
    d = 2**n_qubits
    pairs = []
    for q in range(n_qubits):
        bit = 1 << (n_qubits - 1 - q)
        for r in range(d):
            if not r & bit:
                pairs.append((r, r | bit))
    return tuple(pairs)


def simulate_readout(rho: np.ndarray, setting: TomographySetting) -> np.ndarray:
    """Re/Im amplitudes of every single-quantum coherence of the rotated state."""
    n = n_qubits_of(rho)
    if n != setting.n_qubits:
        raise ValueError(f"state has {n} qubits, setting {setting.label!r}")
    rp = setting.rotation @ rho @ setting.rotation.conj().T
    pairs = single_quantum_transitions(n)
    out = np.empty(2 * len(pairs))
    for k, (r, c) in enumerate(pairs):
        out[2 * k] = rp[r, c].real
        out[2 * k + 1] = rp[r, c].imag
    return out


def readout_length(n_qubits: int) -> int:
    """Full data-vector length including the trace row (33 for n=2, 169 for n=3)."""
    labels = STANDARD_SETTING_LABELS[n_qubits]
    return len(labels) * 2 * len(single_quantum_transitions(n_qubits)) + 1


_A_CACHE: dict[tuple, np.ndarray] = {}
_A_LOCK = threading.Lock()


def build_A(settings: list[TomographySetting]) -> np.ndarray:
    """Coefficient matrix mapping Pauli coefficients to the readout vector.

    Depends only on the settings; cached and safe under concurrent readers.
    The final row encodes the unit-trace condition (2^n at the identity
    coefficient).
    """
    if not settings:
        raise ValueError("empty settings list")
    n = settings[0].n_qubits
    key = (n, tuple(s.label for s in settings))
    with _A_LOCK:
        cached = _A_CACHE.get(key)
    if cached is not None:
        return cached
    P = pauli_strings(n)
    cols = []
    for s in range(4**n):
        col = np.concatenate(
            [simulate_readout(P[s], st) for st in settings]
            + [[float(2**n) if s == 0 else 0.0]]
        )
        cols.append(col)
    A = np.array(cols).T
    A.setflags(write=False)
    with _A_LOCK:
        _A_CACHE[key] = A
    return A


def assemble_b(rho: np.ndarray, settings: list[TomographySetting]) -> np.ndarray:
    """Readout concatenation over settings plus the trace entry 1."""
    return np.concatenate([simulate_readout(rho, st) for st in settings] + [[1.0]])


def add_readout_noise(b: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Additive iid Gaussian noise on every entry except the trace row."""
    noisy = b.copy()
    noisy[:-1] += sigma * rng.standard_normal(len(b) - 1)
    return noisy


def linear_inversion_qst(b: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Least-squares reconstruction of the density matrix from a full data vector."""
    if len(b) != A.shape[0]:
        raise ValueError(f"data length {len(b)} != {A.shape[0]} rows of A")
    s = np.linalg.svd(A, compute_uv=False)
    if np.count_nonzero(s > PINV_CUTOFF) < A.shape[1]:
        raise ValueError("ill-posed tomography system: A lacks full column rank")
    x = truncated_pinv(A, PINV_CUTOFF) @ b
    return pauli_reconstruct(x)


@dataclass(frozen=True)
class ReducedVector:
    """Zero-padded data vector with only m_data randomly kept entries."""

    values: np.ndarray
    mask: np.ndarray
    m_data: int


def reduce_vector(b: np.ndarray, m_data: int, rng: np.random.Generator) -> ReducedVector:
    """Keep m_data uniformly random positions in place, zero the rest."""
    if not 0 <= m_data <= len(b):
        raise ValueError(f"m_data={m_data} out of range for length {len(b)}")
    mask = np.zeros(len(b), dtype=bool)
    keep = rng.choice(len(b), size=m_data, replace=False)
    mask[keep] = True
    values = np.where(mask, b, 0.0)
    return ReducedVector(values=values, mask=mask, m_data=m_data)
