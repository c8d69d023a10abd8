"""Process tomography: the beta chi = lambda linear system and channel library.

A process matrix chi lives in the Pauli-string operator basis of
:mod:`tomonet.quantum` and is carried on the wire as a real vector of
length (4^n)^2: the 4^n diagonal entries first, then (Re, Im) of each
strictly upper-triangular entry in row-major order.  This parametrization
is Hermitian by construction, so least-squares inversion and network
predictions need no separate Hermitization step.

Three lambda block modes are supported, all sharing one beta builder:

- "compact"  (default): per output state, its Pauli-coefficient vector
  (length 4^n; 256 total for two qubits).
- "entries":  per output state, Re then Im of all matrix entries.
- "readout":  per output state, its full tomographic data vector.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .measurement import simulate_readout, standard_settings, readout_length
from .quantum import (
    KrausSet,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    apply_kraus,
    kron_all,
    n_qubits_of,
    pauli_expand,
    pauli_strings,
    truncated_pinv,
)

PINV_CUTOFF = 1e-10
LAMBDA_MODES = ("compact", "entries", "readout")

# Coherence attenuation exp(-k * strength) for the pulsed-gradient model;
# k chosen so a 15% gradient gives visible but non-total decay.
GRADIENT_DECAY_RATE = 10.0

_KET0 = np.array([1, 0], dtype=complex)
_KET1 = np.array([0, 1], dtype=complex)
_INPUT_KETS = (
    _KET0,
    _KET1,
    (_KET0 + _KET1) / np.sqrt(2),
    (_KET0 + 1j * _KET1) / np.sqrt(2),
)


@lru_cache(maxsize=8)
def input_basis(n_qubits: int) -> tuple[np.ndarray, ...]:
    """The 4^n product input states {|0>, |1>, |+>, |+i>}^{tensor n}."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    states = []
    for s in range(4**n_qubits):
        digits = [(s >> (2 * (n_qubits - 1 - q))) & 3 for q in range(n_qubits)]
        ket = kron_all(_INPUT_KETS[d].reshape(2, 1) for d in digits).ravel()
        rho = np.outer(ket, ket.conj())
        rho.setflags(write=False)
        states.append(rho)
    return tuple(states)


def chi_vec_length(n_qubits: int) -> int:
    return (4**n_qubits) ** 2


def chi_to_vec(chi: np.ndarray) -> np.ndarray:
    """Real parametrization of a Hermitian chi matrix (diag, then Re/Im pairs)."""
    d = chi.shape[0]
    v = np.empty(d * d)
    v[:d] = np.diagonal(chi).real
    iu = np.triu_indices(d, k=1)
    upper = chi[iu]
    v[d::2] = upper.real
    v[d + 1 :: 2] = upper.imag
    return v


def vec_to_chi(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`chi_to_vec`; always returns a Hermitian matrix."""
    v = np.asarray(v, dtype=float)
    d = int(round(np.sqrt(len(v))))
    if d * d != len(v):
        raise ValueError(f"chi vector length {len(v)} is not a square")
    chi = np.zeros((d, d), dtype=complex)
    chi[np.diag_indices(d)] = v[:d]
    iu = np.triu_indices(d, k=1)
    upper = v[d::2] + 1j * v[d + 1 :: 2]
    chi[iu] = upper
    chi[(iu[1], iu[0])] = upper.conj()
    return chi


def lambda_block_length(n_qubits: int, mode: str) -> int:
    if mode == "compact":
        return 4**n_qubits
    if mode == "entries":
        return 2 * 4**n_qubits
    if mode == "readout":
        return readout_length(n_qubits)
    raise ValueError(f"unknown lambda mode {mode!r}")


def _block(rho_out: np.ndarray, mode: str, settings) -> np.ndarray:
    if mode == "compact":
        return pauli_expand((rho_out + rho_out.conj().T) / 2)
    if mode == "entries":
        flat = rho_out.ravel()
        return np.concatenate([flat.real, flat.imag])
    if mode == "readout":
        # like assemble_b, but the trace entry must stay linear in rho_out
        # (basis elements are not unit trace)
        return np.concatenate(
            [simulate_readout(rho_out, s) for s in settings]
            + [[np.trace(rho_out).real]]
        )
    raise ValueError(f"unknown lambda mode {mode!r}")


def stack_lambda(outputs, mode: str = "compact") -> np.ndarray:
    """Stack the per-output-state data blocks over the input basis in order."""
    outputs = list(outputs)
    n = n_qubits_of(outputs[0])
    if len(outputs) != 4**n:
        raise ValueError(f"expected {4**n} output states, got {len(outputs)}")
    settings = standard_settings(n) if mode == "readout" else None
    return np.concatenate([_block(r, mode, settings) for r in outputs])


def channel_lambda(channel, n_qubits: int, mode: str = "compact") -> np.ndarray:
    """Lambda vector of a channel given as a callable rho -> rho."""
    return stack_lambda([channel(r) for r in input_basis(n_qubits)], mode)


_BETA_CACHE: dict[tuple, np.ndarray] = {}
_BETA_LOCK = threading.Lock()


def build_beta(n_qubits: int, mode: str = "compact") -> np.ndarray:
    """Real coefficient matrix with beta @ chi_vec = lambda for every channel.

    Column alpha is the lambda vector produced by the Hermitian chi basis
    element alpha acting through sum_mn chi_mn P_m rho P_n†.  Cached per
    (n, mode) and safe under concurrent readers.
    """
    key = (n_qubits, mode)
    with _BETA_LOCK:
        cached = _BETA_CACHE.get(key)
    if cached is not None:
        return cached
    P = pauli_strings(n_qubits)
    d = 4**n_qubits
    basis = input_basis(n_qubits)
    settings = standard_settings(n_qubits) if mode == "readout" else None
    # M[m, n, j] = P_m rho_j P_n†
    M = np.einsum("mik,jkl,nol->mnjio", P, np.array(basis), P.conj())
    cols = []
    for m in range(d):  # diagonal components
        cols.append(
            np.concatenate([_block(M[m, m, j], mode, settings) for j in range(d)])
        )
    for m in range(d):  # off-diagonal (Re, Im) pairs
        for nn in range(m + 1, d):
            re_part = [M[m, nn, j] + M[nn, m, j] for j in range(d)]
            im_part = [1j * M[m, nn, j] - 1j * M[nn, m, j] for j in range(d)]
            cols.append(np.concatenate([_block(r, mode, settings) for r in re_part]))
            cols.append(np.concatenate([_block(r, mode, settings) for r in im_part]))
    beta = np.array(cols).T
    beta.setflags(write=False)
    with _BETA_LOCK:
        _BETA_CACHE[key] = beta
    return beta


@lru_cache(maxsize=8)
def _beta_pinv(n_qubits: int, mode: str) -> np.ndarray:
    beta = build_beta(n_qubits, mode)
    s = np.linalg.svd(beta, compute_uv=False)
    if s[-1] <= PINV_CUTOFF:
        raise ValueError("ill-posed process tomography system")
    p = truncated_pinv(beta, PINV_CUTOFF)
    p.setflags(write=False)
    return p


def linear_inversion_qpt(lam: np.ndarray, n_qubits: int, mode: str = "compact") -> np.ndarray:
    """Least-squares chi matrix from a full (unmasked) lambda vector."""
    pinv = _beta_pinv(n_qubits, mode)
    if len(lam) != pinv.shape[1]:
        raise ValueError(f"lambda length {len(lam)} != {pinv.shape[1]}")
    return vec_to_chi(pinv @ lam)


# ---------------------------------------------------------------------------
# Channel library


def _controlled(u1: np.ndarray) -> np.ndarray:
    g = np.eye(4, dtype=complex)
    g[2:, 2:] = u1
    return g


def _rx(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * SIGMA_X


def _ry(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * SIGMA_Y


def gate_library() -> dict[str, np.ndarray]:
    """The four two-qubit gates studied as unitary processes.

    CX180 is a controlled 180-degree x rotation, i.e. CNOT up to the -i
    phase on the target subspace; CY90 a controlled 90-degree y rotation.
    """
    return {
        "Identity": np.eye(4, dtype=complex),
        "CNOT": _controlled(SIGMA_X),
        "CX180": _controlled(_rx(np.pi)),
        "CY90": _controlled(_ry(np.pi / 2)),
    }


_FLIP_OPS = {"CBF": SIGMA_X, "CPF": SIGMA_Z, "CBPF": SIGMA_Y}


def noise_channel(kind: str, p: float) -> KrausSet:
    """Fully correlated two-qubit flip channel with strength p."""
    if kind not in _FLIP_OPS:
        raise ValueError(f"unknown noise channel {kind!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise strength p={p} out of [0, 1]")
    sig = _FLIP_OPS[kind]
    e0 = np.sqrt(1 - p) * np.eye(4, dtype=complex)
    e1 = np.sqrt(p) * np.kron(sig, sig)
    return KrausSet([e0, e1])


@dataclass(frozen=True)
class DsaChannelSpec:
    """One-ancilla duality-circuit realization of a correlated flip channel."""

    kind: str
    p: float

    def __post_init__(self):
        if self.kind not in _FLIP_OPS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p={self.p} out of [0, 1]")

    @property
    def theta(self) -> float:
        return 2 * np.arcsin(np.sqrt(self.p))

    @property
    def v(self) -> np.ndarray:
        c, s = np.sqrt(1 - self.p), np.sqrt(self.p)
        return np.array([[c, -s], [s, c]], dtype=complex)

    @property
    def w(self) -> np.ndarray:
        return np.eye(2, dtype=complex)

    @property
    def u_ops(self) -> tuple[np.ndarray, np.ndarray]:
        sig = _FLIP_OPS[self.kind]
        return (np.eye(4, dtype=complex), np.kron(sig, sig))

    def kraus_equivalent(self) -> KrausSet:
        u0, u1 = self.u_ops
        v, w = self.v, self.w
        ops = [w[k, 0] * v[0, 0] * u0 + w[k, 1] * v[1, 0] * u1 for k in range(2)]
        return KrausSet(ops)


def dsa_simulate(spec: DsaChannelSpec, rho_s: np.ndarray) -> np.ndarray:
    """Run the duality circuit on an explicit ancilla and trace it out.

    Ancilla |0> first, then (V x I), the controlled U_c, (W x I), and a
    partial trace over the ancilla.  Equals the Kraus action of the channel.
    """
    if rho_s.shape != (4, 4):
        raise ValueError("dsa_simulate expects a two-qubit system state")
    u0, u1 = spec.u_ops
    uc = np.zeros((8, 8), dtype=complex)
    uc[:4, :4] = u0
    uc[4:, 4:] = u1
    full = np.kron(spec.w, np.eye(4)) @ uc @ np.kron(spec.v, np.eye(4))
    anc = np.zeros((2, 2), dtype=complex)
    anc[0, 0] = 1.0
    joint = full @ np.kron(anc, rho_s) @ full.conj().T
    # trace out the (leading) ancilla qubit
    return joint.reshape(2, 4, 2, 4).trace(axis1=0, axis2=2)


def _amplitude_damping(gamma: float) -> list[np.ndarray]:
    return [
        np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex),
    ]


def _dephasing(factor: float) -> list[np.ndarray]:
    # scales single-qubit coherences by `factor`
    return [
        np.sqrt((1 + factor) / 2) * np.eye(2, dtype=complex),
        np.sqrt((1 - factor) / 2) * SIGMA_Z,
    ]


def _compose(first: list[np.ndarray], second: list[np.ndarray]) -> list[np.ndarray]:
    return [b @ a for a in first for b in second]


def decoherence_channel(t: float, t1: float, t2: float, n_qubits: int) -> KrausSet:
    """Free-evolution relaxation: T1 amplitude damping plus T2 dephasing.

    Per qubit, amplitude damping with gamma = 1 - exp(-t/T1) composed with
    enough extra pure dephasing that the total coherence decay is exp(-t/T2);
    physicality requires T2 <= 2 T1.
    """
    if t < 0 or t1 <= 0 or t2 <= 0:
        raise ValueError("times must be positive")
    if t2 > 2 * t1 + 1e-12:
        raise ValueError("unphysical relaxation times: T2 > 2*T1")
    gamma = 1 - np.exp(-t / t1)
    residual = np.exp(-t / t2) / np.exp(-t / (2 * t1))
    single = _compose(_amplitude_damping(gamma), _dephasing(residual))
    ops = [np.array([[1.0 + 0j]])]
    for _ in range(n_qubits):
        ops = [np.kron(a, b) for a in ops for b in single]
    return KrausSet(ops)


def gradient_channel(strength: float) -> KrausSet:
    """Pulsed-field-gradient emulation: symmetric two-qubit pure dephasing."""
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"gradient strength {strength} out of [0, 1]")
    factor = np.exp(-GRADIENT_DECAY_RATE * strength)
    single = _dephasing(factor)
    ops = [np.kron(a, b) for a in single for b in single]
    return KrausSet(ops)
