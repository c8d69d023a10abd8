"""Named benchmark states and processes used by the evaluation reports."""

from __future__ import annotations

import numpy as np

from .process import (
    DsaChannelSpec,
    decoherence_channel,
    dsa_simulate,
    gate_library,
    gradient_channel,
    noise_channel,
)
from .quantum import KrausSet, apply_kraus, apply_unitary

# Emulation constants for the NMR-style non-unitary processes: the two free
# evolution delays, representative per-qubit relaxation times, the gradient
# pulse strength, and the flip-channel noise strength.
D1_TIME = 0.05
D2_TIME = 0.5
T1_DEFAULT = 5.0
T2_DEFAULT = 0.8
GRADIENT_STRENGTH = 0.15
FLIP_P_DEFAULT = 0.5


def _ket(amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


def _proj(amplitudes) -> np.ndarray:
    k = _ket(amplitudes)
    return np.outer(k, k.conj())


def state_library(n_qubits: int) -> dict[str, np.ndarray]:
    """Bell states (2 qubits) or GHZ/biseparable states (3 qubits)."""
    if n_qubits == 2:
        return {
            "B1": _proj([1, 0, 0, 1]),
            "B2": _proj([0, 1, -1, 0]),
            "B3": _proj([1, 0, 0, -1]),
            "B4": _proj([0, 1, 1, 0]),
        }
    if n_qubits == 3:
        return {
            "GHZ1": _proj([1, 0, 0, 0, 0, 0, 0, 1]),
            "GHZ2": _proj([0, 0, 1, 0, 0, 1, 0, 0]),
            "BISEP1": _proj([1, 1, 0, 0, 0, 0, 1, 1]),
            "BISEP2": _proj([1, 0, 1, 0, 0, 1, 0, 1]),
        }
    raise ValueError(f"no state fixtures for n_qubits={n_qubits}")


def process_library(p: float = FLIP_P_DEFAULT) -> dict:
    """Named two-qubit processes as callables rho -> rho."""
    procs: dict[str, object] = {}
    for name, u in gate_library().items():
        procs[name] = _unitary_channel(u)
    procs["D1"] = _kraus_channel(decoherence_channel(D1_TIME, T1_DEFAULT, T2_DEFAULT, 2))
    procs["D2"] = _kraus_channel(decoherence_channel(D2_TIME, T1_DEFAULT, T2_DEFAULT, 2))
    procs["Grad"] = _kraus_channel(gradient_channel(GRADIENT_STRENGTH))
    for kind in ("CBF", "CPF", "CBPF"):
        spec = DsaChannelSpec(kind, p)
        procs[kind] = lambda rho, spec=spec: dsa_simulate(spec, rho)
    return procs


def _unitary_channel(u: np.ndarray):
    return lambda rho: apply_unitary(rho, u)


def _kraus_channel(ks: KrausSet):
    return lambda rho: apply_kraus(rho, ks)


def kraus_reference(name: str, p: float = FLIP_P_DEFAULT) -> KrausSet:
    """Kraus form of a named non-unitary fixture (for chi references)."""
    if name == "D1":
        return decoherence_channel(D1_TIME, T1_DEFAULT, T2_DEFAULT, 2)
    if name == "D2":
        return decoherence_channel(D2_TIME, T1_DEFAULT, T2_DEFAULT, 2)
    if name == "Grad":
        return gradient_channel(GRADIENT_STRENGTH)
    if name in ("CBF", "CPF", "CBPF"):
        return noise_channel(name, p)
    raise ValueError(f"no Kraus reference for {name!r}")
