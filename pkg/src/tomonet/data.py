"""Training/test ensemble generation and the dataset file format.

Random states follow the Gaussian recipes: pure states are normalized
complex-Gaussian kets, mixed states are square-Ginibre matrices R R† / Tr.
Each sample draws its own RNG stream from (seed, index) so parallel and
serial generation produce identical files.

Dataset files are a JSON header (length-prefixed) followed by packed
little-endian float64 inputs and targets and a uint8 mask block; loading
streams the arrays straight from the file.
"""

from __future__ import annotations

import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .measurement import (
    add_readout_noise,
    assemble_b,
    readout_length,
    reduce_vector,
    standard_settings,
)
from .process import (
    chi_vec_length,
    chi_to_vec,
    channel_lambda,
    lambda_block_length,
    linear_inversion_qpt,
)
from .quantum import apply_unitary, pauli_expand, random_unitary

FORMAT_VERSION = 1

# mask policies: "full", a fixed integer, or ("uniform", low, high) inclusive


def normalize_policy(policy):
    """Canonical (JSON-friendly) form of a mask policy; raises on bad input."""
    if policy == "full":
        return "full"
    if isinstance(policy, (int, np.integer)) and not isinstance(policy, bool):
        if policy < 0:
            raise ValueError(f"negative m_data {policy}")
        return int(policy)
    if isinstance(policy, str) and policy.isdigit():
        return int(policy)
    if isinstance(policy, str) and policy.startswith("uniform:"):
        lo, _, hi = policy[len("uniform:"):].partition("-")
        return ("uniform", int(lo), int(hi))
    if isinstance(policy, (tuple, list)) and len(policy) == 3 and policy[0] == "uniform":
        lo, hi = int(policy[1]), int(policy[2])
        if lo > hi or lo < 0:
            raise ValueError(f"bad uniform policy bounds ({lo}, {hi})")
        return ("uniform", lo, hi)
    raise ValueError(f"invalid mask policy {policy!r}")


def draw_m_data(policy, full_len: int, rng: np.random.Generator) -> int:
    policy = normalize_policy(policy)
    if policy == "full":
        return full_len
    if isinstance(policy, int):
        if policy > full_len:
            raise ValueError(f"m_data {policy} exceeds vector length {full_len}")
        return policy
    _, lo, hi = policy
    return int(rng.integers(lo, min(hi, full_len) + 1))


def random_pure_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """|C><C| for a normalized complex-Gaussian ket C."""
    c = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    c /= np.linalg.norm(c)
    return np.outer(c, c.conj())


def random_mixed_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """R R† / Tr(R R†) for a square complex-Gaussian matrix R."""
    d = 2**n_qubits
    r = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = r @ r.conj().T
    return rho / np.trace(rho).real


@dataclass
class DatasetFile:
    """In-memory dataset: header dict plus inputs/masks/targets arrays."""

    header: dict
    inputs: np.ndarray   # (count, in_len) float64, masked entries exactly 0
    masks: np.ndarray    # (count, in_len) bool
    targets: np.ndarray  # (count, out_len) float64

    @property
    def count(self) -> int:
        return self.header["count"]


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _fill_samples(fill_one, count: int, workers: int) -> None:
    """Run fill_one(i) for every sample index, optionally across threads.

    Per-sample RNG streams make the result identical for any worker count.
    """
    if workers <= 1:
        for i in range(count):
            fill_one(i)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fill_one, range(count)))


def gen_qst_dataset(n_qubits: int, count: int, m_data_policy="full",
                    noise_sigma: float = 0.0, pure_fraction: float = 0.5,
                    seed: int = 0, workers: int = 1) -> DatasetFile:
    """Random-state dataset: reduced data vectors in, Pauli coefficients out."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0.0 <= pure_fraction <= 1.0:
        raise ValueError("pure_fraction out of [0, 1]")
    policy = normalize_policy(m_data_policy)
    settings = standard_settings(n_qubits)
    in_len = readout_length(n_qubits)
    out_len = 4**n_qubits
    inputs = np.zeros((count, in_len))
    masks = np.zeros((count, in_len), dtype=bool)
    targets = np.zeros((count, out_len))

    def fill_one(i: int) -> None:
        rng = _sample_rng(seed, i)
        rho = (random_pure_state(n_qubits, rng) if rng.random() < pure_fraction
               else random_mixed_state(n_qubits, rng))
        b = assemble_b(rho, settings)
        if noise_sigma > 0:
            b = add_readout_noise(b, noise_sigma, rng)
        red = reduce_vector(b, draw_m_data(policy, in_len, rng), rng)
        inputs[i] = red.values
        masks[i] = red.mask
        targets[i] = pauli_expand(rho)

    _fill_samples(fill_one, count, workers)
    header = {
        "format_version": FORMAT_VERSION,
        "task": "qst",
        "n_qubits": n_qubits,
        "count": count,
        "in_len": in_len,
        "out_len": out_len,
        "m_data_policy": policy,
        "noise_sigma": noise_sigma,
        "pure_fraction": pure_fraction,
        "seed": seed,
    }
    return DatasetFile(header, inputs, masks, targets)


def gen_qpt_dataset(n_qubits: int, count: int, m_data_policy="full",
                    noise_sigma: float = 0.0, seed: int = 0,
                    mode: str = "compact", workers: int = 1) -> DatasetFile:
    """Random-unitary-channel dataset: reduced lambda in, chi vector out."""
    if n_qubits != 2:
        raise ValueError("QPT datasets are generated for 2 qubits only")
    if count < 1:
        raise ValueError("count must be >= 1")
    policy = normalize_policy(m_data_policy)
    in_len = 4**n_qubits * lambda_block_length(n_qubits, mode)
    out_len = chi_vec_length(n_qubits)
    inputs = np.zeros((count, in_len))
    masks = np.zeros((count, in_len), dtype=bool)
    targets = np.zeros((count, out_len))
    linear_inversion_qpt(np.zeros(in_len), n_qubits, mode)  # warm the beta cache

    def fill_one(i: int) -> None:
        rng = _sample_rng(seed, i)
        u = random_unitary(n_qubits, rng)
        lam = channel_lambda(lambda r: apply_unitary(r, u), n_qubits, mode)
        targets[i] = chi_to_vec(linear_inversion_qpt(lam, n_qubits, mode))
        if noise_sigma > 0:
            lam = lam + noise_sigma * rng.standard_normal(in_len)
        red = reduce_vector(lam, draw_m_data(policy, in_len, rng), rng)
        inputs[i] = red.values
        masks[i] = red.mask

    _fill_samples(fill_one, count, workers)
    header = {
        "format_version": FORMAT_VERSION,
        "task": "qpt",
        "n_qubits": n_qubits,
        "count": count,
        "in_len": in_len,
        "out_len": out_len,
        "m_data_policy": policy,
        "noise_sigma": noise_sigma,
        "lambda_mode": mode,
        "seed": seed,
    }
    return DatasetFile(header, inputs, masks, targets)


_MAGIC = b"TNDS"


def save_dataset(ds: DatasetFile, path) -> None:
    raw = json.dumps(ds.header, sort_keys=True).encode()
    count, in_len = ds.inputs.shape
    if count != ds.header["count"]:
        raise ValueError("header count does not match body")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(raw)))
        fh.write(raw)
        fh.write(np.ascontiguousarray(ds.inputs, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(ds.masks, dtype=np.uint8).tobytes())
        fh.write(np.ascontiguousarray(ds.targets, dtype="<f8").tobytes())


def load_dataset(path) -> DatasetFile:
    """Load a dataset file, streaming the arrays directly from disk."""
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a dataset file")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        if header.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported dataset format version")
        if isinstance(header.get("m_data_policy"), list):
            header["m_data_policy"] = tuple(header["m_data_policy"])
        count, in_len, out_len = header["count"], header["in_len"], header["out_len"]
        inputs = np.fromfile(fh, dtype="<f8", count=count * in_len)
        masks = np.fromfile(fh, dtype=np.uint8, count=count * in_len)
        targets = np.fromfile(fh, dtype="<f8", count=count * out_len)
    if inputs.size != count * in_len or targets.size != count * out_len:
        raise ValueError(f"{path}: truncated dataset body")
    return DatasetFile(
        header,
        inputs.reshape(count, in_len),
        masks.reshape(count, in_len).astype(bool),
        targets.reshape(count, out_len),
    )


def export_csv(ds: DatasetFile, path) -> None:
    """Flat CSV export (inputs then targets per row) for interoperability."""
    flat = np.hstack([ds.inputs, ds.targets])
    cols = [f"in_{i}" for i in range(ds.inputs.shape[1])] + [
        f"target_{i}" for i in range(ds.targets.shape[1])
    ]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in flat:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
