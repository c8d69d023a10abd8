"""Neural-network assisted quantum state and process tomography.

Reconstructs density matrices and process (chi) matrices from simulated
NMR-style measurement vectors, via standard linear inversion and via a
from-scratch feed-forward network trained on synthetic ensembles, including
the heavily reduced (zero-padded) data regime.
"""

__version__ = "0.1.0"

from .quantum import (
    apply_kraus,
    apply_unitary,
    chi_from_kraus,
    fidelity,
    KrausSet,
    pauli_expand,
    pauli_reconstruct,
    random_unitary,
)
from .measurement import (
    assemble_b,
    build_A,
    linear_inversion_qst,
    reduce_vector,
    simulate_readout,
    standard_settings,
)
from .process import (
    build_beta,
    chi_to_vec,
    dsa_simulate,
    DsaChannelSpec,
    gate_library,
    input_basis,
    linear_inversion_qpt,
    noise_channel,
    stack_lambda,
    vec_to_chi,
)
from .network import (
    cosine_loss,
    forward,
    init_network,
    NetworkConfig,
    predict_process,
    predict_state,
    train,
    TrainConfig,
)
from .data import gen_qpt_dataset, gen_qst_dataset, load_dataset, save_dataset
from .metrics import ensemble_stats, repeated_mask_fidelity
