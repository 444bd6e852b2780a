"""Binary deep hashing: sign-code networks and Hamming-space retrieval.

Matrices are numpy arrays with one column per sample; codes are +1/-1
matrices of shape (code_length, samples).
"""

try:
    from ._core import (
        Model,
        euclidean_ground_truth,
        evaluate,
        hamming,
        itq_codes,
        label_ground_truth,
        pairwise_labels,
        synth_dataset,
        train_sh,
        train_uh,
    )
except ImportError:  # in-tree builds keep _core next to the build products
    from _core import (
        Model,
        euclidean_ground_truth,
        evaluate,
        hamming,
        itq_codes,
        label_ground_truth,
        pairwise_labels,
        synth_dataset,
        train_sh,
        train_uh,
    )

__all__ = [
    "Model",
    "euclidean_ground_truth",
    "evaluate",
    "hamming",
    "itq_codes",
    "label_ground_truth",
    "pairwise_labels",
    "synth_dataset",
    "train_sh",
    "train_uh",
]

__version__ = "0.1.0"
