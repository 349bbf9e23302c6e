"""Structure-aware global alignment kernels over interleaved image/text embeddings.

Slices are rows of a float array. Pass ``specialist_dim`` to treat each row
as a composite slice ``[specialist | shared]``; leave it ``None`` for atomic
slices. ``modalities`` is a sequence of ``"image"`` / ``"text"``, one per row.
"""

from ._sgak import (
    SgakError,
    gak_forward,
    label_matrix,
    loss_gradient,
    mse_loss,
    single_slice_gak,
    triple_distance,
)

__all__ = [
    "SgakError",
    "gak_forward",
    "label_matrix",
    "loss_gradient",
    "mse_loss",
    "single_slice_gak",
    "triple_distance",
]
