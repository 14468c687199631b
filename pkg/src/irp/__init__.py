"""Zero-shot latent space translation by inverse relative projection."""

from .anchors import (
    ParallelAnchors,
    PrunedSubspace,
    anchor_completion,
    dcos,
    fps_prune,
    make_subspaces,
    split_seed,
)
from .errors import (
    DegenerateSpace,
    IrpError,
    MissingSpace,
    ShapeMismatch,
    SvdFailure,
    ZeroNormRow,
)
from .metrics import MetricSummary, accuracy, mean_cosine, pearson
from .relative import condition_number, pseudo_inverse, relative_decode, relative_encode
from .spaces import SpaceStats, center_normalize, compute_stats, denormalize, row_norms
from .synth import SyntheticFamily, generate_family, materialize, random_orthogonal
from .translator import TranslationConfig, TranslationReport, sweep, translate

__version__ = "0.1.0"
