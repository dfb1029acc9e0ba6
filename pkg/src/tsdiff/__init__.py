"""tsdiff: retrieve reference/target time-series pairs with natural-language queries.

The package covers the full pipeline: synthetic pair generation with labeled
difference characteristics, query-text generation from a deterministic grammar,
a dual-encoder model trained with a supervised contrastive objective, cosine
retrieval with mAP evaluation, and a small read-only search service.
"""

import os

# Honor TSDIFF_THREADS before numpy (and its BLAS) is first imported anywhere.
# Setting it to 1 gives the documented bit-reproducible single-threaded mode.
_threads = os.environ.get("TSDIFF_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .series import Series, minmax_scale, read_series_csv, resample_linear, slope_sign
from .perturb import (
    Characteristic,
    PairSample,
    PerturbLevel,
    PerturbParams,
    apply_baseline,
    apply_noise,
    apply_spike,
    apply_trend,
    generate_base_signals,
    generate_dataset,
    generate_pair,
    label_of,
    label_to_characteristic_level,
    sample_param,
)
from .queries import (
    BoundDataset,
    QueryText,
    bind_queries,
    instantiate_template,
    paraphrase_pool,
    split_queries,
)

__version__ = "0.1.0"

__all__ = [
    "Series",
    "minmax_scale",
    "read_series_csv",
    "resample_linear",
    "slope_sign",
    "Characteristic",
    "PerturbLevel",
    "PerturbParams",
    "PairSample",
    "sample_param",
    "apply_trend",
    "apply_spike",
    "apply_noise",
    "apply_baseline",
    "label_of",
    "label_to_characteristic_level",
    "generate_pair",
    "generate_dataset",
    "generate_base_signals",
    "QueryText",
    "BoundDataset",
    "instantiate_template",
    "paraphrase_pool",
    "split_queries",
    "bind_queries",
]
