"""Min-sum LDPC decoding-failure analysis.

Find the lowest-weight channel-noise configurations (instantons) that
defeat min-sum iterative decoding, via an array-based stochastic search,
and render the noise-space and decoding-dynamics pictures that go with
them.
"""

from .channel import llr_from_noise, load_noise, save_noise, weight
from .code import (
    BUILTIN_CODES,
    AlistError,
    TannerGraph,
    build_tanner_155,
    build_toy,
    from_alist,
    gf2_rank,
    is_codeword,
    to_alist,
)
from .decoder import (
    IMMEDIATE_DECODE,
    INFINITE_WITHSTAND,
    DecodeOutcome,
    Outcome,
    decode,
    withstand_count,
)
from .render import CutSpec, detect_sign_period, plane_basis, render_cut, render_trace
from .search import (
    ArraySlot,
    InstantonArray,
    SearchConfig,
    aggregate_progress,
    choose_amplitude,
    init_array,
    load_checkpoint,
    offer,
    perturb,
    run,
    save_checkpoint,
    sweep,
)

__version__ = "0.1.0"
