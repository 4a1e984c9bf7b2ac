"""fcmcodec: fuzzy cognitive map dynamics plus a text round-trip codec.

Simulate FCMs as discrete-time causal dynamical systems, mix them by convex
combination, encode them into natural-language summaries, decode summaries
back into FCMs (offline templates or a prompted text-generation service),
and score reconstructions with flip-aware error norms.
"""

from .core import (
    BasinMap,
    ConceptNode,
    Equilibrium,
    Fcm,
    FixedPoint,
    LimitCycle,
    NonConvergent,
    Squash,
    basin_map,
    equilibria_match,
    find_equilibrium,
    mix,
    node_degree_importance,
    normalize_label,
    pad_edges,
    step,
    trajectory,
    union_labels,
    validate_mix_weights,
)
from .decoder import (
    DecodeResult,
    ExtractedEdge,
    NodeCandidate,
    NounCandidate,
    PairAudit,
    assemble_fcm,
    detect_nodes,
    detect_nouns,
    deterministic_decode,
    extract_edges,
    llm_decode,
)
from .encoder import (
    LatentSummary,
    build_content_edit_prompt,
    build_encoding_prompt,
    deterministic_content_edit,
    deterministic_encode,
    llm_content_edit,
    llm_encode,
)
from .errors import (
    ContractError,
    DecodeError,
    EnumerationBoundError,
    FcmError,
    RemoteServiceError,
    ReplayMissError,
    SchemaError,
)
from .evaluate import (
    AlignedPair,
    NodeAlignment,
    ReconstructionReport,
    adjust_flips,
    align_nodes,
    detect_flip,
    edge_preservation,
    evaluate_reconstruction,
    label_similarity,
    project_to_target,
    reconstruction_error,
)
from .formats import (
    export_norms_table,
    export_report,
    fcm_from_document,
    fcm_to_document,
    load_fcm,
    load_matrix,
    load_summary,
    render_heatmap,
    save_fcm,
    save_matrix_csv,
    save_summary,
)
from .hedges import (
    HedgeBin,
    HedgeTable,
    default_hedge_table,
    load_hedge_table,
    quantize_weight,
    save_hedge_table,
)
from .llm import LlmClient, LlmConfig, TranscriptCache, TranscriptEntry, fingerprint
from .negation import DEFAULT_NEGATION_MARKERS, strip_negation

__version__ = "0.1.0"
