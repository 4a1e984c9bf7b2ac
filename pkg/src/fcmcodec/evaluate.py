"""Compare a reconstructed FCM against its target.

Node labels are aligned by fuzzy string similarity (with negation markers
stripped before scoring), negated ("flipped") nodes are detected from the
marker lexicon, the reconstructed matrix is projected into target index
space, flip-corrected, and scored with entrywise l1, Frobenius l2, and
max-entry l-infinity reconstruction errors.
"""

from dataclasses import dataclass

import numpy as np

from .core import Fcm, normalize_label
from .errors import ContractError
from .negation import DEFAULT_NEGATION_MARKERS, strip_negation

_STOPWORDS = {
    "a", "an", "the", "of", "to", "or", "for", "in", "and", "on", "by",
    "with", "at", "from",
}


def _levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def _char_similarity(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - _levenshtein(a, b) / longest


def _common_prefix(a: str, b: str) -> int:
    n = 0
    for ca, cb in zip(a, b):
        if ca != cb:
            break
        n += 1
    return n


def _tokens_match(a: str, b: str) -> bool:
    """Token-level fuzzy equality: shared stem or close spelling."""
    if a == b:
        return True
    if _common_prefix(a, b) >= 4:
        return True
    return _char_similarity(a, b) >= 0.7


def _token_seq_similarity(a_tokens, b_tokens) -> float:
    """Edit similarity over token sequences with graded substitution costs."""
    if not a_tokens and not b_tokens:
        return 1.0
    la, lb = len(a_tokens), len(b_tokens)
    dist = np.zeros((la + 1, lb + 1))
    dist[:, 0] = np.arange(la + 1)
    dist[0, :] = np.arange(lb + 1)
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            sub = 1.0 - _char_similarity(a_tokens[i - 1], b_tokens[j - 1])
            dist[i, j] = min(
                dist[i - 1, j] + 1.0,
                dist[i, j - 1] + 1.0,
                dist[i - 1, j - 1] + sub,
            )
    return 1.0 - float(dist[la, lb]) / max(la, lb)


def _content_tokens(label: str):
    return [t for t in label.split() if t not in _STOPWORDS]


def _containment(a_tokens, b_tokens) -> float:
    """Fraction of the shorter side's content tokens found in the longer."""
    short, long_ = sorted((a_tokens, b_tokens), key=len)
    if not short:
        return 0.0
    hits = sum(1 for t in short if any(_tokens_match(t, u) for u in long_))
    return hits / len(short)


def label_similarity(a: str, b: str) -> float:
    """Similarity in [0, 1] between two normalized labels.

    The maximum of character-level edit similarity, token-sequence edit
    similarity, and (damped) content-token containment. Containment lets a
    short paraphrase match a long label ("concentration" against "ability to
    think or concentrate") while the damping keeps exact matches ranked
    first.
    """
    if a == b:
        return 1.0
    scores = (
        _char_similarity(a, b),
        _token_seq_similarity(a.split(), b.split()),
        0.9 * _containment(_content_tokens(a), _content_tokens(b)),
    )
    return max(0.0, min(1.0, max(scores)))


def detect_flip(label_a: str, label_b: str, markers=None) -> bool:
    """True when exactly one label negates a head phrase the two share.

    ("Loss of appetite", "Appetite") flips; ("Recurrent thoughts of death",
    "Thoughts of death") does not, since "recurrent" is attenuation rather
    than negation.
    """
    if not label_a.strip() or not label_b.strip():
        raise ContractError("labels must be non-empty")
    markers = DEFAULT_NEGATION_MARKERS if markers is None else markers
    head_a, marked_a = strip_negation(label_a, markers)
    head_b, marked_b = strip_negation(label_b, markers)
    if marked_a == marked_b:
        return False
    return label_similarity(head_a, head_b) >= 0.5


@dataclass(frozen=True)
class AlignedPair:
    target_index: int
    recon_index: int
    similarity: float
    flipped: bool


@dataclass(frozen=True)
class NodeAlignment:
    """Greedy best-first matching between target and reconstructed node lists."""

    pairs: tuple
    unmatched_target: tuple
    unmatched_recon: tuple

    @property
    def flipped_target_indices(self) -> tuple:
        return tuple(p.target_index for p in self.pairs if p.flipped)


def align_nodes(
    target: Fcm, recon: Fcm, markers=None, min_similarity: float = 0.55
) -> NodeAlignment:
    """Match reconstructed nodes to target nodes by label similarity.

    Negation markers are stripped before scoring so a flipped node still
    aligns with its counterpart; the flipped flag comes from detect_flip.
    Pairs scoring below ``min_similarity`` stay unmatched. Ties break by
    target order, then reconstructed label, so the outcome is independent
    of the reconstructed node order.
    """
    if not (0.0 <= min_similarity <= 1.0):
        raise ContractError("min_similarity must lie in [0, 1]")
    markers = DEFAULT_NEGATION_MARKERS if markers is None else markers
    target_heads = [
        strip_negation(normalize_label(lab), markers)[0] for lab in target.labels
    ]
    recon_heads = [
        strip_negation(normalize_label(lab), markers)[0] for lab in recon.labels
    ]
    candidates = []
    for ti, th in enumerate(target_heads):
        for ri, rh in enumerate(recon_heads):
            score = label_similarity(th, rh)
            if score >= min_similarity:
                candidates.append((-score, ti, normalize_label(recon.labels[ri]), ri))
    candidates.sort()
    used_t, used_r = set(), set()
    pairs = []
    for neg_score, ti, _rlab, ri in candidates:
        if ti in used_t or ri in used_r:
            continue
        used_t.add(ti)
        used_r.add(ri)
        pairs.append(
            AlignedPair(
                target_index=ti,
                recon_index=ri,
                similarity=-neg_score,
                flipped=detect_flip(target.labels[ti], recon.labels[ri], markers),
            )
        )
    pairs.sort(key=lambda p: p.target_index)
    return NodeAlignment(
        pairs=tuple(pairs),
        unmatched_target=tuple(i for i in range(target.n) if i not in used_t),
        unmatched_recon=tuple(i for i in range(recon.n) if i not in used_r),
    )


def project_to_target(recon: Fcm, alignment: NodeAlignment) -> np.ndarray:
    """Reconstructed weights permuted into target index space.

    Rows and columns of unmatched target nodes stay zero, so missing nodes
    contribute their full target rows and columns to the error.
    """
    n_target = len(alignment.pairs) + len(alignment.unmatched_target)
    projected = np.zeros((n_target, n_target))
    for p in alignment.pairs:
        for q in alignment.pairs:
            projected[p.target_index, q.target_index] = recon.edges[
                p.recon_index, q.recon_index
            ]
    return projected


def adjust_flips(matrix, flipped) -> np.ndarray:
    """Negate each entry once per endpoint in the flipped set.

    Entries with both endpoints flipped are unchanged; applying the same
    adjustment twice restores the original matrix.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ContractError("adjust_flips expects a square matrix")
    flipped = set(int(i) for i in flipped)
    if flipped and (min(flipped) < 0 or max(flipped) >= matrix.shape[0]):
        raise ContractError("flipped indices must address matrix rows")
    signs = np.ones(matrix.shape[0])
    for i in flipped:
        signs[i] = -1.0
    return np.outer(signs, signs) * matrix


def reconstruction_error(target_matrix, recon_matrix) -> dict:
    """Entrywise l1, Frobenius l2, and max-entry l-infinity of the difference."""
    e = np.asarray(target_matrix, dtype=float)
    r = np.asarray(recon_matrix, dtype=float)
    if e.shape != r.shape:
        raise ContractError(f"shape mismatch: {e.shape} vs {r.shape}")
    diff = np.abs(e - r)
    return {
        "l1": float(diff.sum()),
        "l2": float(np.sqrt((diff**2).sum())),
        "l_inf": float(diff.max()) if diff.size else 0.0,
    }


def edge_preservation(
    target_matrix,
    recon_matrix,
    strong_threshold: float = 0.5,
    zero_tol: float = 1e-9,
) -> float:
    """Fraction of strong target edges kept nonzero with the right sign.

    A target entry is strong when its magnitude reaches ``strong_threshold``;
    it counts as preserved when the reconstruction is larger than ``zero_tol``
    in magnitude and agrees in sign. With no strong edges the ratio is 1.0.
    """
    if not (0.0 <= strong_threshold <= 1.0) or not (0.0 <= zero_tol <= 1.0):
        raise ContractError("thresholds must lie in [0, 1]")
    e = np.asarray(target_matrix, dtype=float)
    r = np.asarray(recon_matrix, dtype=float)
    if e.shape != r.shape:
        raise ContractError(f"shape mismatch: {e.shape} vs {r.shape}")
    strong = np.abs(e) >= strong_threshold
    total = int(strong.sum())
    if total == 0:
        return 1.0
    kept = (np.abs(r) > zero_tol) & (np.sign(r) == np.sign(e)) & strong
    return float(kept.sum()) / total


@dataclass(frozen=True)
class ReconstructionReport:
    """Everything needed to judge one reconstruction against its target."""

    alignment: NodeAlignment
    target_labels: tuple
    recon_labels: tuple
    target_matrix: np.ndarray
    recon_matrix: np.ndarray  # projected into target index space
    adjusted_matrix: np.ndarray
    norms_raw: dict
    norms_adjusted: dict
    strong_edge_preservation: float


def evaluate_reconstruction(
    target: Fcm,
    recon: Fcm,
    markers=None,
    min_similarity: float = 0.55,
    strong_threshold: float = 0.5,
    zero_tol: float = 1e-9,
) -> ReconstructionReport:
    """Align, flip-correct, and score a reconstruction in one pass."""
    alignment = align_nodes(target, recon, markers=markers, min_similarity=min_similarity)
    projected = project_to_target(recon, alignment)
    adjusted = adjust_flips(projected, alignment.flipped_target_indices)
    return ReconstructionReport(
        alignment=alignment,
        target_labels=target.labels,
        recon_labels=recon.labels,
        target_matrix=np.asarray(target.edges),
        recon_matrix=projected,
        adjusted_matrix=adjusted,
        norms_raw=reconstruction_error(target.edges, projected),
        norms_adjusted=reconstruction_error(target.edges, adjusted),
        strong_edge_preservation=edge_preservation(
            target.edges, adjusted, strong_threshold, zero_tol
        ),
    )
