"""Privative / negation markers on node labels ("loss of appetite" vs "appetite").

A marker is matched only at the start of a label, after leading articles.
Both the text decoder and the reconstruction evaluator rely on the same
marker list so flipped-node handling stays consistent end to end.
"""

from .core import normalize_label

DEFAULT_NEGATION_MARKERS = (
    "loss of",
    "lack of",
    "reduced",
    "diminished",
    "decreased",
    "no",
    "absence of",
)

_ARTICLES = ("a", "an", "the")


def split_marker(tokens, markers=None):
    """Drop leading articles and at most one negation marker from a token list.

    ``tokens`` keep their original casing; matching is case-insensitive.
    Returns (head_tokens, marked). A phrase that is nothing but a marker is
    returned unchanged and unmarked, so "no" alone never counts as negated.
    """
    markers = DEFAULT_NEGATION_MARKERS if markers is None else tuple(markers)
    lower = [t.lower() for t in tokens]
    start = 0
    while start < len(lower) and lower[start] in _ARTICLES:
        start += 1
    for marker in sorted(markers, key=lambda m: -len(m.split())):
        mtok = normalize_label(marker).split()
        k = len(mtok)
        if len(lower) - start > k and lower[start : start + k] == mtok:
            return list(tokens[start + k :]), True
    return list(tokens[start:]), False


def strip_negation(label: str, markers=None):
    """Normalized head of a label plus whether a negation marker was dropped."""
    head, marked = split_marker(normalize_label(label).split(), markers)
    return " ".join(head), marked
