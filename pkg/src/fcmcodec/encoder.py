"""Map an FCM to a natural-language summary.

Two routes: a deterministic template encoder whose output the deterministic
decoder can parse back exactly, and prompt builders plus thin wrappers for
driving a text-generation service. The deterministic encoder prioritizes
completeness over elegance: one clause per nonzero edge, grouped by source
node, sources ordered by degree so the busiest nodes lead the text.
"""

import re
from dataclasses import dataclass

import numpy as np

from .core import Fcm, node_degree_importance
from .errors import ContractError
from .hedges import HedgeTable, default_hedge_table
from .prompts import load_prompt


@dataclass(frozen=True)
class LatentSummary:
    """A staged text description of an FCM.

    Stage "I" is the detailed first encoding; stage "II" is the rewritten,
    more natural variant. Provenance records whether the text came from the
    deterministic templates or from a service call (with its config
    fingerprint).
    """

    text: str
    stage: str
    provenance: str = "deterministic"
    fingerprint: str | None = None

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ContractError("summary text must be non-empty")
        if self.stage not in ("I", "II"):
            raise ContractError(f"stage must be 'I' or 'II', got {self.stage!r}")
        if self.provenance not in ("deterministic", "llm"):
            raise ContractError(f"unknown provenance {self.provenance!r}")

    @property
    def word_count(self) -> int:
        return len(self.text.split())


def _quote(label: str) -> str:
    return f"'{label}'"


def _join_quoted(labels) -> str:
    quoted = [_quote(lab) for lab in labels]
    if len(quoted) == 1:
        return quoted[0]
    if len(quoted) == 2:
        return f"{quoted[0]} and {quoted[1]}"
    return ", ".join(quoted[:-1]) + f", and {quoted[-1]}"


def deterministic_encode(fcm: Fcm, table: HedgeTable | None = None) -> LatentSummary:
    """Stage-I summary from templates; the inverse of the deterministic decoder.

    Opens with an inventory sentence naming every node, then emits one
    sentence per source node with one clause per nonzero outgoing edge.
    Consecutive targets sharing a hedge phrase are folded into one clause.
    """
    table = table or default_hedge_table()
    n = fcm.n
    if n == 1:
        parts = [f"The model tracks a single causal factor: {_quote(fcm.labels[0])}."]
    else:
        parts = [
            f"The model tracks {n} interacting causal factors: "
            f"{_join_quoted(fcm.labels)}."
        ]

    importance = node_degree_importance(fcm)
    order = sorted(range(n), key=lambda i: (-int(importance[i]), i))
    any_edge = False
    for i in order:
        row = fcm.edges[i]
        targets = [j for j in range(n) if row[j] != 0.0]
        if not targets:
            continue
        any_edge = True
        groups = []  # (phrase, [labels]) with consecutive same-phrase targets folded
        for j in targets:
            phrase = _phrase_for(row[j], table)
            if groups and groups[-1][0] == phrase:
                groups[-1][1].append(fcm.labels[j])
            else:
                groups.append((phrase, [fcm.labels[j]]))
        clause = " and ".join(
            f"{phrase} {' and '.join(_quote(lab) for lab in labs)}"
            for phrase, labs in groups
        )
        parts.append(f"{_quote(fcm.labels[i])} {clause}.")
    if not any_edge:
        parts.append("No causal links are asserted among these factors.")
    return LatentSummary(text=" ".join(parts), stage="I")


def _phrase_for(weight: float, table: HedgeTable) -> str:
    b = table.bin_for(abs(weight))
    verb = table.positive_verbs[0] if weight > 0 else table.negative_verbs[0]
    return f"{b.phrase} {verb}"


_OPENERS = ("", "Also, ", "In addition, ", "Moreover, ")


def deterministic_content_edit(
    latent: LatentSummary, table: HedgeTable | None = None
) -> LatentSummary:
    """Stage-II rewrite that varies verbs and sentence openers.

    A conservative offline stand-in for the service's naturalness pass: it
    keeps the quoted labels and hedge adverbs intact, so the causal content
    survives a later decode unchanged.
    """
    if latent.stage != "I":
        raise ContractError("content editing expects a stage-I summary")
    table = table or default_hedge_table()
    verb_alternates = {}
    for verbs in (table.positive_verbs, table.negative_verbs):
        for k, verb in enumerate(verbs):
            verb_alternates[verb] = verbs[(k + 1) % len(verbs)]
    verb_re = re.compile(
        r"\b(" + "|".join(re.escape(v) for v in verb_alternates) + r")\b"
    )

    counter = [0]

    def swap(match):
        counter[0] += 1
        if counter[0] % 2 == 0:
            return verb_alternates[match.group(1)]
        return match.group(1)

    sentences = re.split(r"(?<=[.!?])\s+", latent.text.strip())
    out = []
    causal_seen = 0
    for sentence in sentences:
        pieces = re.split(r"('(?:[^'])*')", sentence)  # keep quoted spans intact
        has_verb = any(
            verb_re.search(p) for p in pieces if not p.startswith("'")
        )
        rewritten = "".join(
            p if p.startswith("'") else verb_re.sub(swap, p) for p in pieces
        )
        if has_verb:
            opener = _OPENERS[causal_seen % len(_OPENERS)]
            causal_seen += 1
            if opener and rewritten[:1] == "'":
                rewritten = opener + rewritten
        out.append(rewritten)
    return LatentSummary(text=" ".join(out), stage="II")


def build_encoding_prompt(fcm: Fcm) -> str:
    """The encoding instructions with the node list and edge matrix embedded."""
    node_list = "\n".join(f"{i + 1}. {lab}" for i, lab in enumerate(fcm.labels))
    matrix = "\n".join(
        " ".join(f"{w:8.4f}" for w in row) for row in np.asarray(fcm.edges)
    )
    return load_prompt(
        "encoding_v1.txt",
        node_count=fcm.n,
        node_list=node_list,
        matrix=matrix,
    )


def build_content_edit_prompt(latent: LatentSummary) -> str:
    """The naturalness-rewrite instructions wrapping the stage-I text verbatim."""
    if latent.stage != "I":
        raise ContractError("content editing expects a stage-I summary")
    return load_prompt("content_edit_v1.txt", summary=latent.text)


def llm_encode(fcm: Fcm, client) -> LatentSummary:
    """Stage-I summary produced by the service."""
    prompt = build_encoding_prompt(fcm)
    text = client.complete(prompt)
    return LatentSummary(
        text=text, stage="I", provenance="llm", fingerprint=client.fingerprint(prompt)
    )


def llm_content_edit(latent: LatentSummary, client) -> LatentSummary:
    """Stage-II rewrite produced by the service."""
    prompt = build_content_edit_prompt(latent)
    text = client.complete(prompt)
    return LatentSummary(
        text=text, stage="II", provenance="llm", fingerprint=client.fingerprint(prompt)
    )
