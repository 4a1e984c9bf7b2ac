"""Reconstruct an FCM from a natural-language summary.

The pipeline has three stages, run either by a deterministic parser or by a
text-generation service: noun detection, node detection, and edge extraction
over all n^2 - n ordered node pairs.

The deterministic grammar understands the templates emitted by the encoder
plus mildly naturalized variants of them. Node mentions inside single quotes
are taken verbatim. Unquoted mentions are chunked around the recognized
causal verbs; a leading privative marker on an unquoted mention ("a loss of
appetite") is stripped to its head ("appetite") and flips the sign of the
clause's edge for that endpoint. Quoted mentions are never reinterpreted.
"""

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .core import Fcm, normalize_label
from .errors import ContractError, DecodeError, SchemaError
from .hedges import HedgeTable, default_hedge_table
from .negation import DEFAULT_NEGATION_MARKERS, split_marker
from .prompts import load_prompt


@dataclass(frozen=True)
class NounCandidate:
    """A noun-phrase span found in the text; pronouns carry their antecedent."""

    surface: str
    sentence_index: int
    resolved_antecedent: str | None = None


@dataclass(frozen=True)
class NodeCandidate:
    """A retained causal variable plus the sentences that mention it."""

    label: str
    evidence: tuple = ()


@dataclass(frozen=True)
class ExtractedEdge:
    source_label: str
    target_label: str
    weight: float
    evidence: str

    def __post_init__(self):
        if abs(self.weight) > 1.0:
            raise ContractError(f"edge weight {self.weight} outside [-1, 1]")


@dataclass
class PairAudit:
    """Counter proving that edge extraction visited every ordered node pair."""

    pairs_examined: int = 0


@dataclass(frozen=True)
class DecodeResult:
    """A reconstructed FCM plus the evidence ledger behind it."""

    fcm: Fcm
    edges: tuple
    warnings: tuple = ()
    pairs_examined: int | None = None
    stages: dict | None = None


# ---------------------------------------------------------------------------
# Deterministic grammar
# ---------------------------------------------------------------------------

_PRONOUNS = {"it", "they"}
_ARTICLES = {"a", "an", "the"}
_LEADING_PARTICLES = {
    "even", "also", "notably", "moreover", "furthermore", "additionally",
    "meanwhile", "similarly", "finally", "overall", "further", "then",
    "indeed", "too", "in", "addition", "beyond",
}
# Fragments made purely of these never denote a causal variable.
_FUNCTION_WORDS = (
    _LEADING_PARTICLES
    | _ARTICLES
    | _PRONOUNS
    | {"this", "that", "these", "those", "of", "to", "by", "for", "with", "on"}
)
_DECLARATION_CUES = ("factor", "factors", "variable", "variables", "concept", "concepts")

# Verbs that commonly terminate a subject phrase without asserting a weighted
# causal edge themselves ("contributes to the cycle by strongly causing ...").
_GENERIC_VERBS = {
    "is", "are", "was", "were", "be", "been", "being",
    "has", "have", "had", "having", "can", "could", "may", "might", "must",
    "will", "would", "shall", "should", "does", "do", "did", "doing",
    "contributes", "contribute", "contributed", "contributing",
    "leads", "lead", "led", "leading", "results", "result", "resulted",
    "resulting", "tends", "tend", "creates", "create", "created", "creating",
    "drives", "drive", "driven", "driving", "affects", "affect", "affected",
    "affecting", "influences", "influence", "influenced", "influencing",
    "feeds", "feed", "fed", "feeding", "plays", "play", "played", "playing",
    "serves", "serve", "served", "serving", "acts", "act", "acted", "acting",
    "helps", "help", "helped", "helping", "worsens", "worsen", "worsened",
    "worsening", "improves", "improve", "improved", "improving",
    "remains", "remain", "remained", "remaining", "becomes", "become",
    "became", "becoming", "appears", "appear", "appeared", "appearing",
    "keeps", "keep", "kept", "keeping", "makes", "make", "made", "making",
    "shows", "show", "showed", "showing", "forms", "form", "formed",
    "forming", "fuels", "fuel", "fueled", "fueling", "deepens", "deepen",
    "deepened", "deepening", "brings", "bring", "brought", "bringing",
    "sets", "set", "setting",
}

_QUOTE_RE = re.compile(r"'([^']*)'")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


def _verb_forms(third_person: str):
    """Inflections accepted for a verb given in third-person singular form."""
    v = third_person.lower()
    if v.endswith("ies"):
        base = v[:-3] + "y"
    elif v.endswith(("sses", "shes", "ches", "xes", "zes")):
        base = v[:-2]
    elif v.endswith("s"):
        base = v[:-1]
    else:
        base = v
    forms = {v, base}
    if base.endswith("e"):
        forms.update({base[:-1] + "ing", base + "d"})
    elif base.endswith("y"):
        forms.update({base[:-1] + "ying", base[:-1] + "ied"})
    else:
        forms.update({base + "ing", base + "ed"})
    return forms


def _verb_pattern(table: HedgeTable):
    """Regex matching '<adverb>? <causal verb form>' plus a sign lookup."""
    sign_by_form = {}
    for verb in table.positive_verbs:
        for form in _verb_forms(verb):
            sign_by_form[form] = 1
    for verb in table.negative_verbs:
        for form in _verb_forms(verb):
            sign_by_form.setdefault(form, -1)
    adverbs = "|".join(re.escape(a) for a in table.adverbs())
    verbs = "|".join(
        re.escape(f) for f in sorted(sign_by_form, key=lambda f: (-len(f), f))
    )
    pattern = re.compile(
        rf"(?:\b({adverbs})\s+)?\b({verbs})\b", flags=re.IGNORECASE
    )
    return pattern, sign_by_form


@dataclass
class _Mention:
    label: str
    surface: str
    position: int
    negated: bool = False
    quoted: bool = False
    is_pronoun: bool = False


@dataclass
class _VerbGroup:
    sign: int
    adverb: str | None
    targets: list = field(default_factory=list)


@dataclass
class _Sentence:
    index: int
    text: str
    kind: str = "other"  # declaration | causal | other
    subjects: list = field(default_factory=list)
    groups: list = field(default_factory=list)
    declared: list = field(default_factory=list)
    quoted: list = field(default_factory=list)  # every quoted _Mention, text order
    leading_pronoun: _Mention | None = None


def _clean_fragment(fragment: str, offset: int, markers) -> _Mention | None:
    """Turn an unquoted fragment into a mention, or None when nothing is left."""
    raw_tokens = [t for t in re.split(r"\s+", fragment.strip(" \t,.;:!?")) if t]
    tokens = [t.strip(",.;:!?") for t in raw_tokens]
    tokens = [t for t in tokens if t]
    while tokens and tokens[0].lower() in _LEADING_PARTICLES:
        tokens = tokens[1:]
    # Cut the phrase at the first generic verb: everything after it belongs
    # to another clause ("... contributes to the cycle by ...").
    for i, tok in enumerate(tokens):
        if tok.lower() in _GENERIC_VERBS:
            tokens = tokens[:i]
            break
    while tokens and tokens[-1].lower() in _LEADING_PARTICLES:
        tokens = tokens[:-1]
    if not tokens:
        return None
    if len(tokens) == 1 and tokens[0].lower() in _PRONOUNS:
        return _Mention(
            label=tokens[0].lower(),
            surface=tokens[0],
            position=offset,
            is_pronoun=True,
        )
    if all(t.lower() in _FUNCTION_WORDS for t in tokens):
        return None
    head, marked = split_marker(tokens, markers)
    if not head:
        return None
    label = " ".join(head)
    return _Mention(
        label=label, surface=" ".join(tokens), position=offset, negated=marked
    )


def _region_mentions(sentence: str, start: int, end: int, spans, markers):
    """Mentions in sentence[start:end]: quoted spans, else chunked fragments."""
    inside = [s for s in spans if start <= s[0] and s[1] <= end]
    if inside:
        return [
            _Mention(
                label=inner, surface=inner, position=s0, quoted=True,
                negated=False,
            )
            for (s0, _s1, inner) in inside
        ]
    region = sentence[start:end]
    mentions = []
    cursor = 0
    for part in re.split(r",|\band\b|\bas well as\b", region):
        offset = start + cursor
        cursor += len(part) + 1
        mention = _clean_fragment(part, offset, markers)
        if mention is not None:
            mentions.append(mention)
    return mentions


def _parse_sentence(idx: int, sentence: str, pattern, sign_by_form, table, markers):
    parsed = _Sentence(index=idx, text=sentence)
    spans = [(m.start(), m.end(), m.group(1)) for m in _QUOTE_RE.finditer(sentence)]
    parsed.quoted = [
        _Mention(label=inner, surface=inner, position=s0, quoted=True)
        for (s0, _s1, inner) in spans
        if inner.strip()
    ]

    def in_quotes(a, b):
        return any(s0 <= a and b <= s1 for (s0, s1, _t) in spans)

    matches = [m for m in pattern.finditer(sentence) if not in_quotes(m.start(), m.end())]

    lead = sentence.strip()
    lead_tokens = [t.strip(",.;:!?").lower() for t in lead.split()[:3]]
    while lead_tokens and lead_tokens[0] in _LEADING_PARTICLES:
        lead_tokens = lead_tokens[1:]
    if lead_tokens and lead_tokens[0] in _PRONOUNS:
        parsed.leading_pronoun = _Mention(
            label=lead_tokens[0], surface=lead_tokens[0], position=0, is_pronoun=True
        )

    if not matches:
        colon = sentence.find(":")
        if colon != -1 and any(
            cue in sentence[:colon].lower() for cue in _DECLARATION_CUES
        ):
            declared = [
                _Mention(label=inner, surface=inner, position=s0, quoted=True)
                for (s0, _s1, inner) in spans
                if s0 > colon and inner.strip()
            ]
            if declared:
                parsed.kind = "declaration"
                parsed.declared = declared
        return parsed

    parsed.kind = "causal"
    parsed.subjects = _region_mentions(sentence, 0, matches[0].start(), spans, markers)
    if (
        not parsed.subjects
        and parsed.leading_pronoun is not None
        and not any(s[1] <= matches[0].start() for s in spans)
    ):
        parsed.subjects = [parsed.leading_pronoun]
    for g, m in enumerate(matches):
        region_end = matches[g + 1].start() if g + 1 < len(matches) else len(sentence)
        adverb_raw = m.group(1)
        adverb_bin = table.bin_for_adverb(adverb_raw) if adverb_raw else None
        group = _VerbGroup(
            sign=sign_by_form[m.group(2).lower()],
            adverb=adverb_bin.phrase if adverb_bin else None,
        )
        group.targets = _region_mentions(sentence, m.end(), region_end, spans, markers)
        parsed.groups.append(group)
    return parsed


def _parse_text(text: str, table: HedgeTable, markers):
    """Sentence-by-sentence parse with nearest-antecedent pronoun resolution."""
    if not text or not text.strip():
        raise ContractError("cannot decode empty text")
    pattern, sign_by_form = _verb_pattern(table)
    sentences = [
        s for s in _SENTENCE_SPLIT_RE.split(text.strip()) if s.strip()
    ]
    parsed = [
        _parse_sentence(i, s, pattern, sign_by_form, table, markers)
        for i, s in enumerate(sentences)
    ]
    last_subject = None
    for sent in parsed:
        mentions = list(sent.subjects)
        for group in sent.groups:
            mentions.extend(group.targets)
        if sent.leading_pronoun is not None:
            mentions.append(sent.leading_pronoun)
        for mention in mentions:
            if mention.is_pronoun and last_subject is not None:
                mention.label = last_subject.label
                mention.negated = last_subject.negated
        for subj in sent.subjects:
            if not subj.is_pronoun or subj.label not in _PRONOUNS:
                last_subject = subj
                break
    return parsed


# ---------------------------------------------------------------------------
# Pipeline stages
# ---------------------------------------------------------------------------


def detect_nouns(text: str, table=None, client=None, markers=None):
    """Noun-phrase candidates in text order; pronouns carry antecedents.

    Deterministic mode covers every quoted span plus the unquoted phrases
    that occupy causal-clause positions. With a client, the noun-detection
    prompt is run instead and its structured answer is returned.
    """
    if client is not None:
        payload = _run_stage(client, "noun_detection", text=text)
        out = []
        for c in payload["candidates"]:
            out.append(
                NounCandidate(
                    surface=c["surface"],
                    sentence_index=int(c["sentence_index"]),
                    resolved_antecedent=c.get("antecedent"),
                )
            )
        return out
    table = table or default_hedge_table()
    markers = DEFAULT_NEGATION_MARKERS if markers is None else markers
    candidates = []
    for sent in _parse_text(text, table, markers):
        found = {}
        for mention in sent.quoted:
            found[mention.position] = (mention, None)
        pool = list(sent.subjects)
        for group in sent.groups:
            pool.extend(group.targets)
        if sent.leading_pronoun is not None:
            pool.append(sent.leading_pronoun)
        for mention in pool:
            if mention.quoted:
                continue
            antecedent = None
            if mention.is_pronoun:
                antecedent = (
                    mention.label if mention.label not in _PRONOUNS else None
                )
            found.setdefault(mention.position, (mention, antecedent))
        for pos in sorted(found):
            mention, antecedent = found[pos]
            candidates.append(
                NounCandidate(
                    surface=mention.surface,
                    sentence_index=sent.index,
                    resolved_antecedent=antecedent,
                )
            )
    return candidates


def detect_nodes(nouns, text: str, table=None, client=None, markers=None):
    """Filter noun candidates down to causal variables; duplicates merge.

    Deterministic mode keeps mentions that are declared in a node inventory
    or take part in a causal clause; nouns living only in asides are dropped.
    """
    if client is not None:
        payload = _run_stage(
            client,
            "node_detection",
            text=text,
            candidates=json.dumps(
                [
                    {
                        "surface": c.surface,
                        "sentence_index": c.sentence_index,
                        "antecedent": c.resolved_antecedent,
                    }
                    for c in nouns
                ],
                sort_keys=True,
            ),
        )
        return _merge_nodes(
            (str(n["label"]), tuple(n.get("evidence", ()))) for n in payload["nodes"]
        )
    table = table or default_hedge_table()
    markers = DEFAULT_NEGATION_MARKERS if markers is None else markers
    entries = []
    for sent in _parse_text(text, table, markers):
        mentions = list(sent.declared)
        mentions.extend(sent.subjects)
        for group in sent.groups:
            mentions.extend(group.targets)
        for mention in mentions:
            if mention.is_pronoun and mention.label in _PRONOUNS:
                continue  # unresolved pronoun
            entries.append((mention.label, (sent.text,)))
    return _merge_nodes(entries)


def _merge_nodes(entries):
    order = []
    merged = {}
    for label, evidence in entries:
        if not label.strip():
            continue
        key = normalize_label(label)
        if key not in merged:
            merged[key] = (label, [])
            order.append(key)
        for quote in evidence:
            if quote not in merged[key][1]:
                merged[key][1].append(quote)
    return [
        NodeCandidate(label=merged[k][0], evidence=tuple(merged[k][1]))
        for k in order
    ]


def extract_edges(
    nodes,
    text: str,
    table=None,
    client=None,
    markers=None,
    audit: PairAudit | None = None,
    warnings: list | None = None,
):
    """Weighted edges between the given nodes, each backed by verbatim evidence.

    Every ordered node pair is examined exactly once (n^2 - n checks,
    countable through ``audit``). Pairs without textual evidence get no
    edge. When several clauses assert the same ordered pair the last
    assertion wins and a warning is recorded.
    """
    labels = [n.label if isinstance(n, NodeCandidate) else str(n) for n in nodes]
    if not labels:
        raise ContractError("extract_edges needs a non-empty node list")
    if client is not None:
        return _llm_edges(labels, text, client, warnings=warnings)
    table = table or default_hedge_table()
    markers = DEFAULT_NEGATION_MARKERS if markers is None else markers
    warnings = warnings if warnings is not None else []
    index = {normalize_label(lab): i for i, lab in enumerate(labels)}
    default_bin = table.bin_for(0.5)

    assertions = {}
    for sent in _parse_text(text, table, markers):
        if sent.kind != "causal":
            continue
        subjects = []
        for subj in sent.subjects:
            if subj.is_pronoun and subj.label in _PRONOUNS:
                warnings.append(
                    f"sentence {sent.index}: unresolved pronoun subject, clause skipped"
                )
                continue
            subjects.append(subj)
        if not subjects:
            if sent.groups:
                warnings.append(
                    f"sentence {sent.index}: causal clause without a subject, skipped"
                )
            continue
        for group in sent.groups:
            if not group.targets:
                warnings.append(
                    f"sentence {sent.index}: causal verb without a target, skipped"
                )
                continue
            magnitude_bin = (
                table.bin_for_adverb(group.adverb) if group.adverb else default_bin
            )
            for subj in subjects:
                si = index.get(normalize_label(subj.label))
                if si is None:
                    continue
                for target in group.targets:
                    if target.is_pronoun and target.label in _PRONOUNS:
                        continue
                    ti = index.get(normalize_label(target.label))
                    if ti is None:
                        continue
                    if si == ti:
                        warnings.append(
                            f"sentence {sent.index}: self-influence on "
                            f"{labels[si]!r} ignored"
                        )
                        continue
                    sign = group.sign
                    if subj.negated:
                        sign = -sign
                    if target.negated:
                        sign = -sign
                    if (si, ti) in assertions:
                        warnings.append(
                            f"duplicate assertion for {labels[si]!r} -> "
                            f"{labels[ti]!r}; keeping the last one"
                        )
                    assertions[(si, ti)] = (
                        sign * magnitude_bin.midpoint,
                        sent.text,
                    )

    edges = []
    n = len(labels)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if audit is not None:
                audit.pairs_examined += 1
            if (i, j) in assertions:
                weight, evidence = assertions[(i, j)]
                edges.append(
                    ExtractedEdge(
                        source_label=labels[i],
                        target_label=labels[j],
                        weight=weight,
                        evidence=evidence,
                    )
                )
    return edges


def assemble_fcm(nodes, edges, allow_self_loops: bool = False) -> Fcm:
    """Build the FCM from node candidates and extracted edges.

    Unmentioned pairs keep weight zero. An edge endpoint absent from the
    node list is a contract violation.
    """
    labels = [n.label if isinstance(n, NodeCandidate) else str(n) for n in nodes]
    if not labels:
        raise ContractError("cannot assemble an FCM without nodes")
    index = {normalize_label(lab): i for i, lab in enumerate(labels)}
    matrix = np.zeros((len(labels), len(labels)))
    for edge in edges:
        si = index.get(normalize_label(edge.source_label))
        ti = index.get(normalize_label(edge.target_label))
        if si is None or ti is None:
            missing = edge.source_label if si is None else edge.target_label
            raise ContractError(f"edge endpoint {missing!r} is not a known node")
        matrix[si, ti] = edge.weight
    return Fcm(labels, matrix, allow_self_loops=allow_self_loops)


def deterministic_decode(text: str, table=None, markers=None) -> DecodeResult:
    """Offline inverse of the deterministic encoder: text in, FCM out."""
    table = table or default_hedge_table()
    markers = DEFAULT_NEGATION_MARKERS if markers is None else markers
    nouns = detect_nouns(text, table=table, markers=markers)
    nodes = detect_nodes(nouns, text, table=table, markers=markers)
    if not nodes:
        raise DecodeError("no causal variables recognized in the text")
    audit = PairAudit()
    warnings: list = []
    edges = extract_edges(
        nodes, text, table=table, markers=markers, audit=audit, warnings=warnings
    )
    fcm = assemble_fcm(nodes, edges)
    return DecodeResult(
        fcm=fcm,
        edges=tuple(edges),
        warnings=tuple(warnings),
        pairs_examined=audit.pairs_examined,
    )


# ---------------------------------------------------------------------------
# Service-driven path
# ---------------------------------------------------------------------------

NOUN_STAGE_SCHEMA = {
    "type": "object",
    "required": ["candidates"],
    "properties": {
        "candidates": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["surface", "sentence_index"],
                "properties": {
                    "surface": {"type": "string", "minLength": 1},
                    "sentence_index": {"type": "integer", "minimum": 0},
                    "antecedent": {"type": ["string", "null"]},
                },
            },
        }
    },
}

NODE_STAGE_SCHEMA = {
    "type": "object",
    "required": ["nodes"],
    "properties": {
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["label"],
                "properties": {
                    "label": {"type": "string", "minLength": 1},
                    "evidence": {"type": "array", "items": {"type": "string"}},
                },
            },
        }
    },
}

EDGE_STAGE_SCHEMA = {
    "type": "object",
    "required": ["edges"],
    "properties": {
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["source", "target", "weight", "evidence"],
                "properties": {
                    "source": {"type": "string", "minLength": 1},
                    "target": {"type": "string", "minLength": 1},
                    "weight": {"type": "number"},
                    "evidence": {"type": "string"},
                },
            },
        }
    },
}

_STAGE_SCHEMAS = {
    "noun_detection": NOUN_STAGE_SCHEMA,
    "node_detection": NODE_STAGE_SCHEMA,
    "edge_extraction": EDGE_STAGE_SCHEMA,
}


def _run_stage(client, stage: str, **slots):
    prompt = load_prompt(f"{stage}_v1.txt", **slots)
    try:
        return client.complete_structured(prompt, _STAGE_SCHEMAS[stage])
    except SchemaError as exc:
        raise SchemaError(
            f"decoding stage {stage!r} failed: {exc}", stage=stage, fields=exc.fields
        ) from exc


def _llm_edges(labels, text, client, warnings=None):
    warnings = warnings if warnings is not None else []
    payload = _run_stage(
        client,
        "edge_extraction",
        text=text,
        nodes=json.dumps(labels, sort_keys=True),
        pair_count=str(len(labels) * len(labels) - len(labels)),
    )
    index = {normalize_label(lab): lab for lab in labels}
    kept = {}
    for item in payload["edges"]:
        src = index.get(normalize_label(str(item["source"])))
        tgt = index.get(normalize_label(str(item["target"])))
        if src is None or tgt is None:
            warnings.append(
                f"edge {item['source']!r} -> {item['target']!r} references an "
                "unknown node, skipped"
            )
            continue
        if src == tgt:
            warnings.append(f"self-influence on {src!r} ignored")
            continue
        weight = float(item["weight"])
        if abs(weight) > 1.0:
            warnings.append(
                f"weight {weight} on {src!r} -> {tgt!r} clamped into [-1, 1]"
            )
            weight = max(-1.0, min(1.0, weight))
        evidence = str(item["evidence"])
        if evidence and evidence not in text:
            warnings.append(
                f"evidence for {src!r} -> {tgt!r} is not a verbatim quote, "
                "edge dropped"
            )
            continue
        if (src, tgt) in kept:
            warnings.append(
                f"duplicate assertion for {src!r} -> {tgt!r}; keeping the last one"
            )
        kept[(src, tgt)] = ExtractedEdge(
            source_label=src, target_label=tgt, weight=weight, evidence=evidence
        )
    return list(kept.values())


def llm_decode(text: str, client, table=None, markers=None) -> DecodeResult:
    """Three-stage service decoding with schema validation between stages."""
    if not text or not text.strip():
        raise ContractError("cannot decode empty text")
    warnings: list = []
    nouns = detect_nouns(text, client=client)
    stage1 = [
        {
            "surface": c.surface,
            "sentence_index": c.sentence_index,
            "antecedent": c.resolved_antecedent,
        }
        for c in nouns
    ]
    nodes = detect_nodes(nouns, text, client=client)
    for node in nodes:
        bad = [q for q in node.evidence if q not in text]
        if bad:
            warnings.append(
                f"node {node.label!r}: {len(bad)} evidence quote(s) not verbatim, "
                "discarded"
            )
    nodes = [
        NodeCandidate(
            label=n.label, evidence=tuple(q for q in n.evidence if q in text)
        )
        for n in nodes
    ]
    if not nodes:
        raise DecodeError("no causal variables recognized in the text")
    edges = extract_edges(nodes, text, client=client, warnings=warnings)
    fcm = assemble_fcm(nodes, edges)
    return DecodeResult(
        fcm=fcm,
        edges=tuple(edges),
        warnings=tuple(warnings),
        stages={
            "candidates": stage1,
            "nodes": [
                {"label": n.label, "evidence": list(n.evidence)} for n in nodes
            ],
        },
    )
