"""Bundled node inventories from two published clinical FCM studies.

The depression symptom model (14 nodes, with a 6-node strongly connected
subset) and the celiac-disease histology classifier (8 nodes). Each inventory
comes with a paraphrased variant list of the kind a summary-and-reparse
pipeline produces; the paraphrases exercise node alignment and negation
handling ("Loss of appetite" vs "Appetite").
"""

DEPRESSION_NODE_LABELS = (
    "Psychomotor agitation",
    "Psychomotor retardation",
    "Depressive mood",
    "Reduced interest for daily function",
    "Insomnia",
    "Hypersomnia",
    "Fatigue or loss of energy",
    "Recurrent thoughts of death",
    "Loss of appetite",
    "Diminished ability to think or concentrate",
    "Indecisiveness",
    "Feelings of worthlessness",
    "Extreme self-criticism",
    "Depression",
)

# Paraphrased inventory with three negation-dropped (flipped) labels:
# positions 4, 9, and 10 (1-based).
DEPRESSION_PARAPHRASED_NODE_LABELS = (
    "Psychomotor agitation",
    "Psychomotor retardation",
    "Depressive mood",
    "Interest for daily function",
    "Insomnia",
    "Hypersomnia",
    "Fatigue or loss of energy",
    "Thoughts of death",
    "Appetite",
    "Concentration",
    "Indecisiveness",
    "Worthlessness",
    "Self-criticism",
    "Depression",
)

DEPRESSION_SUBSET_NODE_LABELS = (
    "Psychomotor retardation",
    "Depressive mood",
    "Fatigue or loss of energy",
    "Feelings of worthlessness",
    "Extreme self-criticism",
    "Depression",
)

CELIAC_NODE_LABELS = (
    "Villi blunting",
    "Crypt hyperplasia",
    "Intraepithelial lymphocyte infiltration",
    "Epithelial changes",
    "Lamina propria MNC infiltration",
    "Decrescendo pattern",
    "Mitoses",
    "Class of celiac",
)

CELIAC_PARAPHRASED_NODE_LABELS = (
    "Villous blunting",
    "Crypt hyperplasia",
    "Intraepithelial lymphocyte infiltration",
    "Epithelial changes",
    "Lamina propria inflammation",
    "Decrescendo pattern",
    "Mitotic activity",
    "Classification of celiac",
)
