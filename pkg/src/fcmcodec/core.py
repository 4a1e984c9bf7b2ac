"""Fuzzy cognitive map core: concept nodes, edge matrices, and discrete-time dynamics.

An FCM is a directed weighted graph whose nodes are causal variables and whose
edge weights in [-1, 1] encode partial causal influence. The state of the map
is a row vector in [0, 1]^n that evolves by matrix multiplication followed by
componentwise squashing. Everything in this module is a pure function over
immutable values, so it is safe to call from concurrent contexts.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, EnumerationBoundError


def normalize_label(label: str) -> str:
    """Canonical node identity: lowercased, trimmed, internal whitespace collapsed."""
    return " ".join(label.split()).lower()


@dataclass(frozen=True)
class ConceptNode:
    """A causal variable: an index plus a non-empty noun-phrase label."""

    id: int
    label: str

    def __post_init__(self):
        if not self.label or not self.label.strip():
            raise ContractError("concept node label must be non-empty")


class Fcm:
    """An FCM: ordered concept nodes plus an n x n edge-weight matrix.

    ``edges[i, j]`` is the causal degree from node i to node j, in [-1, 1].
    Self-loops are forbidden unless ``allow_self_loops`` is set. The edge
    matrix is copied and frozen at construction; instances never mutate.
    """

    def __init__(self, labels, edges, allow_self_loops: bool = False):
        labels = [n.label if isinstance(n, ConceptNode) else n for n in labels]
        if len(labels) == 0:
            raise ContractError("an FCM needs at least one node")
        for lab in labels:
            if not isinstance(lab, str) or not lab.strip():
                raise ContractError("node labels must be non-empty strings")
        normalized = [normalize_label(lab) for lab in labels]
        if len(set(normalized)) != len(normalized):
            dupes = sorted({x for x in normalized if normalized.count(x) > 1})
            raise ContractError(f"duplicate node labels after normalization: {dupes}")

        edges = np.array(edges, dtype=float)
        n = len(labels)
        if edges.shape != (n, n):
            raise ContractError(f"edge matrix must be {n}x{n}, got {edges.shape}")
        if not np.all(np.isfinite(edges)):
            raise ContractError("edge weights must be finite")
        if np.any(np.abs(edges) > 1.0):
            i, j = np.unravel_index(int(np.argmax(np.abs(edges))), edges.shape)
            raise ContractError(
                f"edge weight out of [-1, 1] at ({i}, {j}): {edges[i, j]}"
            )
        if not allow_self_loops and np.any(np.diag(edges) != 0.0):
            i = int(np.nonzero(np.diag(edges))[0][0])
            raise ContractError(f"self-loop at node {i} ({labels[i]!r}) is forbidden")

        edges.setflags(write=False)
        self._labels = tuple(labels)
        self._normalized = tuple(normalized)
        self.edges = edges
        self.allow_self_loops = bool(allow_self_loops)
        self._index = {norm: i for i, norm in enumerate(normalized)}

    @property
    def n(self) -> int:
        return len(self._labels)

    @property
    def labels(self) -> tuple:
        return self._labels

    @property
    def nodes(self) -> tuple:
        return tuple(ConceptNode(i, lab) for i, lab in enumerate(self._labels))

    def index_of(self, label: str) -> int:
        key = normalize_label(label)
        if key not in self._index:
            raise ContractError(f"no node labelled {label!r} in this FCM")
        return self._index[key]

    def has_node(self, label: str) -> bool:
        return normalize_label(label) in self._index

    def __eq__(self, other):
        if not isinstance(other, Fcm):
            return NotImplemented
        return self._normalized == other._normalized and np.array_equal(
            self.edges, other.edges
        )

    def __hash__(self):
        return hash((self._normalized, self.edges.tobytes()))

    def __repr__(self):
        return f"Fcm(n={self.n}, nonzero_edges={int(np.count_nonzero(self.edges))})"


@dataclass(frozen=True)
class Squash:
    """Componentwise squashing function: nondecreasing, range within [0, 1].

    Three kinds cover the standard choices: a logistic curve (smooth),
    a strict threshold (binary dynamics, handy for exact oracles), and
    a clipped identity.
    """

    kind: str
    steepness: float = 5.0
    cutoff: float = 0.0

    _KINDS = ("logistic", "threshold", "clipped_linear")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ContractError(f"unknown squash kind {self.kind!r}")
        if self.kind == "logistic" and not self.steepness > 0:
            raise ContractError("logistic steepness must be > 0")

    @staticmethod
    def logistic(steepness: float = 5.0) -> "Squash":
        return Squash("logistic", steepness=steepness)

    @staticmethod
    def threshold(cutoff: float = 0.0) -> "Squash":
        return Squash("threshold", cutoff=cutoff)

    @staticmethod
    def clipped_linear() -> "Squash":
        return Squash("clipped_linear")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "logistic":
            return 1.0 / (1.0 + np.exp(-self.steepness * x))
        if self.kind == "threshold":
            return (x > self.cutoff).astype(float)
        return np.clip(x, 0.0, 1.0)


@dataclass(frozen=True)
class FixedPoint:
    """A state invariant under one step (within tolerance)."""

    state: np.ndarray


@dataclass(frozen=True)
class LimitCycle:
    """A repeating sequence of states; ``period`` equals ``len(states)``."""

    states: tuple
    period: int


@dataclass(frozen=True)
class NonConvergent:
    """No revisit was found within the step budget."""

    last_state: np.ndarray
    steps_run: int


Equilibrium = FixedPoint | LimitCycle | NonConvergent


def _as_state(state, n: int) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    if state.shape != (n,):
        raise ContractError(f"state must have shape ({n},), got {state.shape}")
    if not np.all(np.isfinite(state)):
        raise ContractError("state components must be finite")
    if np.any(state < 0.0) or np.any(state > 1.0):
        raise ContractError("state components must lie in [0, 1]")
    return state


def step(fcm: Fcm, state, squash: Squash) -> np.ndarray:
    """One update: the j-th output is squash(sum_i state[i] * w[i, j])."""
    state = _as_state(state, fcm.n)
    return squash(state @ fcm.edges)


def trajectory(fcm: Fcm, initial, squash: Squash, max_steps: int, tol: float = 1e-9):
    """States [C(0), C(1), ...] from ``initial``, at most ``max_steps`` steps.

    Stops early once the newest state revisits any stored state within
    ``tol`` (the revisit is kept in the list, so a certified trajectory
    ends in a repeated state).
    """
    if max_steps < 1:
        raise ContractError("max_steps must be >= 1")
    if tol < 0:
        raise ContractError("tol must be >= 0")
    states = [_as_state(initial, fcm.n)]
    for _ in range(max_steps):
        new = step(fcm, states[-1], squash)
        states.append(new)
        if any(np.max(np.abs(new - past)) <= tol for past in states[:-1]):
            break
    return states


def find_equilibrium(
    fcm: Fcm, initial, squash: Squash, max_steps: int, tol: float = 1e-9
) -> Equilibrium:
    """Classify the limiting behaviour of the trajectory from ``initial``.

    Returns FixedPoint when a state maps to itself within ``tol``, else
    LimitCycle with the smallest period k >= 2 such that the newest state
    matches the one k steps back, else NonConvergent after ``max_steps``.
    """
    if max_steps < 1:
        raise ContractError("max_steps must be >= 1")
    if tol < 0:
        raise ContractError("tol must be >= 0")
    states = [_as_state(initial, fcm.n)]
    for _ in range(max_steps):
        new = step(fcm, states[-1], squash)
        # Nearest previous match gives the smallest period.
        for back, past in enumerate(reversed(states)):
            if np.max(np.abs(new - past)) <= tol:
                k = back + 1
                if k == 1:
                    return FixedPoint(state=new)
                cycle = tuple(states[len(states) - k :])
                return LimitCycle(states=cycle, period=k)
        states.append(new)
    return NonConvergent(last_state=states[-1], steps_run=max_steps)


def equilibria_match(a: Equilibrium, b: Equilibrium, tol: float = 1e-9) -> bool:
    """True when two classifications denote the same equilibrium.

    Fixed points compare componentwise within ``tol``; limit cycles must share
    a period and match under some rotation. NonConvergent results never match.
    """
    if isinstance(a, FixedPoint) and isinstance(b, FixedPoint):
        return bool(np.max(np.abs(a.state - b.state)) <= tol)
    if isinstance(a, LimitCycle) and isinstance(b, LimitCycle):
        if a.period != b.period:
            return False
        k = a.period
        for r in range(k):
            if all(
                np.max(np.abs(a.states[i] - b.states[(i + r) % k])) <= tol
                for i in range(k)
            ):
                return True
        return False
    return False


@dataclass(frozen=True)
class BasinMap:
    """Partition of the binary corner states by the equilibrium they reach.

    ``corners`` maps each corner (a tuple of 0/1 ints) to an equilibrium id;
    ``equilibria`` maps ids back to representative Equilibrium values.
    """

    corners: dict
    equilibria: dict


def basin_map(
    fcm: Fcm,
    squash: Squash,
    max_steps: int,
    tol: float = 1e-9,
    max_nodes: int = 20,
) -> BasinMap:
    """Classify every corner of {0, 1}^n and group equal equilibria.

    Refuses when n exceeds ``max_nodes`` since the enumeration is 2^n.
    NonConvergent corners each receive their own id.
    """
    if fcm.n > max_nodes:
        raise EnumerationBoundError(
            f"basin enumeration over 2^{fcm.n} corners exceeds the bound of "
            f"2^{max_nodes}; raise max_nodes explicitly to proceed"
        )
    corners = {}
    reps = []  # (id, Equilibrium)
    for bits in range(2**fcm.n):
        corner = tuple((bits >> i) & 1 for i in range(fcm.n))
        eq = find_equilibrium(fcm, np.array(corner, dtype=float), squash, max_steps, tol)
        assigned = None
        if not isinstance(eq, NonConvergent):
            for eq_id, rep in reps:
                if equilibria_match(eq, rep, tol):
                    assigned = eq_id
                    break
        if assigned is None:
            assigned = len(reps)
            reps.append((assigned, eq))
        corners[corner] = assigned
    return BasinMap(corners=corners, equilibria={i: e for i, e in reps})


def union_labels(fcms) -> list:
    """Union of node labels across maps, in first-appearance order."""
    seen = {}
    for fcm in fcms:
        for lab in fcm.labels:
            key = normalize_label(lab)
            if key not in seen:
                seen[key] = lab
    return list(seen.values())


def pad_edges(fcm: Fcm, union_nodes) -> np.ndarray:
    """Embed ``fcm``'s edge matrix into the index space of ``union_nodes``.

    Rows and columns of nodes absent from ``fcm`` are zero. Every node of
    ``fcm`` must appear in ``union_nodes`` (labels matched after
    normalization).
    """
    labels = [n.label if isinstance(n, ConceptNode) else n for n in union_nodes]
    pos = {normalize_label(lab): i for i, lab in enumerate(labels)}
    mapping = []
    for lab in fcm.labels:
        key = normalize_label(lab)
        if key not in pos:
            raise ContractError(f"node {lab!r} missing from the union node list")
        mapping.append(pos[key])
    mapping = np.array(mapping, dtype=int)
    padded = np.zeros((len(labels), len(labels)))
    padded[np.ix_(mapping, mapping)] = fcm.edges
    return padded


def validate_mix_weights(weights, m: int) -> np.ndarray:
    """Convex mixing weights: nonnegative, summing to 1 within 1e-9."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (m,):
        raise ContractError(f"expected {m} mixing weights, got shape {weights.shape}")
    if np.any(weights < 0):
        raise ContractError("mixing weights must be nonnegative")
    if abs(float(weights.sum()) - 1.0) > 1e-9:
        raise ContractError(f"mixing weights must sum to 1, got {weights.sum()!r}")
    return weights


def mix(fcms, weights) -> Fcm:
    """Convex combination of FCMs over the union of their node sets.

    Each edge matrix is zero-padded to the union and the padded matrices are
    combined with the given convex weights. The result is again a valid FCM.
    """
    fcms = list(fcms)
    if not fcms:
        raise ContractError("mix needs at least one FCM")
    weights = validate_mix_weights(weights, len(fcms))
    labels = union_labels(fcms)
    combined = np.zeros((len(labels), len(labels)))
    for v, fcm in zip(weights, fcms):
        combined += v * pad_edges(fcm, labels)
    # Guard against 1-ulp overshoot from float summation.
    combined = np.clip(combined, -1.0, 1.0)
    return Fcm(labels, combined, allow_self_loops=any(f.allow_self_loops for f in fcms))


def node_degree_importance(fcm: Fcm, zero_tol: float = 0.0) -> np.ndarray:
    """Per-node edge count: out-edges plus in-edges with |w| above ``zero_tol``."""
    if zero_tol < 0:
        raise ContractError("zero_tol must be >= 0")
    nonzero = np.abs(fcm.edges) > zero_tol
    return nonzero.sum(axis=1) + nonzero.sum(axis=0)
