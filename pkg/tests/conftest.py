"""Shared test helpers: network guard, random map factory, independent oracles."""

import math
import socket

import numpy as np
import pytest

from fcmcodec import Fcm

# Two summary sentences of the style the service pipeline produces for the
# bundled depression model: a detailed one with quoted labels, and a
# naturalized one that drops the quotes (and with them, exact node identity).
DETAILED_SUMMARY_SENTENCE = (
    "'Loss of appetite' strongly causes 'fatigue or loss of energy' and "
    "significantly increases 'psychomotor retardation' and "
    "'reduced interest for daily functioning'."
)
NATURAL_SUMMARY_SENTENCE = (
    "Even a loss of appetite contributes to the cycle by strongly causing "
    "fatigue and significantly increasing psychomotor retardation and a loss "
    "of interest in daily activities."
)

_ADJECTIVES = (
    "chronic", "acute", "latent", "daily", "elevated", "persistent",
    "rising", "baseline", "ambient", "seasonal", "localized", "systemic",
)
_NOUNS = (
    "stress", "workload", "fatigue", "demand", "pressure", "rumination",
    "arousal", "tension", "overload", "inertia", "strain", "alertness",
)

BIN_MIDPOINTS = (0.1, 0.3, 0.55, 0.8, 0.95)


def node_labels(n):
    assert n <= len(_ADJECTIVES)
    return [f"{_ADJECTIVES[i]} {_NOUNS[i]}" for i in range(n)]


def random_fcm(rng, n, density=0.4, midpoint_only=False):
    matrix = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < density:
                if midpoint_only:
                    mag = float(rng.choice(BIN_MIDPOINTS))
                else:
                    mag = float(rng.uniform(1e-6, 1.0))
                matrix[i, j] = mag if rng.random() < 0.5 else -mag
    return Fcm(node_labels(n), matrix)


def scan_equilibrium(weights, initial, squash_fn, max_steps, tol):
    """Independent naive revisit scanner: full trajectory, then an O(T^2) scan.

    Returns (kind, period) with kind in {"fixed", "cycle", "none"}; the first
    revisit in time wins and the smallest lag at that time gives the period.
    """
    weights = np.asarray(weights, dtype=float)
    states = [np.asarray(initial, dtype=float)]
    for _ in range(max_steps):
        states.append(squash_fn(states[-1] @ weights))
    for t in range(1, len(states)):
        for back in range(1, t + 1):
            if np.max(np.abs(states[t] - states[t - back])) <= tol:
                return ("fixed", 1) if back == 1 else ("cycle", back)
    return ("none", 0)


def norms_oracle(target, recon):
    """Elementwise double-loop reference for the reconstruction norms."""
    l1 = 0.0
    sq = 0.0
    linf = 0.0
    for i in range(len(target)):
        for j in range(len(target[0])):
            d = abs(target[i][j] - recon[i][j])
            l1 += d
            sq += d * d
            linf = max(linf, d)
    return {"l1": l1, "l2": math.sqrt(sq), "l_inf": linf}


def _deny_network(*_args, **_kwargs):
    raise AssertionError("network attempt blocked by the test harness")


class _GuardedSocket(socket.socket):
    def connect(self, *args, **kwargs):
        _deny_network()

    def connect_ex(self, *args, **kwargs):
        _deny_network()


@pytest.fixture(autouse=True, scope="session")
def no_network():
    """Fail the suite on any outbound connection attempt."""
    saved = (socket.socket, socket.create_connection, socket.getaddrinfo)
    socket.socket = _GuardedSocket
    socket.create_connection = _deny_network
    socket.getaddrinfo = _deny_network
    yield
    socket.socket, socket.create_connection, socket.getaddrinfo = saved
