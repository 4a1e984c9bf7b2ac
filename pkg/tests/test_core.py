import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fcmcodec import (
    ContractError,
    EnumerationBoundError,
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
    pad_edges,
    step,
    trajectory,
    validate_mix_weights,
)
from conftest import random_fcm, scan_equilibrium


def flip_flop():
    return Fcm(["A", "B"], [[0, 1], [1, 0]])


class TestFcmConstruction:
    def test_zero_nodes_rejected(self):
        with pytest.raises(ContractError):
            Fcm([], np.zeros((0, 0)))

    def test_one_node_is_legal(self):
        fcm = Fcm(["solo"], [[0.0]])
        assert fcm.n == 1

    def test_duplicate_labels_after_normalization(self):
        with pytest.raises(ContractError, match="duplicate"):
            Fcm(["Stress", "  stress "], np.zeros((2, 2)))

    def test_weight_out_of_range(self):
        with pytest.raises(ContractError, match="out of"):
            Fcm(["a", "b"], [[0, 1.5], [0, 0]])

    def test_self_loop_forbidden_by_default(self):
        with pytest.raises(ContractError, match="self-loop"):
            Fcm(["a", "b"], [[0.2, 0], [0, 0]])
        fcm = Fcm(["a", "b"], [[0.2, 0], [0, 0]], allow_self_loops=True)
        assert fcm.edges[0, 0] == 0.2

    def test_non_square_rejected(self):
        with pytest.raises(ContractError):
            Fcm(["a", "b"], [[0, 1, 0], [0, 0, 0]])

    def test_edges_are_frozen(self):
        fcm = flip_flop()
        with pytest.raises(ValueError):
            fcm.edges[0, 1] = 0.0


class TestSquash:
    @settings(max_examples=200)
    @given(
        x=st.floats(-50, 50),
        y=st.floats(-50, 50),
        kind=st.sampled_from(["logistic", "threshold", "clipped_linear"]),
        param=st.floats(0.1, 10),
    )
    def test_bounded_and_nondecreasing(self, x, y, kind, param):
        if kind == "logistic":
            sq = Squash.logistic(steepness=param)
        elif kind == "threshold":
            sq = Squash.threshold(cutoff=param - 5)
        else:
            sq = Squash.clipped_linear()
        fx, fy = float(sq(x)), float(sq(y))
        assert 0.0 <= fx <= 1.0
        if x <= y:
            assert fx <= fy

    def test_bad_kind(self):
        with pytest.raises(ContractError):
            Squash("tanh")

    def test_logistic_needs_positive_steepness(self):
        with pytest.raises(ContractError):
            Squash.logistic(steepness=0)


class TestStep:
    def test_zero_state_threshold_stays_zero(self):
        fcm = flip_flop()
        out = step(fcm, [0, 0], Squash.threshold())
        assert np.array_equal(out, [0, 0])

    def test_flip_flop_single_step(self):
        fcm = flip_flop()
        out = step(fcm, [1, 0], Squash.threshold())
        assert np.array_equal(out, [0, 1])

    def test_zero_matrix_logistic_gives_half(self):
        fcm = Fcm(["a", "b", "c"], np.zeros((3, 3)))
        out = step(fcm, [1, 0, 0.5], Squash.logistic(steepness=1))
        assert np.allclose(out, 0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ContractError):
            step(flip_flop(), [1, 0, 0], Squash.threshold())

    def test_state_outside_unit_interval(self):
        with pytest.raises(ContractError):
            step(flip_flop(), [1.5, 0], Squash.threshold())

    def test_output_always_in_unit_interval(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            fcm = random_fcm(rng, int(rng.integers(2, 7)), density=0.6)
            state = rng.uniform(0, 1, size=fcm.n)
            for squash in (Squash.logistic(), Squash.threshold(), Squash.clipped_linear()):
                out = step(fcm, state, squash)
                assert np.all(out >= 0) and np.all(out <= 1)


class TestTrajectory:
    def test_fixed_point_ends_in_repeat(self):
        fcm = Fcm(["a", "b"], np.zeros((2, 2)))
        states = trajectory(fcm, [1, 1], Squash.threshold(), 10)
        assert np.array_equal(states[-1], states[-2])

    def test_flip_flop_alternates(self):
        states = trajectory(flip_flop(), [1, 0], Squash.threshold(), 10)
        expected = [[1, 0], [0, 1], [1, 0]]
        assert len(states) == 3
        for got, want in zip(states, expected):
            assert np.array_equal(got, want)

    def test_zero_max_steps_rejected(self):
        with pytest.raises(ContractError):
            trajectory(flip_flop(), [1, 0], Squash.threshold(), 0)

    def test_length_bounded_by_max_steps(self):
        rng = np.random.default_rng(3)
        fcm = random_fcm(rng, 5, density=0.8)
        states = trajectory(fcm, rng.uniform(0, 1, 5), Squash.logistic(), 7)
        assert len(states) <= 8


class TestFindEquilibrium:
    def test_flip_flop_is_period_two_cycle(self):
        eq = find_equilibrium(flip_flop(), [1, 0], Squash.threshold(), 50)
        assert isinstance(eq, LimitCycle)
        assert eq.period == 2
        assert len(eq.states) == 2

    def test_zero_matrix_threshold_fixed_point(self):
        fcm = Fcm(["a", "b", "c"], np.zeros((3, 3)))
        eq = find_equilibrium(fcm, [1, 0, 1], Squash.threshold(), 50)
        assert isinstance(eq, FixedPoint)
        assert np.array_equal(eq.state, [0, 0, 0])

    def test_non_convergent_reported(self):
        # One step is too few to certify anything for the flip-flop.
        eq = find_equilibrium(flip_flop(), [1, 0], Squash.threshold(), 1)
        assert isinstance(eq, NonConvergent)
        assert eq.steps_run == 1

    def test_agrees_with_independent_scanner_logistic(self):
        rng = np.random.default_rng(11)
        squash = Squash.logistic(steepness=1)
        for _ in range(20):
            fcm = random_fcm(rng, 3, density=0.8)
            initial = rng.uniform(0, 1, 3)
            eq = find_equilibrium(fcm, initial, squash, 1000, tol=1e-9)
            kind, period = scan_equilibrium(
                fcm.edges, initial, lambda x: 1 / (1 + np.exp(-x)), 1000, 1e-9
            )
            if isinstance(eq, FixedPoint):
                assert kind == "fixed"
            elif isinstance(eq, LimitCycle):
                assert (kind, period) == ("cycle", eq.period)
            else:
                assert kind == "none"

    def test_certified_equilibria_reverify_under_step(self):
        rng = np.random.default_rng(23)
        squash = Squash.threshold()
        for _ in range(40):
            fcm = random_fcm(rng, 4, density=0.7)
            initial = rng.integers(0, 2, 4).astype(float)
            eq = find_equilibrium(fcm, initial, squash, 40, tol=0.0)
            if isinstance(eq, FixedPoint):
                assert np.array_equal(step(fcm, eq.state, squash), eq.state)
            elif isinstance(eq, LimitCycle):
                for i, state in enumerate(eq.states):
                    nxt = eq.states[(i + 1) % eq.period]
                    assert np.array_equal(step(fcm, state, squash), nxt)


class TestBasinMap:
    def test_zero_matrix_single_basin(self):
        fcm = Fcm(["a", "b"], np.zeros((2, 2)))
        basins = basin_map(fcm, Squash.threshold(), 10)
        assert set(basins.corners.values()) == {0}
        assert len(basins.corners) == 4

    def test_flip_flop_corners_share_cycle(self):
        basins = basin_map(flip_flop(), Squash.threshold(), 10)
        assert basins.corners[(1, 0)] == basins.corners[(0, 1)]
        eq = basins.equilibria[basins.corners[(1, 0)]]
        assert isinstance(eq, LimitCycle) and eq.period == 2
        # (0,0) and (1,1) are distinct fixed points
        assert basins.corners[(0, 0)] != basins.corners[(1, 1)]

    def test_enumeration_bound_refusal(self):
        fcm = Fcm([f"n{i}" for i in range(21)], np.zeros((21, 21)))
        with pytest.raises(EnumerationBoundError):
            basin_map(fcm, Squash.threshold(), 5, max_nodes=20)

    def test_partition_is_exhaustive_and_disjoint(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            fcm = random_fcm(rng, 4, density=0.6)
            basins = basin_map(fcm, Squash.threshold(), 40)
            corners = set(basins.corners)
            assert len(corners) == 16
            assert all(len(c) == 4 for c in corners)
            assert set(basins.corners.values()) <= set(basins.equilibria)


class TestPadAndMix:
    def test_pad_identity_when_same_order(self):
        fcm = Fcm(["a", "b"], [[0, 0.5], [0, 0]])
        assert np.array_equal(pad_edges(fcm, ["a", "b"]), fcm.edges)

    def test_pad_single_node(self):
        fcm = Fcm(["A"], [[0.0]])
        padded = pad_edges(fcm, ["A", "B"])
        assert np.array_equal(padded, np.zeros((2, 2)))

    def test_pad_into_superset(self):
        fcm = Fcm(["A", "B"], [[0, 0.5], [0, 0]])
        padded = pad_edges(fcm, ["A", "B", "C"])
        expected = np.zeros((3, 3))
        expected[0, 1] = 0.5
        assert np.array_equal(padded, expected)

    def test_pad_missing_node_rejected(self):
        fcm = Fcm(["A", "B"], [[0, 0.5], [0, 0]])
        with pytest.raises(ContractError, match="missing"):
            pad_edges(fcm, ["A", "C"])

    def test_mix_single_identity(self):
        fcm = Fcm(["A", "B"], [[0, 0.5], [-0.25, 0]])
        mixed = mix([fcm], [1.0])
        assert mixed == fcm

    def test_mix_degenerate_weights_pick_first(self):
        a = Fcm(["A", "B"], [[0, 0.5], [-0.25, 0]])
        b = Fcm(["A", "B"], [[0, -1.0], [1.0, 0]])
        mixed = mix([a, b], [1.0, 0.0])
        assert mixed == a

    def test_mix_worked_example(self):
        a = Fcm(["A", "B"], [[0, 0.8], [0, 0]])
        b = Fcm(["B", "C"], [[0, -0.4], [0, 0]])
        mixed = mix([a, b], [0.5, 0.5])
        assert mixed.labels == ("A", "B", "C")
        expected = np.zeros((3, 3))
        expected[0, 1] = 0.4
        expected[1, 2] = -0.2
        assert np.max(np.abs(mixed.edges - expected)) <= 1e-12

    def test_mix_weight_validation(self):
        fcm = Fcm(["A"], [[0.0]])
        with pytest.raises(ContractError):
            mix([fcm, fcm], [0.5, 0.6])
        with pytest.raises(ContractError):
            mix([fcm], [-1.0])
        with pytest.raises(ContractError):
            mix([], [])
        with pytest.raises(ContractError):
            validate_mix_weights([0.5], 2)

    def test_mix_closure_random(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            m = int(rng.integers(1, 4))
            fcms = [random_fcm(rng, int(rng.integers(1, 6))) for _ in range(m)]
            weights = rng.dirichlet(np.ones(m))
            mixed = mix(fcms, weights)
            assert np.all(np.abs(mixed.edges) <= 1.0)
            assert np.all(np.diag(mixed.edges) == 0.0)

    def test_mix_permutation_consistency(self):
        rng = np.random.default_rng(29)
        a = random_fcm(rng, 3)
        b = Fcm(["extra node", "chronic stress"], [[0, -0.6], [0.3, 0]])
        c = random_fcm(rng, 2)
        weights = [0.5, 0.2, 0.3]
        forward = mix([a, b, c], weights)
        backward = mix([c, a, b], [0.3, 0.5, 0.2])
        assert set(forward.labels) == set(backward.labels)
        for src in forward.labels:
            for tgt in forward.labels:
                i, j = forward.index_of(src), forward.index_of(tgt)
                k, l = backward.index_of(src), backward.index_of(tgt)
                assert abs(forward.edges[i, j] - backward.edges[k, l]) <= 1e-12


class TestImportance:
    def test_zero_matrix(self):
        fcm = Fcm(["a", "b"], np.zeros((2, 2)))
        assert np.array_equal(node_degree_importance(fcm), [0, 0])

    def test_single_edge(self):
        fcm = Fcm(["A", "B", "C"], [[0, 0.5, 0], [0, 0, 0], [0, 0, 0]])
        assert np.array_equal(node_degree_importance(fcm), [1, 1, 0])

    def test_complete_triangle(self):
        m = np.full((3, 3), 0.5)
        np.fill_diagonal(m, 0.0)
        fcm = Fcm(["a", "b", "c"], m)
        assert np.array_equal(node_degree_importance(fcm), [4, 4, 4])

    def test_zero_tol_masks_small_weights(self):
        fcm = Fcm(["a", "b"], [[0, 0.05], [0, 0]])
        assert np.array_equal(node_degree_importance(fcm, zero_tol=0.1), [0, 0])


def test_equilibria_match_rotation():
    s = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    a = LimitCycle(states=(s[0], s[1]), period=2)
    b = LimitCycle(states=(s[1], s[0]), period=2)
    assert equilibria_match(a, b)
    assert not equilibria_match(a, FixedPoint(state=s[0]))
