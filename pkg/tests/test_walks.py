import itertools
import math

import numpy as np
import pytest

from tomwalk.apollonian import generate
from tomwalk.qcore import (
    KrausMap,
    ket,
    mat_equal,
    maximally_mixed,
    projector,
    qutrit_fourier_kets,
    sigma_x,
    sigma_z,
    subspace_operators,
)
from tomwalk.tom import (
    InvalidTomError,
    TomClass,
    TransitionOperationMatrix,
    apply_tom,
    localized_state,
    tom_cells_equal,
    validate_tom,
    vertex_masses,
)
from tomwalk.walks import (
    build_case1,
    build_case2,
    build_case3,
    build_classical,
    build_simple4,
    build_walk,
    projector_pairs,
)

from tomwalk.passage import classical_transition_matrix


def test_all_builders_produce_valid_toms():
    specs = [
        build_classical(generate(3)),
        build_simple4(),
        build_case1(generate(3)),
        build_case2(generate(5)),
        build_case3(),
    ]
    for spec in specs:
        assert validate_tom(spec.tom, 1e-9) is TomClass.TOM
        assert spec.tom.n_vertices == spec.network.n_vertices


class TestClassical:
    def test_k4_columns_are_uniform_thirds(self):
        t = build_classical(generate(1)).tom
        for j in range(4):
            ops = t.column_operators(j)
            assert len(ops) == 3
            for op in ops:
                assert abs(op[0, 0] - 1 / math.sqrt(3)) < 1e-12

    def test_center_column_has_twelve_cells(self):
        t = build_classical(generate(3)).tom
        ops = t.column_operators(3)
        assert len(ops) == 12
        assert all(abs(op[0, 0] - 1 / math.sqrt(12)) < 1e-12 for op in ops)

    def test_triangle_columns_are_halves(self):
        t = build_classical(generate(0)).tom
        for j in range(3):
            ops = t.column_operators(j)
            assert len(ops) == 2
            assert all(abs(op[0, 0] - 1 / math.sqrt(2)) < 1e-12 for op in ops)


class TestSimple4:
    def test_cells_match_the_printed_operators(self):
        spec = build_simple4()
        x, y, z = qutrit_fourier_kets()
        a, b, c = projector(x), projector(y), projector(z)
        t = spec.tom
        assert mat_equal(t.cell(0, 3).operators[0], c / math.sqrt(3))
        assert mat_equal(t.cell(1, 3).operators[0], b + c / math.sqrt(3))
        assert mat_equal(t.cell(2, 3).operators[0], a + c / math.sqrt(3))
        for j in range(3):
            assert mat_equal(t.cell(3, j).operators[0], c)
        assert mat_equal(t.cell(0, 1).operators[0], b)
        assert mat_equal(t.cell(0, 2).operators[0], a)
        for v in range(4):
            assert t.cell(v, v).is_zero

    def test_default_initial_is_maximally_mixed(self):
        spec = build_simple4()
        assert mat_equal(spec.default_initial, np.eye(3) / 3)

    def test_period_six_from_step_one(self):
        spec = build_simple4()
        alpha = localized_state(4, 3, spec.default_initial)
        history = []
        for _ in range(14):
            alpha = apply_tom(spec.tom, alpha)
            history.append(alpha.copy())
        for t in range(len(history) - 6):
            assert np.max(np.abs(history[t + 6] - history[t])) < 1e-12


# The explicit projector-pair assignment of the generation-3 walk, keyed by
# (corner, last-generation vertex) -> pair index, in the conventional
# numbering whose vertices 14/15 are swapped relative to ours.
EXPLICIT_PAIR_CELLS = {
    (0, 7): 0, (1, 7): 1, (4, 7): 2,
    (0, 8): 0, (4, 8): 1, (3, 8): 2,
    (1, 9): 0, (4, 9): 1, (3, 9): 2,
    (1, 10): 0, (2, 10): 1, (5, 10): 2,
    (1, 11): 0, (5, 11): 1, (3, 11): 2,
    (2, 12): 0, (5, 12): 1, (3, 12): 2,
    (0, 13): 0, (2, 13): 1, (6, 13): 2,
    (2, 14): 0, (6, 14): 1, (3, 14): 2,
    (0, 15): 0, (6, 15): 1, (3, 15): 2,
}


def reference_case1_tom() -> TransitionOperationMatrix:
    """The generation-3 pair walk assembled from the explicit listing."""
    pairs = projector_pairs()
    swap = {14: 15, 15: 14}
    net = generate(3)
    grid = {}
    for (corner, v), k in EXPLICIT_PAIR_CELLS.items():
        grid[(corner, v)] = KrausMap.from_operators(pairs[k])
    for u in range(net.n_vertices):
        if net.vertex_generation[u] == 3:
            continue
        scale = 1.0 / math.sqrt(net.degree(u))
        for v in net.neighbors[u]:
            # adjacency in the conventional numbering: swap 14 and 15
            grid[(swap.get(v, v), swap.get(u, u))] = KrausMap.from_operators(
                [np.eye(3) * scale]
            )
    return TransitionOperationMatrix(n_vertices=16, internal_dim=3, grid=grid)


class TestCase1:
    def test_pair_cells_named_in_the_listing(self):
        t = build_case1(generate(3)).tom
        pairs = projector_pairs()
        for (a, b), (ea, eb) in [((0, 7), pairs[0]), ((3, 8), pairs[2])]:
            ops = t.cell(a, b).operators
            assert len(ops) == 2
            assert mat_equal(ops[0], ea) and mat_equal(ops[1], eb)

    def test_non_last_generation_cells_are_rescaled_identities(self):
        net = generate(3)
        t = build_case1(net).tom
        ops = t.cell(7, 0).operators  # corner 0 (degree 9) feeding vertex 7
        assert len(ops) == 1
        assert mat_equal(ops[0], np.eye(3) / 3)

    def test_matches_explicit_listing_up_to_the_14_15_swap(self):
        mine = build_case1(generate(3)).tom
        reference = reference_case1_tom()
        swap = {14: 15, 15: 14}
        relabeled = TransitionOperationMatrix(
            n_vertices=16,
            internal_dim=3,
            grid={
                (swap.get(i, i), swap.get(j, j)): kmap
                for (i, j), kmap in mine.cells()
            },
        )
        assert validate_tom(reference) is TomClass.TOM
        assert tom_cells_equal(relabeled, reference, 1e-12)

    def test_column_of_a_last_generation_vertex_is_trace_preserving(self):
        t = build_case1(generate(3)).tom
        pooled = KrausMap.from_operators(t.column_operators(7), dim=3)
        assert mat_equal(pooled.completeness_sum, np.eye(3), 1e-12)

    def test_generation_zero_rejected(self):
        with pytest.raises(ValueError):
            build_case1(generate(0))

    def test_default_initial_is_uniform_ket(self):
        spec = build_case1(generate(3))
        assert mat_equal(spec.default_initial, np.full((3, 3), 1 / 3))


class TestCase2:
    def test_corner_to_center_carries_sigma_z(self):
        t = build_case2(generate(1)).tom
        ops = t.cell(3, 0).operators
        assert len(ops) == 1
        assert mat_equal(ops[0], sigma_z() / math.sqrt(3))

    def test_center_to_corner_carries_sigma_x(self):
        t = build_case2(generate(1)).tom
        assert mat_equal(t.cell(0, 3).operators[0], sigma_x() / math.sqrt(3))

    def test_corner_to_corner_carries_identity(self):
        t = build_case2(generate(1)).tom
        assert mat_equal(t.cell(1, 0).operators[0], np.eye(2) / math.sqrt(3))

    def test_g5_is_valid(self):
        assert validate_tom(build_case2(generate(5)).tom, 1e-9) is TomClass.TOM

    def test_marginals_follow_the_classical_chain(self):
        # bi-stochastic cells: vertex masses evolve exactly classically
        net = generate(3)
        spec = build_case2(net)
        p = classical_transition_matrix(net)
        alpha = localized_state(net.n_vertices, 3, spec.default_initial)
        masses = np.zeros(net.n_vertices)
        masses[3] = 1.0
        for _ in range(40):
            alpha = apply_tom(spec.tom, alpha)
            masses = p @ masses
            assert np.max(np.abs(vertex_masses(alpha) - masses)) < 1e-12

    def test_classical_builder_equals_dim1_reduction(self):
        net = generate(2)
        quantum = build_case2(net)
        classical = build_classical(net)
        rng = np.random.default_rng(2)
        start = int(rng.integers(net.n_vertices))
        alpha_q = localized_state(net.n_vertices, start, maximally_mixed(2))
        alpha_c = localized_state(net.n_vertices, start, np.eye(1))
        for _ in range(30):
            alpha_q = apply_tom(quantum.tom, alpha_q)
            alpha_c = apply_tom(classical.tom, alpha_c)
            assert np.max(np.abs(vertex_masses(alpha_q) - vertex_masses(alpha_c))) < 1e-12


class TestCase3:
    def test_class4_to_class2_cell_is_cx(self):
        spec = build_case3()
        part = spec.network.class_partition()
        _, c_x, _, _ = subspace_operators()
        # vertex 7 is in class 4 and its generation-2 neighbour 4 in class 2
        assert part.class_of[7] == 4 and part.class_of[4] == 2
        ops = spec.tom.cell(4, 7).operators
        assert len(ops) == 1
        assert mat_equal(ops[0], c_x)

    def test_center_column_resolves_identity(self):
        spec = build_case3()
        pooled = KrausMap.from_operators(spec.tom.column_operators(3), dim=4)
        assert mat_equal(pooled.completeness_sum, np.eye(4), 1e-12)

    def test_corner_column_resolves_identity(self):
        spec = build_case3()
        pooled = KrausMap.from_operators(spec.tom.column_operators(0), dim=4)
        assert mat_equal(pooled.completeness_sum, np.eye(4), 1e-12)

    def test_class_mapping_is_the_unique_valid_one(self):
        valid = []
        for perm in itertools.permutations(range(5)):
            try:
                build_case3(_class_permutation=perm)
            except InvalidTomError:
                continue
            valid.append(perm)
        assert valid == [(0, 1, 2, 3, 4)]


class TestDispatcher:
    def test_labels(self):
        for label, n in [("classical", 16), ("simple4", 4), ("case1", 16),
                         ("case2", 124), ("case3", 16)]:
            assert build_walk(label).n_vertices == n

    def test_generation_override(self):
        assert build_walk("classical", 1).n_vertices == 4
        assert build_walk("case2", 2).n_vertices == 7

    def test_fixed_families_reject_other_generations(self):
        with pytest.raises(ValueError):
            build_walk("simple4", 3)
        with pytest.raises(ValueError):
            build_walk("case3", 4)

    def test_unknown_label(self):
        with pytest.raises(KeyError):
            build_walk("case9")
