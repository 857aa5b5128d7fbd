import math

import numpy as np
import pytest
from conftest import random_demand, random_rotation, rotate_demand

from harmonode.descriptor import (
    AMPLITUDE_SIGNED,
    KERNEL_COORDINATE,
    KERNEL_GEODESIC,
    FeatureMatrix,
    FeatureVector,
    ForceFunctionSpec,
    build_force_function,
    distance,
    distance_matrix,
    equilibrium_perturbation,
    feature_matrices,
    feature_matrix_distance,
    feature_vector,
    node_feature_vectors,
    wrap_angle,
)
from harmonode.fea import COMPRESSION, TENSION, DemandEntry, NodalDemand
from harmonode.harmonics import build_grid


def demand_of(directions, magnitudes, senses=None, node=0):
    senses = senses or [TENSION] * len(magnitudes)
    entries = []
    for d, m, s in zip(directions, magnitudes, senses):
        v = np.asarray(d, dtype=float)
        v /= np.linalg.norm(v)
        entries.append(DemandEntry(tuple(float(c) for c in v), float(m), s))
    return NodalDemand(node, tuple(entries))


class TestWrapAngle:
    def test_range_boundaries(self):
        assert wrap_angle(np.pi) == pytest.approx(np.pi)
        assert wrap_angle(-np.pi) == pytest.approx(np.pi)
        assert wrap_angle(1.5 * np.pi) == pytest.approx(-0.5 * np.pi)
        assert wrap_angle(0.25) == pytest.approx(0.25)


class TestBuildForceFunction:
    @pytest.mark.parametrize("kernel", [KERNEL_COORDINATE, KERNEL_GEODESIC])
    def test_peak_equals_magnitude_at_grid_point(self, kernel):
        grid = build_grid(16)
        j, k = 20, 31
        direction = (
            math.sin(grid.theta[j]) * math.cos(grid.phi[k]),
            math.sin(grid.theta[j]) * math.sin(grid.phi[k]),
            math.cos(grid.theta[j]),
        )
        magnitude = 123.5
        demand = demand_of([direction], [magnitude])
        samples = build_force_function(ForceFunctionSpec(demand, delta=20.0, kernel=kernel), grid)
        assert samples.values[j, k] == pytest.approx(magnitude, rel=1e-9)
        assert samples.values.max() == pytest.approx(magnitude, rel=1e-9)

    def test_empty_demand_is_zero_function(self):
        grid = build_grid(8)
        samples = build_force_function(ForceFunctionSpec(NodalDemand(0, ())), grid)
        assert np.all(samples.values == 0.0)

    def test_antipodal_pair_is_point_symmetric(self):
        grid = build_grid(16)
        demand = demand_of([(0.3, -0.5, 0.81), (-0.3, 0.5, -0.81)], [1.0, 1.0])
        samples = build_force_function(
            ForceFunctionSpec(demand, delta=20.0, kernel=KERNEL_GEODESIC), grid
        )
        # Gauss-Legendre nodes are symmetric and n_phi is even, so the grid
        # maps onto itself under (theta, phi) -> (pi - theta, phi + pi)
        flipped = samples.values[::-1, :]
        shifted = np.roll(flipped, grid.n_phi // 2, axis=1)
        assert np.abs(samples.values - shifted).max() <= 1e-12

    def test_matches_direct_evaluation_oracle(self):
        grid = build_grid(8)
        direction = np.array([0.6, 0.0, 0.8])
        demand = demand_of([direction], [2.0])
        samples = build_force_function(
            ForceFunctionSpec(demand, delta=5.0, kernel=KERNEL_GEODESIC), grid
        )
        j, k = 3, 7
        point = np.array(
            [
                math.sin(grid.theta[j]) * math.cos(grid.phi[k]),
                math.sin(grid.theta[j]) * math.sin(grid.phi[k]),
                math.cos(grid.theta[j]),
            ]
        )
        gap = math.acos(max(-1.0, min(1.0, float(point @ direction))))
        assert samples.values[j, k] == pytest.approx(2.0 * math.exp(-5.0 * gap * gap), rel=1e-12)

    def test_signed_amplitudes_flip_compression(self):
        grid = build_grid(8)
        tension = demand_of([(0.0, 0.0, 1.0)], [3.0], [TENSION])
        compression = demand_of([(0.0, 0.0, 1.0)], [3.0], [COMPRESSION])
        spec = lambda d: ForceFunctionSpec(d, amplitude_mode=AMPLITUDE_SIGNED)
        up = build_force_function(spec(tension), grid)
        down = build_force_function(spec(compression), grid)
        assert np.abs(up.values + down.values).max() <= 1e-15

    def test_invalid_spec_rejected(self):
        demand = demand_of([(1.0, 0.0, 0.0)], [1.0])
        with pytest.raises(ValueError):
            ForceFunctionSpec(demand, delta=0.0)
        with pytest.raises(ValueError):
            ForceFunctionSpec(demand, kernel="cubic")
        with pytest.raises(ValueError):
            ForceFunctionSpec(demand, amplitude_mode="rms")


class TestFeatureVector:
    def test_zero_demand_gives_zero_vector(self):
        fv = feature_vector(NodalDemand(4, ()), l_max=8)
        assert fv.node == 4
        assert all(c == 0.0 for c in fv.components)
        assert len(fv) == 9

    @pytest.mark.parametrize("scale", [0.5, 2.0, 10.0])
    def test_positive_homogeneity(self, scale):
        rng = np.random.default_rng(37)
        grid = build_grid(16)
        demand = random_demand(rng)
        base = feature_vector(demand, grid=grid).as_array()
        scaled_demand = NodalDemand(
            demand.node,
            tuple(
                DemandEntry(e.direction, e.magnitude * scale, e.sense) for e in demand.entries
            ),
        )
        scaled = feature_vector(scaled_demand, grid=grid).as_array()
        assert np.allclose(scaled, scale * base, rtol=1e-9, atol=1e-12)

    def test_sense_flip_invariance(self):
        rng = np.random.default_rng(41)
        grid = build_grid(16)
        demand = random_demand(rng)
        flipped = NodalDemand(
            demand.node,
            tuple(
                DemandEntry(
                    e.direction,
                    e.magnitude,
                    COMPRESSION if e.sense == TENSION else TENSION,
                )
                for e in demand.entries
            ),
        )
        assert feature_vector(demand, grid=grid) == feature_vector(flipped, grid=grid)
        signed_base = feature_vector(demand, grid=grid, amplitude_mode=AMPLITUDE_SIGNED).as_array()
        signed_flip = feature_vector(flipped, grid=grid, amplitude_mode=AMPLITUDE_SIGNED).as_array()
        assert np.allclose(signed_base, signed_flip, rtol=1e-9, atol=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(43)
        grid = build_grid(16)
        demand = random_demand(rng, n_entries=6)
        shuffled = NodalDemand(demand.node, tuple(reversed(demand.entries)))
        a = feature_vector(demand, grid=grid).as_array()
        b = feature_vector(shuffled, grid=grid).as_array()
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_geodesic_rotation_invariance(self):
        rng = np.random.default_rng(47)
        grid = build_grid(16)
        for _ in range(5):
            demand = random_demand(rng)
            base = feature_vector(demand, grid=grid, kernel=KERNEL_GEODESIC).as_array()
            rotated = rotate_demand(demand, random_rotation(rng))
            moved = feature_vector(rotated, grid=grid, kernel=KERNEL_GEODESIC).as_array()
            assert np.abs(moved - base).max() <= 1e-6 * np.abs(base).max()
            rel = np.abs(moved - base) / np.abs(base)
            assert rel.max() <= 1e-6

    def test_coordinate_kernel_polar_rotation_invariance(self):
        # the coordinate kernel is exactly invariant for rotations about z;
        # general rotations are exercised by the acceptance suite
        rng = np.random.default_rng(53)
        grid = build_grid(16)
        demand = random_demand(rng)
        base = feature_vector(demand, grid=grid, kernel=KERNEL_COORDINATE).as_array()
        angle = 1.234
        spin = np.array(
            [
                [math.cos(angle), -math.sin(angle), 0.0],
                [math.sin(angle), math.cos(angle), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        moved = feature_vector(rotate_demand(demand, spin), grid=grid, kernel=KERNEL_COORDINATE)
        rel = np.abs(moved.as_array() - base) / np.abs(base)
        assert rel.max() <= 1e-9

    def test_valence_independence(self):
        grid = build_grid(16)
        few = feature_vector(demand_of([(1, 0, 0)], [1.0]), grid=grid)
        many = feature_vector(
            demand_of([(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, 0, 0)], [1.0] * 4), grid=grid
        )
        assert len(few) == len(many) == 17
        assert distance(few, many) >= 0.0


class TestDistances:
    def test_zero_self_distance(self):
        v = FeatureVector(components=(1.0, 2.0, 3.0))
        assert distance(v, v) == 0.0

    def test_distance_from_origin_is_norm(self):
        v = FeatureVector(components=(3.0, 4.0))
        zero = FeatureVector(components=(0.0, 0.0))
        assert distance(zero, v) == pytest.approx(5.0)

    def test_symmetry(self):
        rng = np.random.default_rng(59)
        for _ in range(10):
            a = FeatureVector(components=tuple(rng.normal(size=6)))
            b = FeatureVector(components=tuple(rng.normal(size=6)))
            assert distance(a, b) == pytest.approx(distance(b, a), rel=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="lengths"):
            distance(FeatureVector(components=(1.0,)), FeatureVector(components=(1.0, 2.0)))

    def test_matrix_invariants(self):
        rng = np.random.default_rng(61)
        vectors = [
            FeatureVector(components=tuple(rng.normal(size=5)), node=i) for i in range(7)
        ]
        vectors.append(FeatureVector(components=vectors[0].components, node=99))
        matrix = distance_matrix(vectors)
        values = matrix.values
        assert values.shape == (8, 8)
        assert np.abs(values - values.T).max() == 0.0
        assert np.all(np.diag(values) == 0.0)
        assert values[0, 7] == 0.0  # duplicated vector
        # triangle inequality for Euclidean construction
        for i in range(8):
            for j in range(8):
                for k in range(8):
                    assert values[i, j] <= values[i, k] + values[k, j] + 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            distance_matrix([])

    def test_reference_node_count_shape(self):
        rng = np.random.default_rng(185)
        vectors = [
            FeatureVector(components=tuple(rng.normal(size=17)), node=i) for i in range(185)
        ]
        matrix = distance_matrix(vectors)
        assert matrix.values.shape == (185, 185)
        assert matrix.node_ids == tuple(range(185))


class TestFeatureMatrices:
    def test_single_case_reduces_to_distance(self):
        a = FeatureVector(components=(1.0, 2.0), node=0)
        b = FeatureVector(components=(4.0, 6.0), node=0)
        ma = FeatureMatrix(node=0, cases=("dead",), vectors=(a,))
        mb = FeatureMatrix(node=0, cases=("dead",), vectors=(b,))
        assert feature_matrix_distance(ma, mb) == pytest.approx(distance(a, b))

    def test_identical_matrices(self):
        a = FeatureVector(components=(1.0, 2.0), node=0)
        m = FeatureMatrix(node=0, cases=("dead", "live"), vectors=(a, a))
        assert feature_matrix_distance(m, m) == 0.0

    def test_pythagorean_single_differing_case(self):
        shared = FeatureVector(components=(1.0, 1.0), node=0)
        a2 = FeatureVector(components=(2.0, 2.0), node=0)
        b2 = FeatureVector(components=(5.0, 6.0), node=0)
        ma = FeatureMatrix(node=0, cases=("dead", "live"), vectors=(shared, a2))
        mb = FeatureMatrix(node=0, cases=("dead", "live"), vectors=(shared, b2))
        assert feature_matrix_distance(ma, mb) == pytest.approx(distance(a2, b2))

    def test_case_mismatch_rejected(self):
        a = FeatureVector(components=(1.0,), node=0)
        ma = FeatureMatrix(node=0, cases=("dead",), vectors=(a,))
        mb = FeatureMatrix(node=0, cases=("live",), vectors=(a,))
        with pytest.raises(ValueError, match="case"):
            feature_matrix_distance(ma, mb)

    def test_grouping_by_node(self):
        va = [FeatureVector(components=(1.0, 0.0), node=n) for n in (0, 1)]
        vb = [FeatureVector(components=(0.0, 1.0), node=n) for n in (0, 1)]
        matrices = feature_matrices({"dead": va, "live": vb})
        assert [m.node for m in matrices] == [0, 1]
        assert matrices[0].cases == ("dead", "live")
        with pytest.raises(ValueError, match="node sets"):
            feature_matrices({"dead": va, "live": list(reversed(vb))})


class TestEquilibriumPerturbation:
    def _balanced_demand(self):
        # three members balancing a downward load: two horizontal, one steep
        applied = np.array([0.0, 0.0, -1000.0])
        raw = [(1.0, 0.0, 0.0), (-1.0, 1.0, 0.0), (0.0, -0.6, 0.8)]
        directions = [tuple(np.asarray(d) / np.linalg.norm(d)) for d in raw]
        # choose signed magnitudes so sum(c_i u_i) + applied = 0
        span = np.array(directions).T
        signed, *_ = np.linalg.lstsq(span, -applied, rcond=None)
        entries = [
            DemandEntry(
                d, abs(float(c)), TENSION if c >= 0 else COMPRESSION
            )
            for d, c in zip(directions, signed)
        ]
        return NodalDemand(0, tuple(entries)), applied

    def test_identity_at_t_zero(self):
        demand, applied = self._balanced_demand()
        unchanged = equilibrium_perturbation(demand, 2, 0.0, applied, (1.0, 1.0, 1.0))
        for before, after in zip(demand.entries, unchanged.entries):
            assert after.magnitude == pytest.approx(before.magnitude, abs=1e-10)
            assert np.allclose(after.direction, before.direction, atol=1e-12)

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9, 1.0])
    def test_equilibrium_holds_along_arc(self, t):
        demand, applied = self._balanced_demand()
        moved = equilibrium_perturbation(demand, 2, t, applied, (0.5, 0.5, 0.70710678))
        total = np.zeros(3)
        for entry in moved.entries:
            total += entry.signed_magnitude() * np.asarray(entry.direction)
        assert np.linalg.norm(total + applied) <= 1e-9 * np.linalg.norm(applied)

    def test_rank_deficient_rejected(self):
        # all directions in the xy plane cannot carry a z load
        demand = demand_of([(1, 0, 0), (0, 1, 0), (-1, 0, 0)], [1.0, 1.0, 1.0])
        with pytest.raises(ValueError, match="rank-deficient"):
            equilibrium_perturbation(demand, 0, 0.5, (0.0, 0.0, -100.0), (0, 1, 0))

    def test_antipodal_arc_rejected(self):
        demand, applied = self._balanced_demand()
        start = demand.entries[2].direction
        with pytest.raises(ValueError, match="antipodal"):
            equilibrium_perturbation(demand, 2, 0.5, applied, tuple(-c for c in start))

    def test_bad_arguments(self):
        demand, applied = self._balanced_demand()
        with pytest.raises(ValueError):
            equilibrium_perturbation(demand, 2, 1.5, applied, (1, 0, 0))
        with pytest.raises(ValueError):
            equilibrium_perturbation(demand, 9, 0.5, applied, (1, 0, 0))

    def test_smooth_feature_path(self):
        demand, applied = self._balanced_demand()
        grid = build_grid(16)
        target = (0.5, 0.5, 0.70710678)
        vectors = []
        steps = 20
        for i in range(steps + 1):
            moved = equilibrium_perturbation(demand, 2, i / steps, applied, target)
            vectors.append(feature_vector(moved, grid=grid).as_array())
        gaps = [np.linalg.norm(vectors[i + 1] - vectors[i]) for i in range(steps)]
        scale = max(np.linalg.norm(v) for v in vectors)
        assert max(gaps) <= 0.2 * scale  # small steps stay small


def test_node_feature_vectors_share_grid_and_order(flat_model):
    from harmonode.fea import extract_demands, solve

    result = solve(flat_model)
    demands = extract_demands(flat_model, result)
    vectors = node_feature_vectors(demands[:5], l_max=8, load_case=result.load_case)
    assert [v.node for v in vectors] == [d.node for d in demands[:5]]
    assert all(v.load_case == "gravity" for v in vectors)
    assert all(len(v) == 9 for v in vectors)
