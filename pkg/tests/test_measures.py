import numpy as np
import pytest

from robustmse import (
    AbsoluteContinuityError,
    ArgumentError,
    Measure,
    MeasureSet,
    MixtureWeights,
    PartitionAlgebra,
    RandomVariable,
    SampleSpace,
    ZeroMassBlockError,
    conditional_expectation,
    density,
    expectation,
    is_proper,
    mix,
    reference_measure,
)
from robustmse.randgen import rng_from_seed, random_instance


class TestMeasure:
    def test_negative_weight_rejected(self):
        with pytest.raises(ArgumentError):
            Measure(SampleSpace.of_size(2), [-0.1, 1.1])

    def test_sum_tolerance(self):
        with pytest.raises(ArgumentError):
            Measure(SampleSpace.of_size(2), [0.4, 0.5])

    def test_renormalizes_tiny_drift(self):
        thirds = [1 / 3, 1 / 3, 1 / 3]
        m = Measure(SampleSpace.of_size(3), thirds)
        assert m.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_duplicate_generators_warn(self):
        s = SampleSpace.of_size(2)
        g = Measure(s, [0.5, 0.5])
        with pytest.warns(UserWarning):
            MeasureSet([g, g])


class TestExpectation:
    def test_example_value(self, two_point):
        _, ms, xi, _ = two_point
        assert expectation(ms.generators[0], xi) == pytest.approx(6.5)

    def test_constant_preserved(self, two_point):
        space, ms, _, _ = two_point
        c = RandomVariable(space, [3.25, 3.25])
        for g in ms.generators:
            assert expectation(g, c) == pytest.approx(3.25)

    def test_plain_mean(self, two_point):
        space, _, xi, _ = two_point
        assert expectation(Measure(space, [0.5, 0.5]), xi) == pytest.approx(5.0)


class TestConditionalExpectation:
    def test_trivial_algebra_gives_mean(self, two_point):
        space, _, xi, triv = two_point
        out = conditional_expectation(Measure(space, [0.5, 0.5]), xi, triv)
        assert list(out.values) == [5.0, 5.0]

    def test_singletons_return_input(self, two_point):
        space, ms, xi, _ = two_point
        out = conditional_expectation(ms.generators[0], xi, PartitionAlgebra.discrete(space))
        assert out == xi

    def test_matches_unconditional_on_trivial(self, two_point):
        space, ms, xi, triv = two_point
        out = conditional_expectation(ms.generators[0], xi, triv)
        assert out.values[0] == pytest.approx(6.5)

    def test_zero_mass_block_errors(self):
        space = SampleSpace.of_size(3)
        p = Measure(space, [0.5, 0.5, 0.0])
        c = PartitionAlgebra(space, [(0, 1), (2,)])
        x = RandomVariable(space, [1.0, 2.0, 3.0])
        with pytest.raises(ZeroMassBlockError) as err:
            conditional_expectation(p, x, c)
        assert err.value.block == (2,)

    def test_fill_policy(self):
        space = SampleSpace.of_size(3)
        p = Measure(space, [0.5, 0.5, 0.0])
        c = PartitionAlgebra(space, [(0, 1), (2,)])
        x = RandomVariable(space, [1.0, 2.0, 3.0])
        out = conditional_expectation(p, x, c, zero_block_policy="fill_with_unconditional")
        assert out.values[2] == pytest.approx(1.5)


class TestMixAndReference:
    def test_even_mixture(self, two_point):
        _, ms, _, _ = two_point
        p = mix(ms, MixtureWeights([0.5, 0.5]))
        assert list(p.weights) == [0.5, 0.5]

    def test_vertex_returns_generator(self, two_point):
        _, ms, _, _ = two_point
        assert mix(ms, MixtureWeights([1.0, 0.0])) == ms.generators[0]

    def test_weight_count_checked(self, two_point):
        _, ms, _, _ = two_point
        with pytest.raises(ArgumentError):
            mix(ms, MixtureWeights([1.0]))

    def test_off_simplex_rejected(self):
        with pytest.raises(ArgumentError):
            MixtureWeights([0.7, 0.7])

    def test_reference_is_uniform_average(self, two_point):
        _, ms, _, _ = two_point
        assert list(reference_measure(ms).weights) == [0.5, 0.5]

    def test_reference_single_generator(self):
        s = SampleSpace.of_size(2)
        g = Measure(s, [0.3, 0.7])
        assert reference_measure(MeasureSet([g])) == g


class TestProperness:
    def test_example_is_proper(self, two_point):
        _, ms, _, _ = two_point
        assert is_proper(ms)

    def test_disjoint_supports_not_proper(self):
        s = SampleSpace.of_size(2)
        ms = MeasureSet([Measure(s, [1.0, 0.0]), Measure(s, [0.0, 1.0])])
        assert not is_proper(ms)

    def test_single_positive_generator(self):
        s = SampleSpace.of_size(3)
        assert is_proper(MeasureSet([Measure(s, [0.2, 0.3, 0.5])]))


class TestDensity:
    def test_identity_density(self, two_point):
        _, ms, _, _ = two_point
        g = ms.generators[0]
        assert list(density(g, g).values) == [1.0, 1.0]

    def test_pointwise_ratio(self):
        s = SampleSpace.of_size(2)
        out = density(Measure(s, [0.25, 0.75]), Measure(s, [0.5, 0.5]))
        assert list(out.values) == [0.5, 1.5]

    def test_null_point_ok_when_both_null(self):
        s = SampleSpace.of_size(2)
        out = density(Measure(s, [0.0, 1.0]), Measure(s, [0.5, 0.5]))
        assert list(out.values) == [0.0, 2.0]

    def test_absolute_continuity_enforced(self):
        s = SampleSpace.of_size(2)
        with pytest.raises(AbsoluteContinuityError):
            density(Measure(s, [0.5, 0.5]), Measure(s, [0.0, 1.0]))


class TestInvariants:
    def test_tower_property(self):
        rng = rng_from_seed(101)
        for _ in range(50):
            ms, xi, c = random_instance(rng)
            p = reference_measure(ms)
            cond = conditional_expectation(p, xi, c)
            assert expectation(p, cond) == pytest.approx(expectation(p, xi), abs=1e-10)

    def test_orthogonal_projection(self):
        rng = rng_from_seed(102)
        for _ in range(50):
            ms, xi, c = random_instance(rng)
            p = reference_measure(ms)
            cond = conditional_expectation(p, xi, c)
            eta = c.broadcast(rng.integers(-16, 17, size=c.num_blocks) / 16)
            inner = expectation(p, (xi - cond) * eta)
            assert inner == pytest.approx(0.0, abs=1e-10)

    def test_mix_expectation_linear_in_weights(self):
        rng = rng_from_seed(103)
        for _ in range(25):
            ms, xi, _ = random_instance(rng)
            w = rng.dirichlet(np.ones(len(ms)))
            lhs = expectation(mix(ms, MixtureWeights(w)), xi)
            rhs = sum(wk * expectation(g, xi) for wk, g in zip(w, ms.generators))
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_bayes_mixture_identity(self):
        rng = rng_from_seed(104)
        for _ in range(25):
            ms, xi, c = random_instance(rng)
            if not is_proper(ms) or len(ms) < 2:
                continue
            lam = float(rng.uniform(0.1, 0.9))
            p1, p2 = ms.generators[0], ms.generators[1]
            pair = MeasureSet([p1, p2])
            plam = mix(pair, MixtureWeights([lam, 1 - lam]))
            w1 = conditional_expectation(plam, density(p1, plam), c) * lam
            w2 = conditional_expectation(plam, density(p2, plam), c) * (1 - lam)
            assert np.max(np.abs(w1.values + w2.values - 1.0)) < 1e-10
            lhs = w1 * conditional_expectation(p1, xi, c) + w2 * conditional_expectation(p2, xi, c)
            rhs = conditional_expectation(plam, xi, c)
            assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10
