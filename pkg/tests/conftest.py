import pytest

from robustmse import Measure, MeasureSet, PartitionAlgebra, RandomVariable, SampleSpace


@pytest.fixture
def two_point():
    """The two-point instance used throughout: generators (1/4,3/4), (3/4,1/4),
    values (2, 8), trivial conditioning."""
    space = SampleSpace(("w1", "w2"))
    ms = MeasureSet([Measure(space, [0.25, 0.75]), Measure(space, [0.75, 0.25])])
    xi = RandomVariable(space, [2.0, 8.0])
    triv = PartitionAlgebra.trivial(space)
    return space, ms, xi, triv
