"""Functional evaluation: exact sums, marginals, linearity, excursions."""
import itertools

import numpy as np
import pytest

from latfield._errors import ModelError
from latfield.fieldsim import FieldSample, LatticeSpec
from latfield.functionals import (
    FULL,
    evaluate,
    excursion_volume,
    full_functional,
    marginal_evaluate,
    marginal_functional,
)
from latfield.hermite import CUSTOM, INDICATOR, PURE, HermiteSpec, hermite_eval


def _sample(values, blocks):
    return FieldSample(values=np.asarray(values, dtype=float),
                       lattice=LatticeSpec(blocks), seed=0, replicate_id=0)


def test_evaluate_exact_cases():
    zeros = _sample(np.zeros((4, 3)), ((4,), (3,)))
    assert evaluate(zeros, HermiteSpec(PURE, q=2)) == -12.0
    assert evaluate(zeros, HermiteSpec(INDICATOR, level=0.0)) == 12.0
    rng = np.random.default_rng(1)
    x = rng.standard_normal((5, 7))
    s = _sample(x, ((5,), (7,)))
    assert evaluate(s, HermiteSpec(PURE, q=1)) == pytest.approx(x.sum(), rel=1e-14)


def test_marginal_evaluate():
    zeros = _sample(np.zeros((4, 3)), ((4,), (3,)))
    assert marginal_evaluate(zeros, HermiteSpec(PURE, q=2), block=0, frozen=(1,)) == -4.0
    assert marginal_evaluate(zeros, HermiteSpec(PURE, q=2), block=1, frozen=(2,)) == -3.0

    one = _sample(np.array([[0.7]]), ((1,), (1,)))
    got = marginal_evaluate(one, HermiteSpec(PURE, q=3), block=0, frozen=(0,))
    assert got == pytest.approx(hermite_eval(3, 0.7))

    single_block = _sample(np.arange(6.0), ((6,),))
    assert marginal_evaluate(single_block, HermiteSpec(PURE, q=1), block=0) == 15.0


def test_marginal_fubini():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((3, 4, 5))
    s = _sample(x, ((3,), (4, 5)))
    phi = HermiteSpec(PURE, q=2)
    # block 0 marginals, summed over all frozen (axis-1, axis-2) coordinates
    total = sum(
        marginal_evaluate(s, phi, block=0, frozen=(j, k))
        for j, k in itertools.product(range(4), range(5))
    )
    assert total == pytest.approx(evaluate(s, phi), rel=1e-12)
    # block 1 marginals, frozen axis-0 coordinate
    total = sum(marginal_evaluate(s, phi, block=1, frozen=(i,)) for i in range(3))
    assert total == pytest.approx(evaluate(s, phi), rel=1e-12)


def test_marginal_validation():
    s = _sample(np.zeros((4, 3)), ((4,), (3,)))
    phi = HermiteSpec(PURE, q=1)
    with pytest.raises(ModelError):
        marginal_evaluate(s, phi, block=2, frozen=(0,))
    with pytest.raises(ModelError):
        marginal_evaluate(s, phi, block=0, frozen=(3,))  # axis 1 has size 3
    with pytest.raises(ModelError):
        marginal_evaluate(s, phi, block=0, frozen=(0, 0))


def test_linearity_via_custom():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((8, 8))
    s = _sample(x, ((8,), (8,)))
    combo = HermiteSpec(
        CUSTOM, func=lambda v: 2.0 * hermite_eval(1, v) + 3.0 * hermite_eval(2, v)
    )
    expected = 2.0 * evaluate(s, HermiteSpec(PURE, q=1)) + 3.0 * evaluate(
        s, HermiteSpec(PURE, q=2)
    )
    assert evaluate(s, combo) == pytest.approx(expected, rel=1e-14)


def test_excursion_volume():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((10, 10))
    s = _sample(x, ((10,), (10,)))
    assert excursion_volume(s, -1e9) == 100.0
    assert excursion_volume(s, 1e9) == 0.0
    for level in (-0.5, 0.0, 0.7):
        assert excursion_volume(s, level) == evaluate(
            s, HermiteSpec(INDICATOR, level=level)
        )


def test_tagged_records():
    s = _sample(np.zeros((2, 2)), ((2,), (2,)))
    phi = HermiteSpec(PURE, q=2)
    rec = full_functional(s, phi)
    assert rec.kind == FULL and rec.value == evaluate(s, phi)
    mrec = marginal_functional(s, phi, block=1, frozen=(0,))
    assert mrec.block == 1 and mrec.frozen == (0,) and mrec.value == -2.0
