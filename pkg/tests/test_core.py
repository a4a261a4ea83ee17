import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csitrack.core import (Axis, CsiFrame, DomainError, DomainTag, check_stream_shape, fold,
                           fold_array, to_domain, unfold, unfold_array)
from csitrack.covariance import outer
from csitrack.eigen import eigendecompose


def _frame(rng, shape, domain=DomainTag.FREQUENCY_CSI):
    return CsiFrame(0.0, rng.normal(size=shape) + 1j * rng.normal(size=shape), domain)


def test_dy_unfolding_of_3x3x30_is_30x9(rng):
    u = unfold(_frame(rng, (3, 3, 30)), Axis.DY)
    assert u.matrix.shape == (30, 9)


def test_siso_unfolding_is_the_flat_vector(rng):
    f = _frame(rng, (1, 1, 7))
    u = unfold(f, Axis.DY)
    assert u.matrix.shape == (7, 1)
    np.testing.assert_array_equal(u.matrix[:, 0], f.data.ravel())


def test_unfolding_index_bookkeeping(rng):
    # enumerate every (rx, tx, sc) triple and check where it lands
    shape = (2, 2, 4)
    data = _frame(rng, shape).data
    for axis in Axis:
        M = unfold_array(data, axis)
        others = [i for i in range(3) if i != int(axis)]
        for idx in itertools.product(*(range(s) for s in shape)):
            row = idx[int(axis)]
            a, b = (idx[i] for i in others)
            col = a * shape[others[1]] + b
            assert M[row, col] == data[idx]
        f = CsiFrame(0.0, data)
        assert fold(unfold(f, axis)) == f


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[st.integers(1, 5)] * 3), st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_fold_inverts_unfold(shape, axis, seed):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    M = unfold_array(data, axis)
    assert M.shape[0] == shape[axis]
    assert sorted(M.ravel().tolist(), key=lambda z: (z.real, z.imag)) == \
        sorted(data.ravel().tolist(), key=lambda z: (z.real, z.imag))
    np.testing.assert_array_equal(fold_array(M, axis, shape), data)


def test_impulse_delay_profile_gives_flat_response():
    n = 16
    data = np.zeros((1, 1, n), dtype=complex)
    data[0, 0, 0] = 1.0
    csi = to_domain(CsiFrame(0.0, data, DomainTag.TIME_CIR), DomainTag.FREQUENCY_CSI)
    np.testing.assert_allclose(csi.data, np.full((1, 1, n), 1 / np.sqrt(n)), atol=1e-15)
    assert csi.domain is DomainTag.FREQUENCY_CSI


def test_domain_round_trip_and_parseval(rng):
    f = _frame(rng, (3, 3, 30), DomainTag.TIME_CIR)
    g = to_domain(f, DomainTag.FREQUENCY_CSI)
    back = to_domain(g, "cir")
    rel = np.linalg.norm(back.data - f.data) / np.linalg.norm(f.data)
    assert rel < 1e-12
    assert abs(np.linalg.norm(g.data) ** 2 / np.linalg.norm(f.data) ** 2 - 1) < 1e-12


def test_same_domain_conversion_is_an_error(rng):
    with pytest.raises(DomainError):
        to_domain(_frame(rng, (1, 1, 4)), DomainTag.FREQUENCY_CSI)


def test_dy_eigenvalues_invariant_under_duality(rng):
    f = _frame(rng, (3, 3, 30), DomainTag.TIME_CIR)
    g = to_domain(f, DomainTag.FREQUENCY_CSI)
    a = eigendecompose(outer(f, Axis.DY)).eigenvalues
    b = eigendecompose(outer(g, Axis.DY)).eigenvalues
    np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-9 * a[0])


def test_frame_validation():
    with pytest.raises(ValueError):
        CsiFrame(0.0, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        CsiFrame(0.0, np.zeros((0, 3, 3)))
    with pytest.raises(ValueError):
        CsiFrame(0.0, np.array([[[np.nan]]]))
    f = CsiFrame(1.0, np.ones((1, 1, 2)))
    assert not f.data.flags.writeable


def test_axis_and_domain_parsing():
    assert Axis.parse("Dy") is Axis.DY
    assert Axis.parse(0) is Axis.RX
    assert DomainTag.parse("csi") is DomainTag.FREQUENCY_CSI
    assert DomainTag.parse("cir") is DomainTag.TIME_CIR
    with pytest.raises(ValueError):
        Axis.parse("zz")


def test_stream_shape_check(rng):
    frames = [_frame(rng, (1, 1, 4)), _frame(rng, (1, 1, 5))]
    with pytest.raises(ValueError):
        list(check_stream_shape(frames))
