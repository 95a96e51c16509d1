import os
import subprocess
import sys

import numpy as np
import pytest

from stratexp import _kernels

from oracles import naive_iterated

needs_numba = pytest.mark.skipif(_kernels.numba_kernels is None, reason="numba not importable")


@pytest.mark.parametrize("n", [2, 8, 256])
def test_bridge_endpoint_and_variance(kernels, rng, n):
    z = rng.standard_normal((4000, n))
    W = kernels.bridge_values(z, 2.0)
    assert W.shape == (4000, n + 1)
    assert np.all(W[:, 0] == 0.0)
    np.testing.assert_array_equal(W[:, -1], np.sqrt(2.0) * z[:, 0])
    mid = W[:, n // 2]
    assert mid.var() == pytest.approx(1.0, rel=0.08)  # Var W(1) on [0, 2]


def test_bridge_prefix_refines(kernels, rng):
    z = rng.standard_normal((3, 64))
    fine = kernels.bridge_values(z, 1.0)
    coarse = kernels.bridge_values(np.ascontiguousarray(z[:, :32]), 1.0)
    np.testing.assert_array_equal(fine[:, ::2], coarse)


def test_iterated_sums_against_loop(kernels, rng):
    a1, a2 = rng.standard_normal((2, 5, 37))
    got = kernels.iterated_sums(a1, a2)
    for r in range(5):
        assert got[r] == pytest.approx(naive_iterated(a1[r], a2[r]), rel=1e-13)


def test_bilinear_and_quadratic_forms(kernels, rng):
    C = rng.standard_normal((6, 4))
    z1, z2 = rng.standard_normal((7, 6)), rng.standard_normal((7, 4))
    np.testing.assert_allclose(kernels.bilinear_compensated(C, z1, z2),
                               np.einsum("ab,ra,rb->r", C, z1, z2), rtol=1e-13)
    Phi = rng.standard_normal((9, 9))
    x, y = rng.standard_normal((2, 3, 9))
    np.testing.assert_allclose(kernels.quadratic_form(Phi, x, y),
                               np.einsum("ab,ra,rb->r", Phi, x, y), rtol=1e-12)


def test_compensated_sum_cancellation(kernels):
    C = np.array([[1e16, 1.0, -1e16]])
    z1 = np.ones((1, 1))
    z2 = np.ones((1, 3))
    assert kernels.bilinear_compensated(C, z1, z2)[0] == 1.0


@needs_numba
def test_numba_matches_numpy(rng):
    nb, npk = _kernels.numba_kernels, _kernels.numpy_kernels
    z = rng.standard_normal((5, 128))
    np.testing.assert_array_equal(nb.bridge_values(z, 1.5), npk.bridge_values(z, 1.5))
    a1, a2 = rng.standard_normal((2, 5, 128))
    np.testing.assert_allclose(nb.iterated_sums(a1, a2), npk.iterated_sums(a1, a2), rtol=1e-13)
    C = rng.standard_normal((11, 8))
    z1, z2 = rng.standard_normal((4, 11)), rng.standard_normal((4, 8))
    np.testing.assert_array_equal(nb.bilinear_compensated(C, z1, z2),
                                  npk.bilinear_compensated(C, z1, z2))
    Phi = rng.standard_normal((32, 32))
    x, y = rng.standard_normal((2, 4, 32))
    np.testing.assert_allclose(nb.quadratic_form(Phi, x, y), npk.quadratic_form(Phi, x, y), rtol=1e-12)


@pytest.mark.parametrize("flag, expect", [("1", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, expect):
    if expect == "numba" and _kernels.numba_kernels is None:
        pytest.skip("numba not importable")
    env = dict(os.environ, STRATEXP_NO_NUMBA=flag)
    code = ("from stratexp import _kernels as k;"
            "print('numba' if k.active is k.numba_kernels else 'numpy', k.USING_NUMBA)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    name, using = out.stdout.split()
    assert name == expect
    assert using == str(expect == "numba")
