import itertools
import math

import numpy as np
import pytest

from gmn.qstate import MeasurementBasis


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def brute_probability(amplitudes, bases, settings, outcomes):
    """<psi| P_1 (x) ... (x) P_N |psi> built from explicit Kronecker products."""
    projs = []
    for b, s, x in zip(bases, settings, outcomes):
        v = b.vectors(s)[x]
        projs.append(np.outer(v, v.conj()))
    psi = np.asarray(amplitudes)
    return float(np.real(psi.conj() @ kron_all(projs) @ psi))


def brute_tensor(amplitudes, bases):
    n = len(bases)
    out = np.zeros((2,) * (2 * n))
    for s in itertools.product((0, 1), repeat=n):
        for x in itertools.product((0, 1), repeat=n):
            out[s + x] = brute_probability(amplitudes, bases, s, x)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def right_angles():
    return [MeasurementBasis(math.pi / 2)] * 3
