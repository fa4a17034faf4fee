import numpy as np
import pytest

from minent import _sampling
from minent.linalg import DensityOperator


@pytest.fixture
def rng():
    return _sampling.stream(1234, 0)


def random_two_qubit_states(seed: int, count: int, rank: int | None = None):
    gen = _sampling.stream(seed, 0xABCD)
    mats = _sampling.random_density_matrices(gen, 4, count, rank=rank)
    return [DensityOperator(m, (2, 2)) for m in mats]


def random_qubit_channels(seed: int, count: int, kraus: int = 2):
    from minent.channels import QuantumChannel

    gen = _sampling.stream(seed, 0xBEEF)
    return [QuantumChannel(ks)
            for ks in _sampling.random_channels_kraus(gen, 2, 2, kraus, count)]
