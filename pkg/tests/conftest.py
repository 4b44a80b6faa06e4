import numpy as np
import pytest

from dualtrap import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so individual tests time cleanly."""
    _kernels.mathieu_monodromy(0.0, 0.1, 64)
    out_t = np.empty(2)
    out_p = np.empty((2, 1, 3))
    out_v = np.empty((2, 1, 3))
    _kernels.rk4_trajectory(
        np.zeros((1, 3)), np.zeros((1, 3)), np.array([1.6e-19]),
        np.array([1e-26]), 0.0, 1e-9, 1, 0.0, 1.0, 0.0, 2.0, 1.0,
        np.zeros(1), 0.0, np.zeros(3), 0.0, 1e-9, 1.0, 1,
        out_t, out_p, out_v)
