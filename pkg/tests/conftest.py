"""Shared helpers: dense brute-force references for small chains."""

from __future__ import annotations

import numpy as np
import pytest

from bicsim import mps


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260822)


def random_mps(
    rng: np.random.Generator,
    n_sites: int,
    chi: int = 3,
    roles: list | None = None,
) -> mps.MpsState:
    """Random normalized MPS with ragged interior bonds up to ``chi``."""
    dims = [1]
    for i in range(n_sites - 1):
        cap = min(chi, 4 ** (i + 1), 4 ** (n_sites - i - 1))
        dims.append(int(rng.integers(1, cap + 1)))
    dims.append(1)
    tensors = []
    for i in range(n_sites):
        shape = (dims[i], 4, dims[i + 1])
        t = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        tensors.append(np.ascontiguousarray(t))
    if roles is None:
        roles = list(range(n_sites))
    state = mps.MpsState(tensors=tensors, roles=list(roles))
    # the fresh tensors are not canonical: a full round trip makes the
    # tracked center honest before tests rely on it
    mps.move_center(state, n_sites - 1)
    mps.move_center(state, 0)
    nrm = mps.norm(state)
    state.tensors[0] = state.tensors[0] / nrm
    return state


def dense_vector(state: mps.MpsState) -> np.ndarray:
    """Flattened dense amplitudes, leftmost site's index slowest."""
    return mps.to_dense(state, max_sites=12)


def dense_apply(vec: np.ndarray, op: np.ndarray, first: int, n_sites: int):
    """Apply a k-site operator densely at ``first`` on a chain of 4-level sites."""
    k = round(np.log(op.shape[0]) / np.log(4))
    before = 4**first
    after = 4 ** (n_sites - first - k)
    v = vec.reshape(before, 4**k, after)
    out = np.einsum("pq,aqb->apb", op, v)
    return out.reshape(-1)
