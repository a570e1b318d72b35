"""Numba-jitted twins of the kernels in ``numpy_impl``.

Same algorithms and signatures, written in the loop/dot subset that
``@njit`` compiles; importing this module requires a working numba.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .numpy_impl import DEGENERACY_TOL, NOISE_FLOOR


@njit(cache=True)
def select_rank(s, trunc_eps, chi_max):
    n = s.shape[0]
    nkeep = 0
    for i in range(n):
        if s[i] >= NOISE_FLOOR:
            nkeep += 1
    if nkeep == 0:
        nkeep = 1
    k = nkeep
    tail = 0.0
    while k > 1:
        c = s[k - 1] * s[k - 1]
        if tail + c <= trunc_eps:
            tail += c
            k -= 1
        else:
            break
    if k > chi_max:
        k = chi_max
    while k < nkeep and (s[k - 1] - s[k]) <= DEGENERACY_TOL:
        k += 1
    if k > chi_max:
        k = chi_max
    discarded = 0.0
    for i in range(k, n):
        discarded += s[i] * s[i]
    return k, discarded


@njit(cache=True)
def _split_mat(mat, trunc_eps, chi_max, absorb_right):
    """SVD-split of a (chi_l*d1, d2*chi_r) matrix; shared splitting core."""
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    k, discarded = select_rank(s, trunc_eps, chi_max)
    uk = np.ascontiguousarray(u[:, :k])
    vk = np.ascontiguousarray(vh[:k, :])
    sk = s[:k]
    if absorb_right:
        a = uk
        b = sk.reshape(k, 1) * vk
    else:
        a = uk * sk.reshape(1, k)
        b = vk
    return a, b, discarded


@njit(cache=True)
def split_theta(theta, trunc_eps, chi_max, absorb_right):
    chi_l, d1, d2, chi_r = theta.shape
    mat = np.ascontiguousarray(theta).reshape(chi_l * d1, d2 * chi_r)
    a, b, discarded = _split_mat(mat, trunc_eps, chi_max, absorb_right)
    k = a.shape[1]
    return a.reshape(chi_l, d1, k), b.reshape(k, d2, chi_r), discarded


@njit(cache=True)
def contract_pair(a, b):
    chi_l, d1, chi_m = a.shape
    chi_m2, d2, chi_r = b.shape
    am = np.ascontiguousarray(a).reshape(chi_l * d1, chi_m)
    bm = np.ascontiguousarray(b).reshape(chi_m2, d2 * chi_r)
    return np.dot(am, bm).reshape(chi_l, d1, d2, chi_r)


@njit(cache=True)
def _apply_middle(theta3, gate):
    """Multiply ``gate`` into the middle leg of a (chi_l, D, chi_r) block."""
    chi_l, big_d, chi_r = theta3.shape
    tmp = np.ascontiguousarray(theta3.transpose(1, 0, 2)).reshape(
        big_d, chi_l * chi_r
    )
    out = np.dot(gate, tmp).reshape(big_d, chi_l, chi_r)
    return np.ascontiguousarray(out.transpose(1, 0, 2))


@njit(cache=True)
def apply_gate2(a, b, gate, trunc_eps, chi_max, absorb_right):
    chi_l, d1, _ = a.shape
    _, d2, chi_r = b.shape
    theta = contract_pair(a, b).reshape(chi_l, d1 * d2, chi_r)
    theta = _apply_middle(theta, gate).reshape(chi_l, d1, d2, chi_r)
    return split_theta(theta, trunc_eps, chi_max, absorb_right)


@njit(cache=True)
def apply_swap(a, b, trunc_eps, chi_max, absorb_right):
    theta = contract_pair(a, b).transpose(0, 2, 1, 3)
    theta = np.ascontiguousarray(theta)
    return split_theta(theta, trunc_eps, chi_max, absorb_right)


@njit(cache=True)
def apply_gate3(a, b, c, gate, trunc_eps, chi_max):
    chi_l, d1, _ = a.shape
    _, d2, _ = b.shape
    _, d3, chi_r = c.shape
    ab = contract_pair(a, b).reshape(chi_l * d1 * d2, b.shape[2])
    cm = np.ascontiguousarray(c).reshape(c.shape[0], d3 * chi_r)
    theta = np.dot(ab, cm).reshape(chi_l, d1 * d2 * d3, chi_r)
    theta = _apply_middle(theta, gate).reshape(chi_l, d1, d2 * d3, chi_r)
    a_new, rest, disc1 = split_theta(theta, trunc_eps, chi_max, True)
    k1 = a_new.shape[2]
    rest = rest.reshape(k1, d2, d3, chi_r)
    b_new, c_new, disc2 = split_theta(rest, trunc_eps, chi_max, True)
    return a_new, b_new, c_new, disc1 + disc2


@njit(cache=True)
def shift_center_right(a, b):
    chi_l, d, chi_m = a.shape
    q, r = np.linalg.qr(np.ascontiguousarray(a).reshape(chi_l * d, chi_m))
    k = q.shape[1]
    chi_m2, d2, chi_r = b.shape
    bm = np.ascontiguousarray(b).reshape(chi_m2, d2 * chi_r)
    b_new = np.dot(r, bm).reshape(k, d2, chi_r)
    return np.ascontiguousarray(q).reshape(chi_l, d, k), b_new


@njit(cache=True)
def shift_center_left(a, b):
    chi_m, d, chi_r = b.shape
    mat = np.ascontiguousarray(b).reshape(chi_m, d * chi_r)
    q2, r2 = np.linalg.qr(np.ascontiguousarray(mat.conj().T))
    k = q2.shape[1]
    b_new = np.ascontiguousarray(q2.conj().T).reshape(k, d, chi_r)
    chi_l, d1, _ = a.shape
    am = np.ascontiguousarray(a).reshape(chi_l * d1, chi_m)
    a_new = np.dot(am, np.ascontiguousarray(r2.conj().T)).reshape(chi_l, d1, k)
    return a_new, b_new
