"""Reference numpy implementation of the hot tensor kernels.

Every function here has a signature-identical twin in ``numba_impl``; the
test suite pins the two against each other.  Site tensors are C-contiguous
``complex128`` arrays of shape ``(left bond, physical, right bond)``.
"""

from __future__ import annotations

import numpy as np

#: Singular values below this are numerical noise and always dropped.
NOISE_FLOOR = 1e-14

#: Singular values closer than this are treated as degenerate: the
#: truncation cut is never placed inside such a pair (the larger count
#: is kept).  A hard ``chi_max`` cap still wins over this rule.
DEGENERACY_TOL = 1e-12


def select_rank(s, trunc_eps, chi_max):
    """Choose how many singular values to keep.

    Args:
        s: Singular values, descending, float64.
        trunc_eps: Maximum discarded squared-singular-value sum for this
            bond (the noise floor applies regardless).
        chi_max: Hard cap on the kept count.

    Returns:
        Tuple ``(k, discarded)``: kept count (>= 1) and the discarded
        squared sum, noise-floor drops included.
    """
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


def split_theta(theta, trunc_eps, chi_max, absorb_right):
    """Split a two-site block ``theta`` (chi_l, d1, d2, chi_r) by SVD.

    The singular values are absorbed into the right factor when
    ``absorb_right`` (new center on the right site), else into the left.

    Returns:
        ``(A, B, discarded)`` with ``A`` of shape (chi_l, d1, k) and ``B``
        of shape (k, d2, chi_r).
    """
    chi_l, d1, d2, chi_r = theta.shape
    mat = theta.reshape(chi_l * d1, d2 * chi_r)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    k, discarded = select_rank(s, trunc_eps, chi_max)
    u = np.ascontiguousarray(u[:, :k])
    vh = np.ascontiguousarray(vh[:k, :])
    sk = s[:k]
    if absorb_right:
        b = sk[:, None] * vh
        a = u
    else:
        a = u * sk[None, :]
        b = vh
    return (
        a.reshape(chi_l, d1, k),
        b.reshape(k, d2, chi_r),
        discarded,
    )


def contract_pair(a, b):
    """Merge two site tensors into a block (chi_l, d1, d2, chi_r)."""
    return np.tensordot(a, b, axes=([2], [0]))


def apply_gate2(a, b, gate, trunc_eps, chi_max, absorb_right):
    """Apply a (d1*d2 x d1*d2) unitary to two adjacent sites and re-split."""
    chi_l, d1, _ = a.shape
    _, d2, chi_r = b.shape
    theta = contract_pair(a, b).reshape(chi_l, d1 * d2, chi_r)
    theta = np.tensordot(gate, theta, axes=([1], [1])).transpose(1, 0, 2)
    theta = np.ascontiguousarray(theta).reshape(chi_l, d1, d2, chi_r)
    return split_theta(theta, trunc_eps, chi_max, absorb_right)


def apply_swap(a, b, trunc_eps, chi_max, absorb_right):
    """Exchange the physical legs of two adjacent sites and re-split.

    Equivalent to ``apply_gate2`` with the SWAP unitary, but performed as
    an exact index transposition.
    """
    theta = contract_pair(a, b).transpose(0, 2, 1, 3)
    theta = np.ascontiguousarray(theta)
    return split_theta(theta, trunc_eps, chi_max, absorb_right)


def apply_gate3(a, b, c, gate, trunc_eps, chi_max):
    """Apply a (d1*d2*d3)^2 unitary to three adjacent sites.

    MPS form is restored with two left-to-right SVD splits; the
    orthogonality center ends on the rightmost site.

    Returns:
        ``(A, B, C, discarded)`` with the summed discarded weight of both
        splits.
    """
    chi_l, d1, _ = a.shape
    _, d2, _ = b.shape
    _, d3, chi_r = c.shape
    theta = np.tensordot(contract_pair(a, b), c, axes=([3], [0]))
    theta = theta.reshape(chi_l, d1 * d2 * d3, chi_r)
    theta = np.tensordot(gate, theta, axes=([1], [1])).transpose(1, 0, 2)
    theta = np.ascontiguousarray(theta).reshape(chi_l, d1, d2 * d3, chi_r)
    a_new, rest, disc1 = split_theta(theta, trunc_eps, chi_max, True)
    k1 = a_new.shape[2]
    rest = rest.reshape(k1, d2, d3, chi_r)
    b_new, c_new, disc2 = split_theta(rest, trunc_eps, chi_max, True)
    return a_new, b_new, c_new, disc1 + disc2


def shift_center_right(a, b):
    """Move the orthogonality center one site right by QR.

    ``a`` (the current center) becomes left-canonical; the R factor is
    absorbed into ``b``.
    """
    chi_l, d, chi_m = a.shape
    q, r = np.linalg.qr(a.reshape(chi_l * d, chi_m))
    k = q.shape[1]
    return q.reshape(chi_l, d, k), np.tensordot(r, b, axes=([1], [0]))


def shift_center_left(a, b):
    """Move the orthogonality center one site left.

    ``b`` (the current center) becomes right-canonical; the remaining
    factor is absorbed into ``a``.
    """
    chi_m, d, chi_r = b.shape
    mat = b.reshape(chi_m, d * chi_r)
    q2, r2 = np.linalg.qr(np.ascontiguousarray(mat.conj().T))
    k = q2.shape[1]
    b_new = np.ascontiguousarray(q2.conj().T).reshape(k, d, chi_r)
    a_new = np.tensordot(a, np.ascontiguousarray(r2.conj().T), axes=([2], [0]))
    return a_new, b_new
