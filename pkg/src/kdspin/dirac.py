"""Dirac and Pauli matrix algebra in the Dirac representation.

Conventions:

* metric ``diag(1, -1, -1, -1)``; four-vectors are stored with upper index,
  :func:`lower` applies the metric explicitly;
* ``gamma^0 = beta``, ``gamma^i = beta alpha_i``;
* ``chi_up = (1, 0)``, ``chi_down = (0, 1)``, no extra phases;
* masses and momenta are in units of the electron mass, ``m = 1``.

Bispinors absorb the phase-space factor ``sqrt(m / E)`` so that
``u^dagger u = v^dagger v = 1``.
"""

import math

import numpy as np

from .errors import InvalidArgument

SQRT2 = math.sqrt(2.0)

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.array([SIGMA_X, SIGMA_Y, SIGMA_Z])

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

_ZERO2 = np.zeros((2, 2), dtype=complex)
BETA = np.block([[IDENTITY2, _ZERO2], [_ZERO2, -IDENTITY2]])
ALPHA_MATRICES = np.array([np.block([[_ZERO2, s], [s, _ZERO2]]) for s in PAULI])
GAMMA = np.array([BETA] + [BETA @ a for a in ALPHA_MATRICES])
# gamma^0 gamma^mu, the matrices sandwiched in the coupling terms
GAMMA0_GAMMA = np.array([BETA @ g for g in GAMMA])

SPIN_UP = np.array([1.0, 0.0], dtype=complex)
SPIN_DOWN = np.array([0.0, 1.0], dtype=complex)

PLUS, MINUS = +1, -1


def _as_momentum(k):
    k = np.asarray(k, dtype=float)
    if k.shape != (3,):
        raise InvalidArgument(f"expected a 3-momentum, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise InvalidArgument(f"non-finite momentum {k}")
    return k


def relativistic_energy(k):
    """Return ``sqrt(1 + |k|^2)`` for a 3-momentum ``k`` in units of m."""
    k = _as_momentum(k)
    return math.sqrt(1.0 + float(k @ k))


def lower(a):
    """Lower the index of a contravariant four-vector."""
    return METRIC @ np.asarray(a)


def minkowski_dot(a, b):
    """Bilinear contraction ``a^0 b^0 - a.b`` (no complex conjugation)."""
    return np.asarray(a) @ METRIC @ np.asarray(b)


def slash(p):
    """Feynman slash ``gamma^mu p_mu`` of a contravariant four-vector."""
    return np.einsum("m,mij->ij", lower(p), GAMMA)


def dirac_bar(w):
    """Row vector ``w^dagger gamma^0``."""
    return np.conj(w) @ BETA


def sigma_dot(k):
    return np.einsum("i,ijk->jk", np.asarray(k, dtype=complex), PAULI)


def _check_spinor(s):
    s = np.asarray(s, dtype=complex)
    if s.shape != (2,):
        raise InvalidArgument(f"expected a 2-spinor, got shape {s.shape}")
    return s


def bispinor_u(k, s):
    """Positive-energy bispinor ``u^s_k``."""
    k = _as_momentum(k)
    s = _check_spinor(s)
    e = relativistic_energy(k)
    norm = math.sqrt((e + 1.0) / (2.0 * e))
    return norm * np.concatenate([s, sigma_dot(k) @ s / (e + 1.0)])


def bispinor_v(k, s):
    """Negative-energy bispinor ``v^s_k``.

    The plane-wave expansion pairs ``d_n`` with ``v_{-k_n}``; callers pass
    the already negated momentum.
    """
    k = _as_momentum(k)
    s = _check_spinor(s)
    e = relativistic_energy(k)
    norm = math.sqrt((e + 1.0) / (2.0 * e))
    return norm * np.concatenate([sigma_dot(k) @ s / (e + 1.0), s])


def branch_spinor(k, branch, s):
    """``u_k`` for the positive branch, ``v_{-k}`` for the negative one."""
    if branch == PLUS:
        return bispinor_u(k, s)
    if branch == MINUS:
        return bispinor_v(-np.asarray(k, dtype=float), s)
    raise InvalidArgument(f"branch must be +1 or -1, got {branch!r}")


def spinor_frame(k):
    """4x4 matrix whose columns are u_k^up, u_k^down, v_{-k}^up, v_{-k}^down.

    Column order matches the per-order layout ``[c_up, c_down, d_up, d_down]``
    used by the evolution code.
    """
    k = _as_momentum(k)
    return np.column_stack(
        [
            bispinor_u(k, SPIN_UP),
            bispinor_u(k, SPIN_DOWN),
            bispinor_v(-k, SPIN_UP),
            bispinor_v(-k, SPIN_DOWN),
        ]
    )


def coupling_L(k, k_prime, branch, branch_prime, s, s_prime, mu):
    """Coupling term ``w^dagger gamma^0 gamma^mu w'``.

    ``w`` is ``u^s_k`` (branch +1) or ``v^s_{-k}`` (branch -1), likewise for
    the primed spinor.
    """
    if mu not in (0, 1, 2, 3):
        raise InvalidArgument(f"Lorentz index must be 0..3, got {mu!r}")
    w = branch_spinor(k, branch, s)
    w_prime = branch_spinor(k_prime, branch_prime, s_prime)
    return complex(np.conj(w) @ GAMMA0_GAMMA[mu] @ w_prime)


def coupling_blocks(k, k_prime):
    """All coupling terms between two ladder orders at once.

    Returns an array of shape (4, 4, 4) indexed ``[mu, row, col]`` with rows
    and columns in :func:`spinor_frame` order.
    """
    w = spinor_frame(k)
    w_prime = spinor_frame(k_prime)
    return np.einsum("ai,mab,bj->mij", np.conj(w), GAMMA0_GAMMA, w_prime)


def tilted_spin_basis():
    """The 45-degree tilted spin pair ``(s_se, s_nw)``."""
    s_se = np.array([math.cos(11 * math.pi / 8), math.sin(11 * math.pi / 8)], dtype=complex)
    s_nw = np.array([math.cos(15 * math.pi / 8), math.sin(15 * math.pi / 8)], dtype=complex)
    return s_se, s_nw


def tilted_spin_basis_algebraic():
    """Same pair written with surds instead of angles."""
    s_se = np.array([1 - SQRT2, -1], dtype=complex) / math.sqrt(2 * (2 - SQRT2))
    s_nw = np.array([1 + SQRT2, -1], dtype=complex) / math.sqrt(2 * (2 + SQRT2))
    return s_se, s_nw


def spin_filter_matrix():
    """Rank-one spin filter ``M_s``; maps ``s_se`` onto ``s_nw`` and kills ``s_nw``."""
    return np.array([[-1, -1 - SQRT2], [-1 + SQRT2, 1]], dtype=complex) / math.sqrt(8)


def pauli_decompose(m):
    """Coefficients ``(c0, cx, cy, cz)`` with ``m = c0 + c.sigma``."""
    m = np.asarray(m, dtype=complex)
    return np.array([np.trace(m) / 2] + [np.trace(s @ m) / 2 for s in PAULI])


def pauli_compose(coeffs):
    c0, cx, cy, cz = coeffs
    return c0 * IDENTITY2 + cx * SIGMA_X + cy * SIGMA_Y + cz * SIGMA_Z


def braket(bra, m, ket):
    """``<bra| m |ket>`` for 2-spinors."""
    return complex(np.conj(bra) @ m @ ket)
