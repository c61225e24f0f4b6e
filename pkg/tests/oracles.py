"""Reference implementations that share no code with the package.

Gamma matrices come from Kronecker products and bispinors from projecting
rest-frame spinors, so agreement with the package is a real cross-check.
"""

import math

import numpy as np

ALPHA = 7.2973525693e-3
E = math.sqrt(ALPHA)

I2 = np.eye(2)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0 + 0j, -1.0])
G0 = np.kron(SZ, I2)
GI = [np.kron(1j * SY, s) for s in (SX, SY, SZ)]
GAMMAS = [G0] + GI
G = np.diag([1.0, -1.0, -1.0, -1.0])


def energy(k):
    return math.sqrt(1 + sum(x * x for x in k))


def pslash(k):
    e = energy(k)
    return e * G0 - sum(k[i] * GI[i] for i in range(3))


def u(k, s):
    rest = np.concatenate([s, [0, 0]]).astype(complex)
    e = energy(k)
    return (pslash(k) + np.eye(4)) @ rest / math.sqrt(2 * e * (e + 1))


def v(k, s):
    rest = np.concatenate([[0, 0], s]).astype(complex)
    e = energy(k)
    return (-pslash(k) + np.eye(4)) @ rest / math.sqrt(2 * e * (e + 1))


def w(k, branch, s):
    k = np.asarray(k, dtype=float)
    return u(k, s) if branch == +1 else v(-k, s)


def L(k, kp, b, bp, s, sp, mu):
    return np.conj(w(k, b, s)) @ G0 @ GAMMAS[mu] @ w(kp, bp, sp)


UP = np.array([1, 0], dtype=complex)
DOWN = np.array([0, 1], dtype=complex)
SPINS = (UP, DOWN)


def potential(n, n_prime, b, bp, s, sp, t, k_l, a, ap, p_i, env=1.0):
    """Interaction element for nearest neighbours, straight from the written formula."""
    if abs(n - n_prime) != 1:
        return 0j
    kn = np.asarray(p_i) + n * np.array([k_l, 0, 0])
    knp = np.asarray(p_i) + n_prime * np.array([k_l, 0, 0])
    al, apl = G @ a, G @ ap
    total = 0j
    for mu in range(4):
        if n_prime == n + 1:
            pol = np.conj(al[mu]) * np.exp(1j * k_l * t) + apl[mu] * np.exp(-1j * k_l * t)
        else:
            pol = al[mu] * np.exp(-1j * k_l * t) + np.conj(apl[mu]) * np.exp(1j * k_l * t)
        total += pol * L(kn, knp, b, bp, s, sp, mu)
    return -0.5 * E * total * env


def M_tensor(q_l, q_2, q3):
    """Spin matrix M^{mu nu}[s', s] coded directly from the defining sum."""
    k3 = 1 + q3
    k0 = np.array([-q_l, q_2, k3])
    k1 = np.array([0.0, q_2, k3])
    k2 = np.array([q_l, q_2, k3])
    e0, e1, e2 = energy(k0), energy(k1), energy(k2)
    # e0 - e1 = q_l^2 / (e0 + e1) exactly; avoids cancelling two square roots
    de = q_l**2 / (e0 + e1)
    fa = 1 / (de + q_l)
    fb = 1 / (de - q_l)
    fc = 1 / (e0 + e1 - q_l)
    fd = 1 / (e0 + e1 + q_l)
    out = np.zeros((4, 4, 2, 2), dtype=complex)
    for mu in range(4):
        for nu in range(4):
            for i, sp in enumerate(SPINS):
                for j, s in enumerate(SPINS):
                    acc = 0j
                    for smid in SPINS:
                        acc += fa * L(k2, k1, 1, 1, sp, smid, mu) * L(k1, k0, 1, 1, smid, s, nu)
                        acc += fb * L(k2, k1, 1, 1, sp, smid, nu) * L(k1, k0, 1, 1, smid, s, mu)
                        acc += fc * L(k2, k1, 1, -1, sp, smid, nu) * L(k1, k0, -1, 1, smid, s, mu)
                        acc += fd * L(k2, k1, 1, -1, sp, smid, mu) * L(k1, k0, -1, 1, smid, s, nu)
                    out[mu, nu, i, j] = math.sqrt(e2 * e0) * acc
    return out


def tilted():
    se = np.array([math.cos(11 * math.pi / 8), math.sin(11 * math.pi / 8)], dtype=complex)
    nw = np.array([math.cos(15 * math.pi / 8), math.sin(15 * math.pi / 8)], dtype=complex)
    return se, nw
