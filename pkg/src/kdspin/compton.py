"""Single-photon Compton amplitudes from time-ordered perturbation theory.

The four time orderings (absorb then emit, emit then absorb, each with a
positive-energy or a pair intermediate state) are evaluated separately and
compared with the covariant Compton tensor they sum to.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import dirac
from .errors import InvalidArgument, SingularKinematics

ON_SHELL_TOLERANCE = 1e-9
SINGULAR_DENOMINATOR = 1e-12

X_HAT = np.array([1.0, 0.0, 0.0])


def linear_polarization(axis):
    """Contravariant four-vector for a photon linearly polarized along x, y or z."""
    idx = {"x": 1, "y": 2, "z": 3}.get(axis)
    if idx is None:
        raise InvalidArgument(f"axis must be x, y or z, got {axis!r}")
    eps = np.zeros(4, dtype=complex)
    eps[idx] = 1.0
    return eps


def helicity_polarization(helicity, direction):
    """Circular polarization of a photon moving along ``+x`` or ``-x``.

    ``helicity`` is ``"L"`` or ``"R"``, ``direction`` is ``+1`` or ``-1``.
    Along ``+x`` left-handed is ``y - i z``; along ``-x`` it is ``y + i z``.
    """
    if helicity not in ("L", "R"):
        raise InvalidArgument(f"helicity must be 'L' or 'R', got {helicity!r}")
    if direction not in (1, -1):
        raise InvalidArgument("direction must be +1 or -1")
    sign = -1 if (helicity == "L") == (direction == 1) else 1
    return np.array([0, 0, 1, sign * 1j], dtype=complex) / math.sqrt(2.0)


def _four(k3):
    """Light-like four-vector of a photon with 3-momentum ``k3``."""
    return np.concatenate([[np.linalg.norm(k3)], k3])


def _light_cone_gap(p3, n):
    """``E_p - p . n`` for a unit vector ``n``, free of cancellation."""
    c = p3 @ n
    if c <= 0:
        return dirac.relativistic_energy(p3) - c
    perp = np.cross(p3, n)
    return (1.0 + perp @ perp) / (dirac.relativistic_energy(p3) + c)


def _photon_dot(p3, k3):
    """Minkowski product of an on-shell electron and a photon momentum."""
    k = np.linalg.norm(k3)
    if k == 0:
        return 0.0
    return k * _light_cone_gap(p3, k3 / k)


@dataclass(frozen=True)
class ComptonKinematics:
    """Electron ``p_i`` absorbs photon ``(k, eps_in)`` and emits ``(k_out, eps_out)``.

    All momenta in units of m; polarizations are contravariant four-vectors.
    """

    p_i: np.ndarray
    k: np.ndarray
    k_out: np.ndarray
    eps_in: np.ndarray
    eps_out: np.ndarray
    p_f: np.ndarray = field(init=False, repr=False)
    energy_residual: float = field(init=False)

    def __post_init__(self):
        for name in ("p_i", "k", "k_out"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise InvalidArgument(f"{name} must be a finite 3-vector")
            object.__setattr__(self, name, v)
        for name in ("eps_in", "eps_out"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if v.shape != (4,):
                raise InvalidArgument(f"{name} must be a four-vector")
            object.__setattr__(self, name, v)
        p_f = self.p_i + self.k - self.k_out
        object.__setattr__(self, "p_f", p_f)
        residual = abs(dirac.relativistic_energy(self.p_i) + np.linalg.norm(self.k)
                       - dirac.relativistic_energy(p_f) - np.linalg.norm(self.k_out))
        object.__setattr__(self, "energy_residual", float(residual))

    @property
    def on_shell(self):
        return self.energy_residual < ON_SHELL_TOLERANCE

    def with_polarizations(self, eps_in=None, eps_out=None):
        return ComptonKinematics(self.p_i, self.k, self.k_out,
                                 self.eps_in if eps_in is None else eps_in,
                                 self.eps_out if eps_out is None else eps_out)


def standing_wave_kinematics(k_l, p_z, eps_in=None, eps_out=None):
    """Photon absorbed from the +x beam, emitted into the -x direction."""
    p_i = np.array([-k_l, 0.0, p_z])
    return ComptonKinematics(
        p_i, k_l * X_HAT, -k_l * X_HAT,
        linear_polarization("z") if eps_in is None else eps_in,
        helicity_polarization("L", -1) if eps_out is None else eps_out,
    )


def _ofpt_denominators(kin):
    e_i = dirac.relativistic_energy(kin.p_i)
    k = np.linalg.norm(kin.k)
    kp = np.linalg.norm(kin.k_out)
    e_abs = dirac.relativistic_energy(kin.p_i + kin.k)
    e_emit = dirac.relativistic_energy(kin.p_i - kin.k_out)
    # the two positive-energy denominators rewritten via p.k to avoid cancellation
    d_a = 2 * _photon_dot(kin.p_i, kin.k) / (e_i + k + e_abs)
    if e_i > kp:
        d_b = -2 * _photon_dot(kin.p_i, kin.k_out) / (e_i - kp + e_emit)
    else:
        d_b = e_i - e_emit - kp
    dens = (d_a, d_b, e_i + e_emit - kp, e_i + e_abs + k)
    for label, d in zip("abcd", dens):
        if abs(d) < SINGULAR_DENOMINATOR:
            raise SingularKinematics(f"time-ordered denominator {label} vanishes ({d:.3e})")
    return tuple(1.0 / d for d in dens)


def ofpt_terms(kin, s, s_prime):
    """The four time-ordered contributions ``(T_a, T_b, T_c, T_d)``.

    ``s`` is the initial and ``s_prime`` the final 2-spinor.
    """
    fa, fb, fc, fd = _ofpt_denominators(kin)
    u_i = dirac.bispinor_u(kin.p_i, s)
    ubar_f = dirac.dirac_bar(dirac.bispinor_u(kin.p_f, s_prime))
    e_in = dirac.slash(kin.eps_in)
    e_out = dirac.slash(np.conj(kin.eps_out))
    p_abs = kin.p_i + kin.k
    p_emit = kin.p_i - kin.k_out

    def chain(first, second, mid):
        # sum over intermediate spins of (ubar_f second w)(wbar first u_i)
        return sum((ubar_f @ second @ w) * (dirac.dirac_bar(w) @ first @ u_i) for w in mid)

    u_abs = [dirac.bispinor_u(p_abs, c) for c in (dirac.SPIN_UP, dirac.SPIN_DOWN)]
    u_emit = [dirac.bispinor_u(p_emit, c) for c in (dirac.SPIN_UP, dirac.SPIN_DOWN)]
    v_emit = [dirac.bispinor_v(-p_emit, c) for c in (dirac.SPIN_UP, dirac.SPIN_DOWN)]
    v_abs = [dirac.bispinor_v(-p_abs, c) for c in (dirac.SPIN_UP, dirac.SPIN_DOWN)]
    return (
        complex(fa * chain(e_in, e_out, u_abs)),
        complex(fb * chain(e_out, e_in, u_emit)),
        complex(fc * chain(e_out, e_in, v_emit)),
        complex(fd * chain(e_in, e_out, v_abs)),
    )


def compton_pieces(p_i4, k4, kp4, eps_in, eps_out_conj, dots=None):
    """Absorb-first and emit-first 4x4 operators; the amplitude uses ``absorb - emit``.

    Works on arbitrary four-vectors, so crossed (negative-energy) photon
    momenta can be inserted. ``dots`` optionally supplies precomputed
    ``(p_i.k, p_i.k')``.
    """
    if dots is None:
        dots = (dirac.minkowski_dot(p_i4, k4), dirac.minkowski_dot(p_i4, kp4))
    one = np.eye(4)
    e_in = dirac.slash(eps_in)
    e_out = dirac.slash(eps_out_conj)
    absorb = e_out @ (dirac.slash(p_i4 + k4) + one) @ e_in / (2 * dots[0])
    emit = e_in @ (dirac.slash(p_i4 - kp4) + one) @ e_out / (2 * dots[1])
    return absorb, emit


def compton_tensor(kin, s, s_prime):
    """Covariant tree-level Compton amplitude between the same spinors."""
    if not kin.on_shell:
        raise InvalidArgument(
            f"kinematics off shell (energy residual {kin.energy_residual:.2e})"
        )
    p_i4 = np.concatenate([[dirac.relativistic_energy(kin.p_i)], kin.p_i])
    k4 = _four(kin.k)
    kp4 = _four(kin.k_out)
    dot_k = _photon_dot(kin.p_i, kin.k)
    dot_kp = _photon_dot(kin.p_i, kin.k_out)
    if abs(dot_k) < SINGULAR_DENOMINATOR or abs(dot_kp) < SINGULAR_DENOMINATOR:
        raise SingularKinematics("p_i . k vanishes")
    absorb, emit = compton_pieces(p_i4, k4, kp4, kin.eps_in, np.conj(kin.eps_out),
                                  dots=(dot_k, dot_kp))
    u_i = dirac.bispinor_u(kin.p_i, s)
    ubar_f = dirac.dirac_bar(dirac.bispinor_u(kin.p_f, s_prime))
    return complex(ubar_f @ (absorb - emit) @ u_i)


def gauge_residual(kin, s, s_prime, lam=1.0):
    """Change of the summed amplitude under ``eps_out -> eps_out + lam k_out``.

    Returned relative to the unshifted amplitude magnitude (absolute if that is zero).
    """
    base = sum(ofpt_terms(kin, s, s_prime))
    shifted_eps = kin.eps_out + lam * _four(kin.k_out)
    shifted = sum(ofpt_terms(kin.with_polarizations(eps_out=shifted_eps), s, s_prime))
    scale = abs(base) if abs(base) > 0 else 1.0
    return abs(shifted - base) / scale


@dataclass(frozen=True)
class ChannelRow:
    initial: str
    final: str
    helicity: str
    amplitude: complex
    weight: float


def channel_amplitudes(k_l, p_z):
    """Final spin / outgoing-helicity table for a z-polarized incoming photon.

    Weights are normalized per initial spin over the four final channels.
    """
    s_se, s_nw = dirac.tilted_spin_basis()
    spins = {"se": s_se, "nw": s_nw}
    rows = []
    for name_i, s_i in spins.items():
        amps = {}
        for name_f, s_f in spins.items():
            for hel in ("L", "R"):
                kin = standing_wave_kinematics(k_l, p_z, eps_out=helicity_polarization(hel, -1))
                amps[(name_f, hel)] = compton_tensor(kin, s_i, s_f)
        total = sum(abs(a) ** 2 for a in amps.values())
        for (name_f, hel), a in amps.items():
            rows.append(ChannelRow(name_i, name_f, hel, a, abs(a) ** 2 / total))
    return rows


def random_on_shell(rng, p_scale=1.0, k_scale=0.5):
    """Random on-shell kinematics with random complex polarizations."""
    z = np.concatenate([rng.normal(size=9), rng.normal(size=12)])
    return _kinematics_from_normals(z, p_scale, k_scale)


def _outgoing_energy(p_i, k, direction):
    """Photon energy along ``direction`` that conserves energy and momentum."""
    kk = np.linalg.norm(k)
    one_minus_cos = 0.5 * np.sum((k / kk - direction) ** 2) if kk > 0 else 1.0
    return _photon_dot(p_i, k) / (_light_cone_gap(p_i, direction) + kk * one_minus_cos)


def _kinematics_from_normals(z, p_scale, k_scale):
    p_i = p_scale * z[0:3]
    k = k_scale * z[3:6]
    direction = z[6:9] / np.linalg.norm(z[6:9])
    w = _outgoing_energy(p_i, k, direction)
    eps_in = np.concatenate([[0.0], z[9:12] + 1j * z[12:15]])
    eps_out = np.concatenate([[0.0], z[15:18] + 1j * z[18:21]])
    return ComptonKinematics(p_i, k, w * direction, eps_in, eps_out)


def quasi_random_on_shell(n, p_scale=1.0, k_scale=0.5):
    """``n`` deterministic on-shell kinematics from an unscrambled Halton sequence."""
    from scipy.stats import norm, qmc

    if n < 1:
        raise InvalidArgument("n must be positive")
    pts = qmc.Halton(d=21, scramble=False).random(n + 1)[1:]
    return [_kinematics_from_normals(norm.ppf(u), p_scale, k_scale) for u in pts]


def identity_residuals(kinematics, s, s_prime):
    """Relative ``|sum T - compton_tensor|`` for each kinematics."""
    out = []
    for kin in kinematics:
        total = sum(ofpt_terms(kin, s, s_prime))
        ref = compton_tensor(kin, s, s_prime)
        out.append(abs(total - ref) / max(abs(ref), 1e-300))
    return np.array(out)
