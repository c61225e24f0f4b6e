"""Second-order (two-photon) amplitudes in closed form.

The resonant n=0 -> n=2 transition grows linearly in time at second order.
Its spin structure is the 2x2 matrix ``M^{mu nu}`` built from products of
coupling terms through the n=1 intermediate order, weighted by the four
energy denominators ``F_a .. F_d`` (two positive-branch and two pair
fluctuation paths).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import dirac
from .constants import E_CHARGE
from .errors import InvalidArgument, PreconditionError, SingularKinematics, UnsupportedComponent
from .field import circular_yz_polarization, linear_z_polarization

SINGULAR_DENOMINATOR = 1e-12
BRAGG_TOLERANCE = 1e-9
TUNING_BRACKET = (0.999, 1.002)

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ScaledKinematics:
    """Photon momentum ``q_l``, transverse momentum ``q_2`` and shifted ``q3_shift = k_3 - 1``.

    The three ladder momenta are ``(-q_l, q_2, k_3)``, ``(0, q_2, k_3)`` and
    ``(q_l, q_2, k_3)``.
    """

    q_l: float
    q_2: float = 0.0
    q3_shift: float = 0.0

    @classmethod
    def from_momentum(cls, k_l, k_2, k_3):
        return cls(float(k_l), float(k_2), float(k_3) - 1.0)

    @classmethod
    def from_ladder(cls, ladder):
        p = ladder.momentum(0)
        if not math.isclose(p[0], -ladder.k_l, rel_tol=1e-12):
            raise InvalidArgument("ladder does not start at p_x = -k_l")
        return cls.from_momentum(ladder.k_l, p[1], p[2])

    @property
    def k_3(self):
        return 1.0 + self.q3_shift

    def momenta(self):
        """``(k_0, k_1, k_2)`` as 3-vectors."""
        k0 = np.array([-self.q_l, self.q_2, self.k_3])
        k1 = np.array([0.0, self.q_2, self.k_3])
        k2 = np.array([self.q_l, self.q_2, self.k_3])
        return k0, k1, k2


def prefactors(k0, k1, k_l):
    """Energy denominators ``(F_a, F_b, F_c, F_d)`` of the four intermediate paths."""
    k0 = np.asarray(k0, dtype=float)
    k1 = np.asarray(k1, dtype=float)
    e0 = dirac.relativistic_energy(k0)
    e1 = dirac.relativistic_energy(k1)
    # E0 - E1 without cancelling two nearly equal square roots
    diff = float((k0 - k1) @ (k0 + k1)) / (e0 + e1)
    denominators = (diff + k_l, diff - k_l, e0 + e1 - k_l, e0 + e1 + k_l)
    for label, d in zip("abcd", denominators):
        if abs(d) < SINGULAR_DENOMINATOR:
            raise SingularKinematics(
                f"F_{label} denominator {d:.3e} vanishes: intermediate state is on shell"
            )
    return tuple(1.0 / d for d in denominators)


def _raw_tensor(k0, k1, k2, k_l):
    """``sum_s'' [F_a L L + ...]`` for every (mu, nu); shape (4, 4, 2, 2)."""
    fa, fb, fc, fd = prefactors(k0, k1, k_l)
    L21 = dirac.coupling_blocks(k2, k1)
    L10 = dirac.coupling_blocks(k1, k0)
    pp21, pm21 = L21[:, :2, :2], L21[:, :2, 2:]
    pp10, mp10 = L10[:, :2, :2], L10[:, 2:, :2]
    out = np.empty((4, 4, 2, 2), dtype=complex)
    for mu in range(4):
        for nu in range(4):
            out[mu, nu] = (
                fa * pp21[mu] @ pp10[nu]
                + fb * pp21[nu] @ pp10[mu]
                + fc * pm21[nu] @ mp10[mu]
                + fd * pm21[mu] @ mp10[nu]
            )
    return out


def _check_index(mu, allowed=range(4)):
    if mu not in allowed:
        raise InvalidArgument(f"Lorentz index must be in {list(allowed)}, got {mu!r}")


def spin_matrix_tensor(kin):
    """All sixteen ``M^{mu nu}`` at once, shape (4, 4, 2, 2), rows s', columns s."""
    k0, k1, k2 = kin.momenta()
    norm = math.sqrt(dirac.relativistic_energy(k2) * dirac.relativistic_energy(k0))
    return norm * _raw_tensor(k0, k1, k2, kin.q_l)


def spin_matrix_M(kin, mu, nu):
    """Exact spin matrix ``M^{mu nu}`` (no expansion), rows s', columns s."""
    _check_index(mu)
    _check_index(nu)
    return spin_matrix_tensor(kin)[mu, nu]


def taylor_M(kin, mu, nu):
    """Quadratic Taylor polynomial of ``M^{mu nu}`` for transverse indices 2, 3."""
    if mu not in (2, 3) or nu not in (2, 3):
        raise UnsupportedComponent(f"Taylor form exists only for mu, nu in (2, 3), got ({mu}, {nu})")
    ql, q2, q3 = kin.q_l, kin.q_2, kin.q3_shift
    c = (SQRT2 - 1) / 2
    d = (3 - 2 * SQRT2) / 2
    if (mu, nu) == (2, 2):
        coeffs = (1 + c * ql**2 - q2**2, 0.0, -1j / SQRT2 * ((SQRT2 - 1) + d * q3) * ql,
                  -1j / SQRT2 * ql * q2)
    elif (mu, nu) == (2, 3):
        coeffs = (-q2, (-0.5j + 0.5j * q3) * ql, 0.5j * q2 * ql, -0.5j * ql)
    elif (mu, nu) == (3, 2):
        coeffs = (-q2, (0.5j - 0.5j * q3) * ql, 0.5j * q2 * ql, -0.5j * ql)
    else:
        coeffs = (-q3 + 0.5 * q3**2 + c * ql**2 + 0.5 * q2**2, 0.0,
                  -1j / SQRT2 * (-1 + d * q3) * ql, 1j * (SQRT2 - 1) / SQRT2 * q2 * ql)
    return dirac.pauli_compose(coeffs)


def _contract(a, a_prime, tensor):
    """``a'*_mu a_nu T^{mu nu}`` with both polarizations lowered."""
    a_low = dirac.lower(np.asarray(a, dtype=complex))
    ap_low = dirac.lower(np.asarray(a_prime, dtype=complex))
    return np.einsum("m,n,mnij->ij", np.conj(ap_low), a_low, tensor)


def contracted_spin_propagation(cfg, kin):
    """Polarization-contracted spin matrix divided by the two amplitudes.

    At the tuned kinematics this is proportional to the spin filter matrix.
    """
    amp = np.linalg.norm(cfg.a) * np.linalg.norm(cfg.a_prime)
    if amp == 0:
        raise InvalidArgument("both beams need a nonzero amplitude")
    return _contract(cfg.a, cfg.a_prime, spin_matrix_tensor(kin)) / amp


def resonant_U20(t, t0, cfg, ladder):
    """Linearly growing second-order amplitude ``U_{2,0}^{+,s';+,s}(t, t0)``."""
    if ladder.truncation < 2:
        raise InvalidArgument("ladder must contain orders 0, 1 and 2")
    k0, k1, k2 = (ladder.momentum(n) for n in (0, 1, 2))
    e0, e2 = ladder.energy(0), ladder.energy(2)
    if abs(e2 - e0) > BRAGG_TOLERANCE:
        raise PreconditionError(f"Bragg condition violated: E_2 - E_0 = {e2 - e0:.3e}")
    dt = t - t0
    spin = _contract(cfg.a, cfg.a_prime, _raw_tensor(k0, k1, k2, ladder.k_l))
    return -1j * E_CHARGE**2 / 4 * dt * np.exp(-1j * e0 * dt) * spin


def perturbative_rabi_frequency(cfg, ladder, spin_resolved=True):
    """``Omega_R`` implied by the growth rate of ``<s_nw|U_20|s_se>``.

    With ``P = sin^2(Omega t / 2)`` the short-time amplitude is ``Omega t / 2``.
    With ``spin_resolved=False`` the rate of the whole n=2 spinor ``U_20 s_se``
    is used instead, which is what drives the total n=2 occupation.
    """
    s_se, s_nw = dirac.tilted_spin_basis()
    u = resonant_U20(1.0, 0.0, cfg, ladder)
    slope = abs(dirac.braket(s_nw, u, s_se)) if spin_resolved else np.linalg.norm(u @ s_se)
    return 2.0 * float(slope)


def unit_filter_polarizations():
    """Beam polarizations of the filter geometry with unit ``e A``."""
    return linear_z_polarization(1.0), circular_yz_polarization(1.0)


def _spin_preserving_weight(p_z, k_l, a, a_prime):
    kin = ScaledKinematics.from_momentum(k_l, 0.0, p_z)
    s_se, _ = dirac.tilted_spin_basis()
    m = _contract(a, a_prime, spin_matrix_tensor(kin))
    return abs(dirac.braket(s_se, m, s_se)) ** 2


def tune_longitudinal_momentum(k_l, bracket=TUNING_BRACKET, tol=1e-12):
    """``p_z`` that cancels the spin-preserving part of the two-photon amplitude."""
    if not (k_l > 0):
        raise InvalidArgument(f"k_l must be positive, got {k_l}")
    a, a_prime = unit_filter_polarizations()
    lo, hi = bracket
    res = minimize_scalar(_spin_preserving_weight, bounds=(lo, hi), method="bounded",
                          args=(k_l, a, a_prime), options={"xatol": tol})
    # bounded Brent stops ~sqrt(eps) short of a bound it is pushed against
    edge = 1e-4 * (hi - lo)
    if not res.success or res.x - lo < edge or hi - res.x < edge:
        raise PreconditionError(
            f"no interior minimum of the spin-preserving amplitude in [{lo}, {hi}] for k_l={k_l}"
        )
    return float(res.x)


def short_time_probability(e_a, e_a_prime, k_l, t):
    """Closed-form quadratic short-time probability with the factor-8 normalisation."""
    for name, v in (("e_a", e_a), ("e_a_prime", e_a_prime), ("k_l", k_l), ("t", t)):
        if v < 0:
            raise InvalidArgument(f"{name} must be non-negative")
    return (e_a * e_a_prime * k_l * t / (8 * SQRT2)) ** 2


def filter_deviation(m):
    """Best global factor ``lam`` with ``m ~ lam * M_s`` and the worst entrywise relative error."""
    m = np.asarray(m, dtype=complex)
    ms = dirac.spin_filter_matrix()
    lam = np.vdot(ms, m) / np.vdot(ms, ms)
    if lam == 0:
        raise InvalidArgument("matrix has no component along the filter matrix")
    return complex(lam), float(np.max(np.abs(m - lam * ms) / np.abs(lam * ms)))
