"""Standing-wave laser field, momentum ladder and interaction matrix elements."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import dirac
from .constants import E_CHARGE
from .errors import InvalidArgument

REFERENCE_K_L = 2.54e-2
REFERENCE_XI = 4.74e-2
DEFAULT_TRUNCATION = 12
DEFAULT_RAMP_CYCLES = 5


def linear_z_polarization(xi):
    """Contravariant polarization ``(0, 0, 0, A)`` with ``e A = xi`` (units of m)."""
    return np.array([0, 0, 0, xi / E_CHARGE], dtype=complex)


def circular_yz_polarization(xi):
    """Contravariant polarization ``(0, 0, A', i A') / sqrt 2`` with ``e A' = xi``."""
    amp = xi / E_CHARGE
    return np.array([0, 0, amp, 1j * amp], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class LaserConfig:
    """Two counter-propagating beams along x forming a standing wave.

    ``a`` belongs to the beam moving along +x, ``a_prime`` to the one moving
    along -x. Both are contravariant and carry the vector-potential amplitude.
    """

    k_l: float
    a: np.ndarray
    a_prime: np.ndarray
    ramp_cycles: float = DEFAULT_RAMP_CYCLES
    plateau_cycles: float = 0.0

    def __post_init__(self):
        if not (self.k_l > 0 and math.isfinite(self.k_l)):
            raise InvalidArgument(f"k_l must be positive, got {self.k_l}")
        if self.ramp_cycles < 0 or self.plateau_cycles < 0:
            raise InvalidArgument("ramp and plateau lengths must be non-negative")
        object.__setattr__(self, "a", np.asarray(self.a, dtype=complex))
        object.__setattr__(self, "a_prime", np.asarray(self.a_prime, dtype=complex))
        for name in ("a", "a_prime"):
            if getattr(self, name).shape != (4,):
                raise InvalidArgument(f"{name} must be a four-vector")

    @property
    def period(self):
        return 2 * math.pi / self.k_l

    @property
    def total_cycles(self):
        return 2 * self.ramp_cycles + self.plateau_cycles

    @property
    def duration(self):
        return self.total_cycles * self.period

    @property
    def xi(self):
        """``(e|a|, e|a'|)`` in units of m."""
        return (
            E_CHARGE * float(np.linalg.norm(self.a)),
            E_CHARGE * float(np.linalg.norm(self.a_prime)),
        )

    def with_duration(self, total_cycles):
        plateau = total_cycles - 2 * self.ramp_cycles
        if plateau < 0:
            raise InvalidArgument(
                f"{total_cycles} cycles is shorter than the two ramps ({2 * self.ramp_cycles})"
            )
        return LaserConfig(self.k_l, self.a, self.a_prime, self.ramp_cycles, plateau)

    def scaled(self, factor):
        """Same geometry with both amplitudes multiplied by ``factor``."""
        return LaserConfig(
            self.k_l, self.a * factor, self.a_prime * factor, self.ramp_cycles, self.plateau_cycles
        )


def reference_laser(k_l=REFERENCE_K_L, xi=REFERENCE_XI, xi_prime=None, total_cycles=None,
                ramp_cycles=DEFAULT_RAMP_CYCLES):
    """Linear (z) beam along +x, circular (y,z) beam along -x."""
    xi_prime = xi if xi_prime is None else xi_prime
    cfg = LaserConfig(k_l, linear_z_polarization(xi), circular_yz_polarization(xi_prime),
                      ramp_cycles, 0.0)
    if total_cycles is not None:
        cfg = cfg.with_duration(total_cycles)
    return cfg


def zero_field(k_l=REFERENCE_K_L, total_cycles=10.0, ramp_cycles=DEFAULT_RAMP_CYCLES):
    return reference_laser(k_l, 0.0, 0.0, total_cycles=total_cycles, ramp_cycles=ramp_cycles)


@dataclass(frozen=True)
class MomentumLadder:
    """Electron momenta ``k_n = p_i + n k_l e_x`` for ``-N <= n <= N``."""

    p_i: np.ndarray
    k_l: float
    truncation: int = DEFAULT_TRUNCATION
    momenta: np.ndarray = field(init=False, repr=False)
    energies: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p_i = np.asarray(self.p_i, dtype=float)
        if p_i.shape != (3,) or not np.all(np.isfinite(p_i)):
            raise InvalidArgument(f"bad initial momentum {self.p_i!r}")
        if self.truncation < 1:
            raise InvalidArgument("truncation must be >= 1")
        object.__setattr__(self, "p_i", p_i)
        n = np.arange(-self.truncation, self.truncation + 1)
        momenta = p_i[None, :] + np.outer(n, [self.k_l, 0.0, 0.0])
        momenta[self.truncation] = p_i  # exact, no rounding from 0 * k_l
        object.__setattr__(self, "momenta", momenta)
        object.__setattr__(self, "energies", np.sqrt(1.0 + np.sum(momenta**2, axis=1)))

    @property
    def orders(self):
        return np.arange(-self.truncation, self.truncation + 1)

    @property
    def size(self):
        return 2 * self.truncation + 1

    def index(self, n):
        if abs(n) > self.truncation:
            raise InvalidArgument(f"order {n} outside ladder |n| <= {self.truncation}")
        return n + self.truncation

    def momentum(self, n):
        return self.momenta[self.index(n)]

    def energy(self, n):
        return float(self.energies[self.index(n)])

    def with_truncation(self, truncation):
        return MomentumLadder(self.p_i, self.k_l, truncation)


def standard_kinematics(k_l, pz_override=None, truncation=DEFAULT_TRUNCATION):
    """Ladder starting at ``p_i = (-k_l, 0, p_z)``; the n=2 order is its mirror image."""
    if not (k_l > 0):
        raise InvalidArgument(f"k_l must be positive, got {k_l}")
    p_z = 1.0 if pz_override is None else float(pz_override)
    return MomentumLadder(np.array([-k_l, 0.0, p_z]), k_l, truncation)


def envelope(t, cfg):
    """sin^2 ramp up, flat plateau, sin^2 ramp down; zero outside the run window."""
    t = np.asarray(t, dtype=float)
    ramp = cfg.ramp_cycles * cfg.period
    total = cfg.duration
    if ramp == 0:
        out = np.where((t >= 0) & (t <= total), 1.0, 0.0)
        return out if out.ndim else float(out)
    rise = np.sin(0.5 * np.pi * np.clip(t, 0, ramp) / ramp) ** 2
    fall = np.sin(0.5 * np.pi * np.clip(total - t, 0, ramp) / ramp) ** 2
    out = np.where((t < 0) | (t > total), 0.0, np.minimum(rise, fall))
    return out if out.ndim else float(out)


def coupling_coefficients(cfg, ladder):
    """Time-independent pieces of the nearest-neighbour couplings.

    With ``f(t)`` the envelope,

        V_{n,n+1}(t) = f(t) [P_n exp(+i k_l t) + Q_n exp(-i k_l t)]
        V_{n+1,n}(t) = V_{n,n+1}(t)^dagger

    ``P_n`` carries ``conj(a)`` (the reverse of absorbing from the +x beam)
    and ``Q_n`` carries ``a'`` (the reverse of emitting into the -x beam).
    Returned arrays have shape (2N, 4, 4), block index ``n + N``.
    """
    a_low = dirac.lower(cfg.a)
    ap_low = dirac.lower(cfg.a_prime)
    half_e = 0.5 * E_CHARGE
    size = ladder.size
    P = np.empty((size - 1, 4, 4), dtype=complex)
    Q = np.empty((size - 1, 4, 4), dtype=complex)
    for j in range(size - 1):
        L = dirac.coupling_blocks(ladder.momenta[j], ladder.momenta[j + 1])
        P[j] = -half_e * np.einsum("m,mij->ij", np.conj(a_low), L)
        Q[j] = -half_e * np.einsum("m,mij->ij", ap_low, L)
    return P, Q


def potential_V(n, n_prime, branch, branch_prime, s, s_prime, t, cfg, ladder):
    """Single interaction matrix element ``V^{branch,s; branch',s'}_{n,n'}(t)``.

    Spins are given as 2-spinors. The envelope is included.
    """
    ladder.index(n)
    ladder.index(n_prime)
    if abs(n - n_prime) != 1:
        return 0j
    a_low = dirac.lower(cfg.a)
    ap_low = dirac.lower(cfg.a_prime)
    phase = np.exp(1j * cfg.k_l * t)
    if n_prime == n + 1:
        pol = np.conj(a_low) * phase + ap_low / phase
    else:
        pol = a_low / phase + np.conj(ap_low) * phase
    k, kp = ladder.momentum(n), ladder.momentum(n_prime)
    total = sum(
        pol[mu] * dirac.coupling_L(k, kp, branch, branch_prime, s, s_prime, mu)
        for mu in range(4) if pol[mu] != 0
    )
    return complex(-0.5 * E_CHARGE * total * envelope(t, cfg))


def interaction_matrix(t, cfg, ladder, coefficients=None):
    """Dense interaction matrix over the composite index ``4 (n + N) + 2 (branch==-1) + s``."""
    P, Q = coupling_coefficients(cfg, ladder) if coefficients is None else coefficients
    f = envelope(t, cfg)
    phase = np.exp(1j * cfg.k_l * t)
    dim = 4 * ladder.size
    V = np.zeros((dim, dim), dtype=complex)
    for j in range(ladder.size - 1):
        block = f * (P[j] * phase + Q[j] / phase)
        V[4 * j:4 * j + 4, 4 * j + 4:4 * j + 8] = block
        V[4 * j + 4:4 * j + 8, 4 * j:4 * j + 4] = block.conj().T
    return V


def free_energies(ladder):
    """Diagonal ``(+E, +E, -E, -E)`` per order, flattened in composite order."""
    e = ladder.energies
    return np.stack([e, e, -e, -e], axis=1).ravel()
