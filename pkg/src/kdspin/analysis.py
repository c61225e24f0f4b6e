"""Tilted-basis projections, Rabi fits and channel reports."""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import dirac
from .constants import natural_to_fs
from .errors import InvalidArgument, PoorFit, PreconditionError

SQRT2 = math.sqrt(2.0)
MIN_SAMPLES = 50
MIN_R_SQUARED = 0.9
# reference Rabi frequency of the 20 fs spin-flip run, units of m
REFERENCE_RABI_FREQUENCY = 2.02e-7

CSV_HEADER = ("t_cycles", "t_fs", "P_2_nw", "P_0_se", "norm_residual")

# rows: (bra, ket); coefficients of (U_uu, U_ud, U_du, U_dd) times 1/sqrt(8).
# The diagonal rows carry the sign that makes them equal to <bra|U|ket>.
_TILTED = {
    ("se", "se"): (-(1 - SQRT2), 1, 1, 1 + SQRT2),
    ("se", "nw"): (-1, -(1 - SQRT2), -(1 + SQRT2), 1),
    ("nw", "se"): (-1, -(1 + SQRT2), -(1 - SQRT2), 1),
    ("nw", "nw"): (1 + SQRT2, -1, -1, -(1 - SQRT2)),
}


def project_tilted(U, bra, ket):
    """``<bra|U|ket>`` for ``bra, ket`` in ``{"se", "nw"}`` from up/down entries."""
    key = (bra, ket)
    if key not in _TILTED:
        raise InvalidArgument(f"bra and ket must be 'se' or 'nw', got {key}")
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise InvalidArgument("expected a 2x2 spin block")
    c = _TILTED[key]
    return complex(c[0] * U[0, 0] + c[1] * U[0, 1] + c[2] * U[1, 0] + c[3] * U[1, 1]) / math.sqrt(8)


def tilted_spinor(name):
    s_se, s_nw = dirac.tilted_spin_basis()
    if name == "se":
        return s_se
    if name == "nw":
        return s_nw
    raise InvalidArgument(f"unknown tilted spin {name!r}")


@dataclass(frozen=True)
class RabiFit:
    """``P(t) = sin^2((omega t - phase) / 2)``."""

    omega: float
    phase: float
    residual: float
    r_squared: float

    def model(self, t):
        return np.sin(0.5 * (self.omega * np.asarray(t) - self.phase)) ** 2


def _fft_frequency(t, p):
    """Angular frequency of the strongest Fourier component of the detrended series."""
    grid = np.linspace(t[0], t[-1], len(t))
    y = np.interp(grid, t, p)
    y = y - np.polyval(np.polyfit(grid, y, 1), grid)
    n = 16 * len(y)
    spec = np.abs(np.fft.rfft(y * np.hanning(len(y)), n))
    freqs = np.fft.rfftfreq(n, grid[1] - grid[0])
    k = int(np.argmax(spec[1:])) + 1
    return 2 * math.pi * freqs[k]


def fit_rabi(t, p, min_r_squared=MIN_R_SQUARED, require_half_period=True):
    """Least-squares fit of a unit-amplitude Rabi oscillation ``sin^2(omega t / 2)``.

    The amplitude is fixed at one. The frequency is seeded from the FFT peak
    and, for short records, from a coarse scan, then refined together with
    a phase offset.
    """
    t = np.asarray(t, dtype=float)
    p = np.asarray(p, dtype=float)
    if t.shape != p.shape or t.ndim != 1:
        raise InvalidArgument("t and p must be 1-d arrays of equal length")
    if len(t) < MIN_SAMPLES:
        raise PreconditionError(f"need at least {MIN_SAMPLES} samples, got {len(t)}")
    span = t[-1] - t[0]
    if span <= 0:
        raise InvalidArgument("times must increase")
    scale = math.pi / span  # omega in units of one half period per record
    x = (t - t[0]) / span

    def residuals(params):
        w, phi = params
        return np.sin(0.5 * (w * math.pi * x - phi)) ** 2 - p

    seeds = [_fft_frequency(t, p) / scale]
    seeds += list(np.geomspace(0.25, 4.0, 17))
    best = None
    for w0 in seeds:
        for phi0 in (0.0, 0.5 * math.pi):
            sol = least_squares(residuals, [w0, phi0], method="lm", xtol=1e-15, ftol=1e-15)
            if best is None or sol.cost < best.cost:
                best = sol
    w, phi = best.x
    omega = abs(w) * scale
    phase = math.copysign(1.0, w) * phi
    # express the phase relative to t = 0 instead of the first sample
    phase = (phase + omega * t[0]) % (2 * math.pi)
    ss_res = float(np.sum(best.fun**2))
    ss_tot = float(np.sum((p - p.mean()) ** 2))
    r2 = max(0.0, 1.0 - ss_res / ss_tot) if ss_tot > 0 else 0.0
    fit = RabiFit(omega, phase, math.sqrt(ss_res / len(p)), r2)
    if r2 < min_r_squared:
        raise PoorFit(f"Rabi model does not describe the data (R^2 = {r2:.4f})", r_squared=r2)
    if require_half_period and omega * span < math.pi:
        raise PreconditionError(
            f"record spans {omega * span / math.pi:.2f} half Rabi periods; need at least one"
        )
    return fit


@dataclass
class ChannelReport:
    """Per-sample channel probabilities of one run.

    For an ``se`` start: ``diffracted`` is |<nw|c_2>|^2 and ``initial`` is
    |<se|c_0>|^2. For an ``nw`` start the four listed deviations track how far
    the state is from staying put.
    """

    initial_spin: str
    times: np.ndarray
    cycles: np.ndarray
    diffracted: np.ndarray
    initial: np.ndarray
    norm_residual: np.ndarray
    deviations: dict

    @property
    def pair_sum_residual(self):
        return np.abs(1.0 - self.diffracted - self.initial)

    @property
    def max_deviation(self):
        return {k: float(np.max(v)) for k, v in self.deviations.items()}

    def rows(self):
        fs = natural_to_fs(self.times)
        for i in range(len(self.times)):
            yield (self.cycles[i], fs[i], self.diffracted[i], self.initial[i],
                   self.norm_residual[i])


def channel_report(result, initial_spin="se"):
    s_se = tilted_spinor("se")
    s_nw = tilted_spinor("nw")
    norm_res = np.abs(result.norms - result.norms[0])
    if initial_spin == "se":
        diffracted = result.projection(2, s_nw)
        initial = result.projection(0, s_se)
        deviations = {
            "P_2_se": result.projection(2, s_se),
            "P_0_nw": result.projection(0, s_nw),
        }
    elif initial_spin == "nw":
        diffracted = result.projection(2, s_se)
        initial = result.projection(0, s_nw)
        deviations = {
            "1-P_0_nw": np.abs(1.0 - initial),
            "P_0_se": result.projection(0, s_se),
            "P_2_nw": result.projection(2, s_nw),
            "P_2_se": diffracted,
        }
    else:
        raise InvalidArgument(f"initial spin must be 'se' or 'nw', got {initial_spin!r}")
    return ChannelReport(initial_spin, result.times, result.cycles, diffracted, initial,
                         norm_res, deviations)


def spin_purity(result, n=2, spin="nw"):
    """``|<spin|c_n>|^2 / |c_n|^2`` at the sample where ``|<spin|c_n>|^2`` peaks."""
    proj = result.projection(n, tilted_spinor(spin))
    i = int(np.argmax(proj))
    occ = result.occupation(n)[i]
    return float(proj[i] / occ) if occ > 0 else 0.0


def write_csv(path, report):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for row in report.rows():
            w.writerow([f"{v:.10g}" for v in row])


def purity_at_first_maximum(result, half_period, n=2, spin="nw"):
    """Spin purity of order ``n`` where its occupation first peaks.

    The peak is searched up to 1.25 ``half_period`` (a time in 1/m, measured
    from the start of the run), which brackets the first maximum even when
    the dynamics beat.
    """
    occ = result.occupation(n)
    window = result.times <= 1.25 * half_period
    if not np.any(window[1:]):
        raise PreconditionError("no samples inside the first half Rabi period")
    i = int(np.argmax(np.where(window, occ, -1.0)))
    if occ[i] == 0:
        return 0.0
    return float(result.projection(n, tilted_spinor(spin))[i] / occ[i])
