"""Time evolution of the momentum-space Dirac system.

State layout: a complex array of shape ``(2N + 1, 4)``; row ``n + N`` holds
``[c_up, c_down, d_up, d_down]`` of ladder order ``n``. ``c`` multiplies
``u_{k_n}`` and ``d`` multiplies ``v_{-k_n}``.

Integration scheme
------------------
Where the envelope varies (ramps, partial cycles) the coupled system is
advanced with classical fixed-step RK4 in the interaction picture: the free
phases ``exp(-+ i E_n t)`` are applied exactly and only the laser coupling is
integrated numerically.

On the plateau the Schroedinger-picture Hamiltonian is exactly periodic in
the optical period ``T``. The one-cycle propagator ``U(t_p + T, t_p)`` is
computed once with the same RK4 kernel (all basis columns at once), projected
onto the nearest unitary matrix and then applied cycle by cycle. This keeps
the long 10^4..10^5-cycle runs cheap and unitary to rounding.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import dirac
from .errors import InvalidArgument, NormDrift
from .field import coupling_coefficients, free_energies, interaction_matrix

log = logging.getLogger(__name__)

DEFAULT_STEPS_PER_CYCLE = 4096
MIN_STEPS_PER_CYCLE = 16
NORM_DRIFT_ABORT = 1e-6


def zero_state(ladder):
    return np.zeros((ladder.size, 4), dtype=complex)


def basis_state(ladder, n=0, branch=dirac.PLUS, spinor=dirac.SPIN_UP):
    """Single plane wave of order ``n`` with 2-spinor ``spinor`` on one branch."""
    psi = zero_state(ladder)
    offset = 0 if branch == dirac.PLUS else 2
    psi[ladder.index(n), offset:offset + 2] = spinor
    return psi


def _check_state(state, ladder):
    state = np.asarray(state, dtype=complex)
    if state.shape == (4 * ladder.size,):
        state = state.reshape(ladder.size, 4)
    if state.shape != (ladder.size, 4):
        raise InvalidArgument(
            f"state shape {state.shape} does not match ladder of {ladder.size} orders"
        )
    return state


def rhs(state, t, cfg, ladder):
    """Schroedinger-picture time derivative of the amplitudes."""
    state = _check_state(state, ladder)
    H = np.diag(free_energies(ladder)) + interaction_matrix(t, cfg, ladder)
    return (-1j * (H @ state.ravel())).reshape(state.shape)


# ---------------------------------------------------------------------------
# numba kernels; Y has shape (orders, 4, columns)


@njit(cache=True)
def _envelope_scalar(t, ramp, total):
    if t < 0.0 or t > total:
        return 0.0
    if ramp <= 0.0:
        return 1.0
    rise = math.sin(0.5 * math.pi * min(t, ramp) / ramp) ** 2
    fall = math.sin(0.5 * math.pi * min(total - t, ramp) / ramp) ** 2
    return min(rise, fall)


@njit(cache=True)
def _blocks_at(P, Q, f, eik, B):
    eikc = np.conj(eik)
    for j in range(P.shape[0]):
        for r in range(4):
            for c in range(4):
                B[j, r, c] = f * (P[j, r, c] * eik + Q[j, r, c] * eikc)


@njit(cache=True)
def _derivative(Y, phase_c, B, Z, out):
    """out = -i exp(i eps tau) V exp(-i eps tau) Y  (interaction picture)."""
    size, _, ncol = Y.shape
    for j in range(size):
        pc = np.conj(phase_c[j])
        pd = phase_c[j]
        for k in range(ncol):
            Z[j, 0, k] = pc * Y[j, 0, k]
            Z[j, 1, k] = pc * Y[j, 1, k]
            Z[j, 2, k] = pd * Y[j, 2, k]
            Z[j, 3, k] = pd * Y[j, 3, k]
            for r in range(4):
                out[j, r, k] = 0.0
    for j in range(size - 1):
        for r in range(4):
            for c in range(4):
                b = B[j, r, c]
                bc = np.conj(b)
                if b == 0:
                    continue
                for k in range(ncol):
                    out[j, r, k] += b * Z[j + 1, c, k]
                    out[j + 1, c, k] += bc * Z[j, r, k]
    for j in range(size):
        pc = -1j * phase_c[j]
        pd = -1j * np.conj(phase_c[j])
        for k in range(ncol):
            out[j, 0, k] *= pc
            out[j, 1, k] *= pc
            out[j, 2, k] *= pd
            out[j, 3, k] *= pd


@njit(cache=True)
def _rk4_segment(Y0, P, Q, energies, k_l, t0, h, nsteps, ramp, total, record_every,
                 sample_rows, resync):
    """Advance Schroedinger-picture columns ``Y0`` from ``t0`` by ``nsteps`` steps.

    Returns the final Schroedinger-picture state and, every ``record_every``
    steps, the interaction-picture amplitudes of ``sample_rows`` plus norms
    and antiparticle weights per column.
    """
    size, _, ncol = Y0.shape
    nrec = nsteps // record_every if record_every > 0 else 0
    amps = np.zeros((nrec, sample_rows.shape[0], 4, ncol), dtype=np.complex128)
    norms = np.zeros((nrec, ncol))
    anti = np.zeros((nrec, ncol))

    Y = Y0.copy()
    K1 = np.empty_like(Y)
    K2 = np.empty_like(Y)
    K3 = np.empty_like(Y)
    K4 = np.empty_like(Y)
    T = np.empty_like(Y)
    Z = np.empty_like(Y)
    B0 = np.empty((P.shape[0], 4, 4), dtype=np.complex128)
    Bh = np.empty_like(B0)
    B1 = np.empty_like(B0)
    ph0 = np.empty(size, dtype=np.complex128)
    phh = np.empty(size, dtype=np.complex128)
    ph1 = np.empty(size, dtype=np.complex128)
    half = np.empty(size, dtype=np.complex128)
    for j in range(size):
        half[j] = np.exp(0.5j * h * energies[j])

    irec = 0
    for step in range(nsteps):
        tau = step * h
        if step % resync == 0:
            for j in range(size):
                ph0[j] = np.exp(1j * energies[j] * tau)
        for j in range(size):
            phh[j] = ph0[j] * half[j]
            ph1[j] = phh[j] * half[j]
        t = t0 + tau
        _blocks_at(P, Q, _envelope_scalar(t, ramp, total), np.exp(1j * k_l * t), B0)
        _blocks_at(P, Q, _envelope_scalar(t + 0.5 * h, ramp, total),
                   np.exp(1j * k_l * (t + 0.5 * h)), Bh)
        _blocks_at(P, Q, _envelope_scalar(t + h, ramp, total), np.exp(1j * k_l * (t + h)), B1)

        _derivative(Y, ph0, B0, Z, K1)
        for j in range(size):
            for r in range(4):
                for k in range(ncol):
                    T[j, r, k] = Y[j, r, k] + 0.5 * h * K1[j, r, k]
        _derivative(T, phh, Bh, Z, K2)
        for j in range(size):
            for r in range(4):
                for k in range(ncol):
                    T[j, r, k] = Y[j, r, k] + 0.5 * h * K2[j, r, k]
        _derivative(T, phh, Bh, Z, K3)
        for j in range(size):
            for r in range(4):
                for k in range(ncol):
                    T[j, r, k] = Y[j, r, k] + h * K3[j, r, k]
        _derivative(T, ph1, B1, Z, K4)
        for j in range(size):
            for r in range(4):
                for k in range(ncol):
                    Y[j, r, k] += h / 6.0 * (K1[j, r, k] + 2.0 * K2[j, r, k]
                                             + 2.0 * K3[j, r, k] + K4[j, r, k])
            ph0[j] = ph1[j]

        if record_every > 0 and (step + 1) % record_every == 0:
            for k in range(ncol):
                nrm = 0.0
                a = 0.0
                for j in range(size):
                    for r in range(4):
                        w = abs(Y[j, r, k]) ** 2
                        nrm += w
                        if r >= 2:
                            a += w
                norms[irec, k] = nrm
                anti[irec, k] = a
            for i in range(sample_rows.shape[0]):
                for r in range(4):
                    for k in range(ncol):
                        amps[irec, i, r, k] = Y[sample_rows[i], r, k]
            irec += 1

    duration = nsteps * h
    for j in range(size):
        pc = np.exp(-1j * energies[j] * duration)
        pd = np.conj(pc)
        for k in range(ncol):
            Y[j, 0, k] *= pc
            Y[j, 1, k] *= pc
            Y[j, 2, k] *= pd
            Y[j, 3, k] *= pd
    return Y, amps, norms, anti


# ---------------------------------------------------------------------------


class _Integrator:
    """Shared setup for one (laser, ladder, resolution) combination."""

    def __init__(self, cfg, ladder, steps_per_cycle):
        if steps_per_cycle < MIN_STEPS_PER_CYCLE:
            raise InvalidArgument(f"steps_per_cycle must be >= {MIN_STEPS_PER_CYCLE}")
        if not math.isclose(cfg.k_l, ladder.k_l, rel_tol=1e-12):
            raise InvalidArgument("laser and ladder disagree on k_l")
        self.cfg = cfg
        self.ladder = ladder
        self.steps_per_cycle = int(steps_per_cycle)
        self.h = cfg.period / self.steps_per_cycle
        self.P, self.Q = coupling_coefficients(cfg, ladder)
        self.energies = np.ascontiguousarray(ladder.energies)
        self.ramp = cfg.ramp_cycles * cfg.period
        self._cycle_map = None

    def rk4(self, Y, t0, duration, record_every=0, sample_rows=None):
        """RK4 from ``t0`` over ``duration`` with one Richardson extrapolation.

        The segment is integrated with the nominal step and with half of it;
        ``(16 Y_fine - Y_coarse) / 15`` cancels the leading error term.
        Samples come from the fine pass, so ``record_every`` counts fine steps.
        """
        rows = np.zeros(0, dtype=np.int64) if sample_rows is None else sample_rows
        nsteps = int(round(duration / self.h))
        if nsteps == 0 or duration <= 0:
            ncol = Y.shape[2]
            return (Y.copy(), np.zeros((0, len(rows), 4, ncol), dtype=complex),
                    np.zeros((0, ncol)), np.zeros((0, ncol)))
        h = duration / nsteps
        Y = np.ascontiguousarray(Y)
        args = (self.P, self.Q, self.energies, self.cfg.k_l, t0)
        tail = (self.ramp, self.cfg.duration)
        coarse, *_ = _rk4_segment(Y, *args, h, nsteps, *tail, 0, rows, self.steps_per_cycle)
        fine, amps, norms, anti = _rk4_segment(Y, *args, 0.5 * h, 2 * nsteps, *tail,
                                               record_every, rows, 2 * self.steps_per_cycle)
        return (16.0 * fine - coarse) / 15.0, amps, norms, anti

    def cycle_map(self, t_start):
        """Unitary one-period propagator on the plateau, as a (4S, 4S) matrix."""
        if self._cycle_map is None or self._cycle_map[0] != t_start:
            dim = 4 * self.ladder.size
            eye = np.eye(dim, dtype=complex).reshape(self.ladder.size, 4, dim)
            Y, *_ = self.rk4(eye, t_start, self.cfg.period)
            U = Y.reshape(dim, dim)
            defect = np.abs(U.conj().T @ U - np.eye(dim)).max()
            # nearest unitary (polar factor)
            W, _, Vh = np.linalg.svd(U)
            self._cycle_map = (t_start, W @ Vh, float(defect))
        return self._cycle_map[1]

    @property
    def cycle_defect(self):
        return None if self._cycle_map is None else self._cycle_map[2]


def _unitary_power(U, n):
    """``U^n`` re-projected onto the unitary group."""
    W, _, Vh = np.linalg.svd(np.linalg.matrix_power(U, n))
    return W @ Vh


def _plateau_window(cfg):
    """(start, end) of the full-amplitude window, or None."""
    start = cfg.ramp_cycles * cfg.period
    end = cfg.duration - start
    return (start, end) if end - start >= cfg.period else None


@dataclass
class SimulationResult:
    """Sampled output of one propagation.

    ``amplitudes[i, j]`` holds ``[c_up, c_down, d_up, d_down]`` of order
    ``sample_orders[j]`` at ``times[i]``. Amplitudes carry an order-dependent
    phase convention, so only moduli and spin projections within one order
    are meaningful; ``final_state`` is in the Schroedinger picture.
    """

    times: np.ndarray
    sample_orders: tuple
    amplitudes: np.ndarray
    norms: np.ndarray
    antiparticle: np.ndarray
    final_state: np.ndarray
    max_norm_drift: float
    k_l: float
    steps_per_cycle: int
    meta: dict = field(default_factory=dict)

    def amplitude(self, n, branch=dirac.PLUS):
        j = self.sample_orders.index(n)
        offset = 0 if branch == dirac.PLUS else 2
        return self.amplitudes[:, j, offset:offset + 2]

    def projection(self, n, spinor, branch=dirac.PLUS):
        """``|<spinor| c_n(t)>|^2`` at every sample."""
        return np.abs(self.amplitude(n, branch) @ np.conj(spinor)) ** 2

    def occupation(self, n, branch=dirac.PLUS):
        return np.sum(np.abs(self.amplitude(n, branch)) ** 2, axis=1)

    @property
    def cycles(self):
        return self.times * self.k_l / (2 * math.pi)


def _run(Y0, integ, t_final, sample_rows, stride, max_drift):
    """Drive ramps with RK4 and the plateau with the cycle map.

    Records once per ``stride`` optical cycles. Returns final columns and
    stacked records.
    """
    cfg = integ.cfg
    T = cfg.period
    spc = integ.steps_per_cycle
    ncol = Y0.shape[2]
    dim = 4 * integ.ladder.size
    norm0 = np.sum(np.abs(Y0) ** 2, axis=(0, 1))

    times = [0.0]
    amps = [Y0[sample_rows][None]]
    norms = [norm0[None]]
    anti = [np.sum(np.abs(Y0[:, 2:]) ** 2, axis=(0, 1))[None]]

    def check(nrm, t_at):
        drift = np.abs(nrm - norm0).max() if len(nrm) else 0.0
        if drift > max_drift:
            raise NormDrift(
                f"norm drift {drift:.3e} exceeded {max_drift:.1e} by t = {t_at:.6g} / m; "
                "increase steps_per_cycle", drift=drift, time=t_at)

    def rk4_span(Y, t0, t1):
        every = 2 * spc * stride
        Y, a, n, d = integ.rk4(Y, t0, t1 - t0, record_every=every, sample_rows=sample_rows)
        nrec = len(n)
        if nrec:
            step = 0.5 * (t1 - t0) / round((t1 - t0) / integ.h)
            times.extend(t0 + step * every * (np.arange(nrec) + 1))
            amps.append(a)
            norms.append(n)
            anti.append(d)
            check(n, t1)
        return Y

    Y = Y0
    t = 0.0
    window = _plateau_window(cfg)
    if window is not None and t_final > window[0] + T:
        start, end = window
        Y = rk4_span(Y, 0.0, start)
        t = start
        ncycles = int(math.floor((min(t_final, end) - start) / T + 1e-9))
        U = integ.cycle_map(start)
        U_stride = _unitary_power(U, stride)
        flat = Y.reshape(dim, ncol)
        buf_a, buf_n, buf_d, buf_t = [], [], [], []
        for c in range(stride, ncycles + 1, stride):
            flat = U_stride @ flat
            cur = flat.reshape(integ.ladder.size, 4, ncol)
            buf_a.append(cur[sample_rows])
            w = np.abs(cur) ** 2
            buf_n.append(w.sum(axis=(0, 1)))
            buf_d.append(w[:, 2:].sum(axis=(0, 1)))
            buf_t.append(start + c * T)
        if ncycles % stride:
            flat = _unitary_power(U, ncycles % stride) @ flat
        if buf_t:
            times.extend(buf_t)
            amps.append(np.array(buf_a))
            norms.append(np.array(buf_n))
            anti.append(np.array(buf_d))
            check(norms[-1], buf_t[-1])
        Y = flat.reshape(integ.ladder.size, 4, ncol)
        t = start + ncycles * T
    if t_final - t > 1e-9 * T:
        Y = rk4_span(Y, t, t_final)

    norms = np.concatenate(norms)
    return (Y, np.asarray(times), np.concatenate(amps), norms, np.concatenate(anti),
            float(np.abs(norms - norm0).max()))


def propagate(initial, cfg, ladder, t_final=None, steps_per_cycle=DEFAULT_STEPS_PER_CYCLE,
              sample_stride=1, sample_orders=(0, 2), max_drift=NORM_DRIFT_ABORT):
    """Integrate from ``t = 0`` to ``t_final`` (default: end of the laser pulse).

    ``sample_stride`` is the number of optical cycles between samples.
    """
    y0 = _check_state(initial, ladder)
    t_final = cfg.duration if t_final is None else float(t_final)
    if t_final < 0:
        raise InvalidArgument("t_final must be non-negative")
    if sample_stride < 1:
        raise InvalidArgument("sample_stride must be >= 1")
    integ = _Integrator(cfg, ladder, steps_per_cycle)
    rows = np.array([ladder.index(n) for n in sample_orders], dtype=np.int64)
    Y, times, amps, norms, anti, drift = _run(
        y0[:, :, None], integ, t_final, rows, int(sample_stride), max_drift)
    log.debug("propagated to t=%.6g, norm drift %.3e", t_final, drift)
    meta = {"cycle_map_defect": integ.cycle_defect}
    return SimulationResult(
        times=times, sample_orders=tuple(sample_orders), amplitudes=amps[..., 0],
        norms=norms[:, 0], antiparticle=anti[:, 0], final_state=Y[..., 0],
        max_norm_drift=drift, k_l=cfg.k_l, steps_per_cycle=int(steps_per_cycle), meta=meta,
    )


@dataclass
class PropagatorBlock:
    """``U^{branch,s; branch',s'}_{n,n'}(t, 0)`` for the requested orders.

    ``blocks[(n, n_prime)]`` is a 4x4 matrix over ``[+up, +down, -up, -down]``.
    """

    t: float
    blocks: dict

    def spin_block(self, n, n_prime, branch=dirac.PLUS, branch_prime=dirac.PLUS):
        r = 0 if branch == dirac.PLUS else 2
        c = 0 if branch_prime == dirac.PLUS else 2
        return self.blocks[(n, n_prime)][r:r + 2, c:c + 2]


def extract_propagator(cfg, ladder, t, channels=((2, 0), (0, 0)),
                       steps_per_cycle=DEFAULT_STEPS_PER_CYCLE, max_drift=NORM_DRIFT_ABORT):
    """Propagator blocks from propagating every basis initial condition.

    All source columns of one order are advanced together. ``channels``
    lists ``(n, n_prime)`` pairs; blocks are in the Schroedinger picture.
    """
    integ = _Integrator(cfg, ladder, steps_per_cycle)
    blocks = {}
    for n_prime in sorted({src for _, src in channels}):
        Y0 = np.zeros((ladder.size, 4, 4), dtype=complex)
        Y0[ladder.index(n_prime)] = np.eye(4)
        Y, *_ = _run(Y0, integ, float(t), np.zeros(0, dtype=np.int64), 1, max_drift)
        for n, src in channels:
            if src == n_prime:
                blocks[(n, n_prime)] = Y[ladder.index(n)].copy()
    return PropagatorBlock(t=float(t), blocks=blocks)
