import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from kdspin import analysis, dirac, evolution, field
from kdspin.errors import InvalidArgument, PoorFit, PreconditionError

S_SE, S_NW = dirac.tilted_spin_basis()
SPINS = {"se": S_SE, "nw": S_NW}
OMEGA = analysis.REFERENCE_RABI_FREQUENCY


def _direct(U, bra, ket):
    return np.conj(SPINS[bra]) @ U @ SPINS[ket]


def test_project_identity():
    one = np.eye(2)
    assert analysis.project_tilted(one, "se", "se") == pytest.approx(1.0, abs=1e-12)
    assert analysis.project_tilted(one, "nw", "nw") == pytest.approx(1.0, abs=1e-12)
    assert abs(analysis.project_tilted(one, "nw", "se")) < 1e-12
    assert abs(analysis.project_tilted(one, "se", "nw")) < 1e-12


def test_project_spin_filter_matrix():
    m_s = dirac.spin_filter_matrix()
    assert analysis.project_tilted(m_s, "nw", "se") == pytest.approx(1.0, abs=1e-12)
    assert abs(analysis.project_tilted(m_s, "se", "se")) < 1e-12


def test_project_matches_direct_on_random_matrices(rng):
    for _ in range(1000):
        U = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        for bra in ("se", "nw"):
            for ket in ("se", "nw"):
                assert abs(analysis.project_tilted(U, bra, ket) - _direct(U, bra, ket)) < 1e-12


def test_project_matches_oracle_basis(rng):
    se, nw = oracles.tilted()
    U = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert analysis.project_tilted(U, "nw", "se") == pytest.approx(np.conj(nw) @ U @ se, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=8, max_size=8))
def test_project_property(vals):
    U = np.array(vals[:4]).reshape(2, 2) + 1j * np.array(vals[4:]).reshape(2, 2)
    scale = max(1.0, np.abs(U).max())
    for bra in ("se", "nw"):
        for ket in ("se", "nw"):
            assert abs(analysis.project_tilted(U, bra, ket) - _direct(U, bra, ket)) < 1e-12 * scale


def test_project_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        analysis.project_tilted(np.eye(2), "up", "se")
    with pytest.raises(InvalidArgument):
        analysis.project_tilted(np.eye(3), "se", "se")
    with pytest.raises(InvalidArgument):
        analysis.tilted_spinor("ne")


def test_fit_recovers_reference_frequency():
    t = np.linspace(0, 3 * math.pi / OMEGA, 800)
    fit = analysis.fit_rabi(t, np.sin(OMEGA * t / 2) ** 2)
    assert abs(fit.omega - OMEGA) < 1e-10
    assert fit.omega == pytest.approx(OMEGA, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.residual < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1e-8, max_value=1e-2), st.floats(min_value=1.05, max_value=8.0),
       st.floats(min_value=0.0, max_value=1.0))
def test_fit_recovers_random_frequency(omega, half_periods, phase):
    t = np.linspace(0, half_periods * math.pi / omega, 400)
    fit = analysis.fit_rabi(t, np.sin(0.5 * (omega * t - phase)) ** 2)
    assert fit.omega == pytest.approx(omega, rel=1e-7)
    assert 0 <= fit.r_squared <= 1 and fit.omega > 0


def test_fit_with_offset_start():
    t = np.linspace(2e6, 2e6 + 2 * math.pi / OMEGA, 500)
    fit = analysis.fit_rabi(t, np.sin(OMEGA * t / 2) ** 2)
    assert fit.omega == pytest.approx(OMEGA, rel=1e-9)
    np.testing.assert_allclose(fit.model(t), np.sin(OMEGA * t / 2) ** 2, atol=1e-8)


def test_fit_constant_series_is_poor():
    t = np.linspace(0, 1e7, 200)
    with pytest.raises(PoorFit) as info:
        analysis.fit_rabi(t, np.zeros_like(t))
    assert info.value.r_squared == 0.0


def test_fit_preconditions():
    t = np.linspace(0, 3 * math.pi / OMEGA, 49)
    with pytest.raises(PreconditionError):
        analysis.fit_rabi(t, np.sin(OMEGA * t / 2) ** 2)
    short = np.linspace(0, 0.4 * math.pi / OMEGA, 200)
    with pytest.raises(PreconditionError):
        analysis.fit_rabi(short, np.sin(OMEGA * short / 2) ** 2)
    fit = analysis.fit_rabi(short, np.sin(OMEGA * short / 2) ** 2, require_half_period=False)
    assert fit.omega == pytest.approx(OMEGA, rel=1e-6)
    with pytest.raises(InvalidArgument):
        analysis.fit_rabi(t, t[:-1])


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.9, max_value=1.0), st.floats(min_value=1.5, max_value=6.0))
def test_fit_scaling_degrades_r_squared_not_frequency(scale, half_periods):
    t = np.linspace(0, half_periods * math.pi / OMEGA, 600)
    p = np.sin(OMEGA * t / 2) ** 2
    ref = analysis.fit_rabi(t, p)
    fit = analysis.fit_rabi(t, scale * p)
    assert fit.r_squared <= ref.r_squared + 1e-12
    # relative frequency shift stays within twice the RMS misfit the scaling causes
    assert abs(fit.omega / OMEGA - 1) <= 2 * fit.residual + 1e-12


@pytest.fixture(scope="module")
def short_runs(tuned_ladder):
    # ramps only, no plateau, one sample per cycle
    cfg = field.reference_laser(total_cycles=10.0)
    return {spin: evolution.propagate(
        evolution.basis_state(tuned_ladder, 0, dirac.PLUS, analysis.tilted_spinor(spin)),
        cfg, tuned_ladder) for spin in ("se", "nw")}


def test_channel_report_at_start(short_runs):
    for spin, res in short_runs.items():
        rep = analysis.channel_report(res, spin)
        assert rep.initial[0] == pytest.approx(1.0, abs=1e-14)
        assert rep.diffracted[0] == pytest.approx(0.0, abs=1e-14)
        assert rep.norm_residual[0] == 0.0
        for key, v in rep.deviations.items():
            assert v[0] == pytest.approx(0.0, abs=1e-14), key
        assert rep.pair_sum_residual[0] < 1e-14
        assert set(rep.max_deviation) == set(rep.deviations)
    with pytest.raises(InvalidArgument):
        analysis.channel_report(res, "up")


def test_csv_schema(tmp_path, short_runs):
    res = short_runs["se"]
    path = tmp_path / "series.csv"
    analysis.write_csv(path, analysis.channel_report(res))
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t_cycles", "t_fs", "P_2_nw", "P_0_se", "norm_residual"]
    assert len(rows) == len(res.times) + 1 == 12
    assert float(rows[-1][0]) == pytest.approx(10.0)
    # one laser cycle at k_l = 0.0254 lasts 2 pi / k_l electron time units of 1.28809e-6 fs
    assert float(rows[-1][1]) == pytest.approx(10 * 2 * math.pi / 0.0254 * 1.28809e-6, rel=1e-5)


def test_purity_at_first_maximum(short_runs):
    res = short_runs["se"]
    purity = analysis.purity_at_first_maximum(res, res.times[-1])
    assert 0.0 <= purity <= 1.0 + 1e-12
    assert 0.0 <= analysis.spin_purity(res) <= 1.0 + 1e-12
    with pytest.raises(PreconditionError):
        analysis.purity_at_first_maximum(res, 0.0)
