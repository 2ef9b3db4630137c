import math

import numpy as np
import pytest
from scipy import integrate

from gentqd import metrics as M
from gentqd.errors import BracketError, DivergenceError, StructuralError
from gentqd.protocols import LZParams, Protocol, ProtocolSpec, Schedule

from conftest import DELTA, THETA0

AD, SA, OP = Protocol.ADIABATIC, Protocol.TRADITIONAL_TQD, Protocol.OPTIMAL_TQD
TAUS = np.logspace(-2, 1, 20)


def spec(kind, tau=1.0, delta=DELTA, theta0=THETA0, schedule=None):
    p = LZParams(delta, theta0, tau)
    return ProtocolSpec(kind, p) if schedule is None else ProtocolSpec(kind, p, schedule)


def random_pairs(n=20, seed=11):
    rng = np.random.default_rng(seed)
    return list(zip(rng.uniform(1.0, 60.0, n), rng.uniform(0.05, 1.4, n), rng.uniform(0.01, 5.0, n)))


# --- intensity ---------------------------------------------------------------

def test_adiabatic_intensity_example():
    assert M.avg_intensity(spec(AD)) == pytest.approx(DELTA ** 2 * (math.sqrt(3) / THETA0 - 1), rel=1e-14)
    assert M.avg_intensity(spec(AD)) == pytest.approx(103.27, abs=5e-3)


def test_optimal_intensity_example():
    assert M.avg_intensity(spec(OP)) == pytest.approx(0.27416, abs=1e-5)


def test_traditional_intensity_is_sum():
    for tau in TAUS:
        assert M.avg_intensity(spec(SA, tau)) == pytest.approx(
            M.avg_intensity(spec(AD, tau)) + M.avg_intensity(spec(OP, tau)), rel=1e-14)


@pytest.mark.parametrize("delta, theta0, tau", random_pairs())
def test_closed_forms_match_quadrature(delta, theta0, tau):
    for kind in (AD, OP, SA):
        sp = spec(kind, tau, delta, theta0)
        assert M.avg_intensity_closed(sp) == pytest.approx(M.avg_intensity_quad(sp), rel=1e-9)
    for kind in (AD, OP):
        sp = spec(kind, tau, delta, theta0)
        closed = M.sigma_cost_closed(sp)
        assert M.sigma_cost(sp) == pytest.approx(closed, rel=1e-8)
        assert M.sigma_cost_quad(sp) == pytest.approx(closed, rel=1e-8)


def test_independent_sec_integral_oracle():
    # int_0^1 sec(theta0 s) ds by quadrature of the raw integrand
    raw, _ = integrate.quad(lambda s: 1.0 / math.cos(THETA0 * s), 0.0, 1.0, epsabs=0, epsrel=1e-13)
    assert M.sigma_cost(spec(AD)) == pytest.approx(math.sqrt(2) * DELTA * raw, rel=1e-12)
    assert M.sigma_cost(spec(AD)) == pytest.approx(22.35, abs=5e-3)


def test_intensities_vanish_without_drive():
    for kind in (AD, OP, SA):
        assert M.avg_intensity(spec(kind, theta0=0.0)) == 0.0
    assert M.avg_intensity(spec(AD, theta0=1e-6)) < 1e-9


def test_non_linear_schedule_uses_quadrature():
    sched = Schedule("quadratic", lambda s: s * s, lambda s: 2 * s)
    sp = spec(OP, 0.5, schedule=sched)
    # (theta0 * 2 s / (2 tau))^2 integrated over s
    assert M.avg_intensity(sp) == pytest.approx(THETA0 ** 2 / (3 * 0.25), rel=1e-10)
    with pytest.raises(StructuralError):
        M.avg_intensity_closed(sp)


def test_intensity_divergence_surfaces():
    with pytest.raises(DivergenceError):
        M.avg_intensity_quad(spec(AD, theta0=math.pi))


# --- relative intensities ------------------------------------------------------

def test_relative_intensity_example(params):
    i_ad, i_sa, i_op = M.relative_intensities(params, 0.1)
    assert i_ad == 1.0
    assert i_op == pytest.approx(0.2655, abs=5e-5)
    assert i_sa == pytest.approx(1.2655, abs=5e-5)


def test_additivity_exact(params):
    for tau in np.logspace(-3, 2, 200):
        _, i_sa, i_op = M.relative_intensities(params, tau)
        assert i_sa == 1.0 + i_op


def test_optimal_relative_intensity_strictly_decreasing(params):
    values = [M.relative_intensities(params, t)[2] for t in np.logspace(-3, 2, 300)]
    assert np.all(np.diff(values) < 0)


def test_cost_report_invariants(params):
    for tau in TAUS:
        r = M.cost_report(params, tau)
        assert r.i_ad == 1.0 and r.i_sa == 1.0 + r.i_opsa
        assert r.sigma_sa >= r.sigma_ad


# --- sigma cost ------------------------------------------------------------------

def test_sigma_optimal_constant(params):
    values = np.array([M.sigma_cost(spec(OP, t)) for t in TAUS])
    assert np.max(np.abs(values - THETA0 / math.sqrt(2))) < 1e-10
    assert values[0] == pytest.approx(0.74048, abs=5e-6)


def test_sigma_adiabatic_strictly_increasing():
    values = [M.sigma_cost(spec(AD, t)) for t in np.logspace(-3, 2, 100)]
    assert np.all(np.diff(values) > 0)


def test_sigma_traditional_dominates_adiabatic():
    for tau in TAUS:
        assert M.sigma_cost(spec(SA, tau)) >= M.sigma_cost(spec(AD, tau))


@pytest.mark.parametrize("kind", [AD, SA, OP])
@pytest.mark.parametrize("tau", [0.01, 0.1, 1.0, 10.0])
def test_sigma_node_doubling(kind, tau):
    sp = spec(kind, tau)
    assert M.sigma_cost(sp) == pytest.approx(M.sigma_cost(sp, nodes=2 * M.GL_NODES), rel=1e-8)


def test_sigma_matches_matrix_quadrature_for_traditional():
    for tau in (0.02, 0.3, 4.0):
        sp = spec(SA, tau)
        assert M.sigma_cost(sp) == pytest.approx(M.sigma_cost_quad(sp), rel=1e-10)


def test_sigma_closed_form_unavailable_for_traditional():
    with pytest.raises(StructuralError):
        M.sigma_cost_closed(spec(SA))


# --- adiabatic time scale ----------------------------------------------------------

def test_tau_adiabatic_example(params):
    assert M.tau_adiabatic(params) == pytest.approx(THETA0 / (4 * DELTA), rel=1e-12)
    assert M.tau_adiabatic(params) == pytest.approx(0.021, abs=1e-3)


def test_adiabaticity_integrand_reduction(params):
    for s in np.linspace(0, 1, 11):
        expected = THETA0 * math.cos(THETA0 * s) / (4 * DELTA)
        assert M.adiabaticity_integrand(params, s) == pytest.approx(expected, rel=1e-12)


def test_tau_adiabatic_scaling_and_limit(params):
    doubled = LZParams(2 * DELTA, THETA0, 1.0)
    assert M.tau_adiabatic(doubled) == pytest.approx(M.tau_adiabatic(params) / 2, rel=1e-12)
    assert M.tau_adiabatic(LZParams(DELTA, 1e-6, 1.0)) < 1e-7


def test_tau_adiabatic_interior_maximum_found():
    # a schedule whose speed peaks mid-sweep moves the maximum into the interior
    sched = Schedule("bump", lambda s: s - np.sin(2 * np.pi * s) / (2 * np.pi),
                     lambda s: 1 - np.cos(2 * np.pi * s))
    p = LZParams(DELTA, THETA0, 1.0)
    s = np.linspace(0, 1, 200001)
    brute = max(M.adiabaticity_integrand(p, x, sched) for x in s[::50])
    assert M.tau_adiabatic(p, sched) >= brute - 1e-12


# --- crossover times ---------------------------------------------------------------

def test_tau_boundary_intensity_example(params):
    tb = M.tau_boundary_intensity(params)
    assert tb == pytest.approx(M.closed_tau_boundary_intensity(params), abs=1e-9)
    assert tb == pytest.approx(0.052, abs=1e-3)
    assert M.relative_intensities(params, 2 * tb)[2] < 1 < M.relative_intensities(params, tb / 2)[2]


def test_tau_boundary_sigma_example(params):
    tbs = M.tau_boundary_sigma(params)
    assert tbs == pytest.approx(M.closed_tau_boundary_sigma(params), abs=1e-9)
    assert tbs == pytest.approx(0.033, abs=1e-3)
    assert tbs < M.tau_boundary_intensity(params)
    for tau in np.logspace(math.log10(tbs) + 1e-6, 1, 20):
        assert M.sigma_cost(spec(OP, tau)) < M.sigma_cost(spec(AD, tau))


@pytest.mark.parametrize("delta, theta0, _", random_pairs(8, seed=5))
def test_root_postcondition(delta, theta0, _):
    p = LZParams(delta, theta0, 1.0)
    tb = M.tau_boundary_intensity(p, expand=True)
    tbs = M.tau_boundary_sigma(p, expand=True)
    assert abs(M.intensity_crossing_objective(p)(tb)) < 1e-9
    assert abs(M.sigma_crossing_objective(p)(tbs)) < 1e-9
    assert tb == pytest.approx(M.closed_tau_boundary_intensity(p), rel=1e-9)
    assert tbs == pytest.approx(M.closed_tau_boundary_sigma(p), rel=1e-9)


def test_crossovers_scale_inversely_with_delta(params):
    doubled = LZParams(2 * DELTA, THETA0, 1.0)
    assert M.tau_boundary_intensity(doubled) == pytest.approx(M.tau_boundary_intensity(params) / 2, rel=1e-9)
    assert M.tau_boundary_sigma(doubled) == pytest.approx(M.tau_boundary_sigma(params) / 2, rel=1e-9)


def test_small_angle_limits():
    p = LZParams(DELTA, 1e-3, 1.0)
    # tan(x)/x - 1 ~ x^2/3 keeps tau_B finite while tau_B,Sigma vanishes like x
    assert M.closed_tau_boundary_intensity(p) == pytest.approx(math.sqrt(3) / (2 * DELTA), rel=1e-5)
    assert M.tau_boundary_intensity(p, expand=True) == pytest.approx(math.sqrt(3) / (2 * DELTA), rel=1e-5)
    assert M.tau_boundary_sigma(p, expand=True) == pytest.approx(1e-3 / (2 * DELTA), rel=1e-6)


def test_bracket_error_without_sign_change(params):
    with pytest.raises(BracketError):
        M.tau_boundary_intensity(params, bracket=(1.0, 10.0))
    assert M.tau_boundary_intensity(params, bracket=(1.0, 10.0), expand=True) == pytest.approx(
        M.closed_tau_boundary_intensity(params), rel=1e-9)


def test_divergent_angle_rejected():
    with pytest.raises(DivergenceError):
        M.tau_boundary_intensity(LZParams(DELTA, math.pi / 2, 1.0))
