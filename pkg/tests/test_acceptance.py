"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line."""
import io
import math
import time

import numpy as np
import pytest

from gentqd import cli, dynamics as D, metrics as M, protocols as P, qops
from gentqd.config import RunConfig
from gentqd.protocols import LZParams, PhaseChoice, Protocol, ProtocolSpec

from conftest import DELTA, THETA0, record_acceptance

AD, SA, OP = Protocol.ADIABATIC, Protocol.TRADITIONAL_TQD, Protocol.OPTIMAL_TQD
GAMMA = 2.5
GRID = RunConfig().tau_grid


def lindblad_fidelity(kind, tau, gamma=GAMMA):
    sp = ProtocolSpec(kind, LZParams(DELTA, THETA0, tau))
    n = max(4000, D.lindblad_min_steps(sp, gamma))
    return D.propagate_lindblad(sp, D.NoiseConfig(gamma), n).final_fidelity


def test_criterion_1_timescales():
    start = time.perf_counter()
    values = cli.cmd_boundaries(RunConfig(), stdout=io.StringIO())
    elapsed = time.perf_counter() - start
    p = LZParams(DELTA, THETA0, 1.0)
    closed = {
        "tau_ad": THETA0 / (4 * DELTA),
        "tau_B": THETA0 / (2 * DELTA * math.sqrt(math.tan(THETA0) / THETA0 - 1)),
        "tau_B_sigma": THETA0 ** 2 / (2 * DELTA) / math.log(1 / math.cos(THETA0) + math.tan(THETA0)),
    }
    rounded = {"tau_ad": 0.021, "tau_B": 0.052, "tau_B_sigma": 0.033}
    ok = (all(abs(values[k] - rounded[k]) <= 1e-3 for k in values)
          and all(abs(values[k] - closed[k]) <= 1e-6 for k in values)
          and elapsed < 1.0
          and abs(closed["tau_B"] - M.closed_tau_boundary_intensity(p)) < 1e-15)
    detail = ", ".join(f"{k}={values[k]:.7f} ms" for k in values) + f", {elapsed:.2f} s"
    record_acceptance(1, "timescale reproduction", ok, detail)
    assert ok, detail


def test_criterion_2_transitionless_exactness():
    start = time.perf_counter()
    worst = 0.0
    for tau in GRID:
        for kind in (SA, OP):
            res = D.propagate_unitary(ProtocolSpec(kind, LZParams(DELTA, THETA0, tau)), 4000)
            worst = max(worst, float(np.max(np.abs(res.fidelities() - 1.0))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 30.0
    detail = f"max |F - 1| = {worst:.2e} over {len(GRID)} tau and every step, {elapsed:.1f} s"
    record_acceptance(2, "transitionless exactness", ok, detail)
    assert ok, detail


def test_criterion_3_adiabatic_limit():
    slow = D.propagate_unitary(ProtocolSpec(AD, LZParams(DELTA, THETA0, 10.0)), 4000).final_fidelity
    fast = D.propagate_unitary(ProtocolSpec(AD, LZParams(DELTA, THETA0, 0.01)), 4000).final_fidelity
    ok = slow > 0.999 and fast < 0.999
    detail = f"F(10 ms) = {slow:.7f}, F(0.01 ms) = {fast:.5f}"
    record_acceptance(3, "adiabatic limit", ok, detail)
    assert ok, detail


def test_criterion_4_energy_decomposition():
    p = LZParams(DELTA, THETA0, 1.0)
    additive = all(i_sa == 1.0 + i_op for _, i_sa, i_op in (M.relative_intensities(p, t) for t in GRID))
    sig = {k: np.array([M.sigma_cost(ProtocolSpec(k, p.with_tau(t))) for t in GRID]) for k in (AD, SA, OP)}
    ordered = bool(np.all(sig[SA] >= sig[AD]))
    flat = float(np.max(np.abs(sig[OP] - THETA0 / math.sqrt(2))))
    tb = M.tau_boundary_intensity(p)
    crossing = abs(M.relative_intensities(p, tb)[2] - 1.0)
    ok = additive and ordered and flat < 1e-10 and abs(THETA0 / math.sqrt(2) - 0.74048) < 5e-6 and crossing < 1e-9
    detail = (f"additive={additive}, sigma_sa>=sigma_ad={ordered}, "
              f"max |sigma_opsa - 0.74048| dev {flat:.1e}, |i_opsa(tau_B) - 1| = {crossing:.1e}")
    record_acceptance(4, "energy decomposition and ordering", ok, detail)
    assert ok, detail


def test_criterion_5_dephasing_ordering():
    taus = [t for t in GRID if t >= 1.0 - 1e-12]
    f = {k: np.array([lindblad_fidelity(k, t) for t in taus]) for k in (AD, SA, OP)}
    ordering = bool(np.all(f[OP] >= f[SA]) and np.all(f[OP] > f[AD]))
    advantage = f[OP] - f[AD]
    monotone = bool(np.all(np.diff(advantage) > 0))
    peak = int(np.argmax(advantage))
    ok = ordering and monotone
    detail = (f"ordering={ordering}; advantage F_opsa - F_ad rises to {advantage[peak]:.5f} "
              f"at tau={taus[peak]:.3g} ms then falls to {advantage[-1]:.5f} at 10 ms")
    record_acceptance(5, "dephasing qualitative reproduction", ok, detail)
    assert ordering, detail
    assert monotone, detail


def test_criterion_6_oracle_equivalence():
    start = time.perf_counter()
    m = 2000
    gaps = []
    for i, tau in enumerate(np.logspace(-2, 1, 5)):
        sp = ProtocolSpec(OP, LZParams(DELTA, THETA0, tau))
        n = max(4000, D.lindblad_min_steps(sp, GAMMA))
        st = D.propagate_stochastic(sp, D.NoiseConfig(GAMMA, m, 7 + i), n)
        ld = D.propagate_lindblad(sp, D.NoiseConfig(GAMMA), n)
        gaps.append(abs(st.final_fidelity - ld.final_fidelity))
    free = ProtocolSpec(OP, LZParams(DELTA, 0.0, 0.4))
    plus = np.array([1, 1]) / math.sqrt(2)
    res = D.propagate_stochastic(free, D.NoiseConfig(GAMMA, m, 99), 400, psi0=plus)
    decay = float(np.max(np.abs(res.coherence() - 0.5 * np.exp(-2 * GAMMA * res.times))))
    elapsed = time.perf_counter() - start
    ok = max(gaps) < 0.01 and decay < 3 / math.sqrt(m) and elapsed < 120
    detail = (f"max |F_stoch - F_lindblad| = {max(gaps):.4f}, coherence dev {decay:.4f} "
              f"(bound {3 / math.sqrt(m):.4f}), {elapsed:.1f} s")
    record_acceptance(6, "oracle equivalence", ok, detail)
    assert ok, detail


def _hermitian_grid(params):
    phases = [PhaseChoice.null(), PhaseChoice.adiabatic(), PhaseChoice.geometric()]
    for s in np.linspace(0, 1, 1001):
        for h in [P.h0(params, s), P.h_cd(params, s), P.h_sa(params, s)] + \
                 [P.gsa_lz(params, s, ph) for ph in phases]:
            if not qops.is_hermitian(h):
                return False
    return True


def _invariants():
    sp = ProtocolSpec(AD, LZParams(DELTA, THETA0, 2.0))
    un = D.propagate_unitary(sp, 4000)
    ld = D.propagate_lindblad(sp, D.NoiseConfig(GAMMA), max(4000, D.lindblad_min_steps(sp, GAMMA)))
    return (np.max(np.abs(np.linalg.norm(un.states, axis=1) - 1)) < 1e-12
            and np.max(np.abs(ld.trace() - 1)) < 1e-6
            and np.all(np.diff(ld.purity()) <= 1e-8))


def _reductions(params):
    s = np.linspace(0, 1, 1001)
    return all(np.max(np.abs(P.gsa_lz(params, x, PhaseChoice.adiabatic()) - P.h_sa(params, x))) <= 1e-10
               and np.max(np.abs(P.gsa_lz(params, x, PhaseChoice.null()) - P.h_cd(params, x))) <= 1e-14
               for x in s)


def _gsa_general_order(params):
    errors = []
    for n in (51, 101, 201, 401):
        s = np.linspace(0, 1, n)
        out = P.gsa_general(s * params.tau, P.h0(params, s), PhaseChoice.null())
        ref = np.stack([P.h_cd(params, x) for x in s])
        errors.append(np.max(np.abs(out - ref)))
    return math.log2(errors[-2] / errors[-1])


def _richardson_order():
    sp = ProtocolSpec(AD, LZParams(DELTA, THETA0, 1.0))
    n = D.lindblad_min_steps(sp, GAMMA)
    f = [D.propagate_lindblad(sp, D.NoiseConfig(GAMMA), k * n).final_fidelity for k in (1, 2, 4)]
    return math.log2((f[0] - f[1]) / (f[1] - f[2]))


def _csv_reproducible(tmp_path):
    cfg = RunConfig(tau_grid=(0.05, 0.5, 5.0), steps=1000, ensemble_size=100, seed=3)
    paths = [tmp_path / f"{i}.csv" for i in range(2)]
    for path, threads in zip(paths, (1, 2)):
        cli.cmd_sweep(cfg.with_overrides(output_path=str(path), threads=threads), stdout=io.StringIO())
    return paths[0].read_bytes() == paths[1].read_bytes()


def test_criterion_7_property_suites(tmp_path, params):
    checks = {
        "hermiticity": _hermitian_grid(params),
        "invariants": bool(_invariants()),
        "reductions": _reductions(params),
        "gsa_general O(ds^2)": 1.8 < _gsa_general_order(params) < 2.2,
        "Richardson O(dt^4)": 3.5 < _richardson_order() < 4.5,
        "byte-identical CSV": _csv_reproducible(tmp_path),
    }
    ok = all(checks.values())
    detail = ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in checks.items())
    record_acceptance(7, "property suites", ok, detail)
    assert ok, detail
