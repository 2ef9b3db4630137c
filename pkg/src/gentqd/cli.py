"""Command line experiment runner.

Subcommands::

    gentqd sweep       fidelities and costs over the tau grid (CSV)
    gentqd boundaries  tau_ad, tau_B and tau_B,Sigma
    gentqd run         one sampled trajectory (CSV)
    gentqd waveform    discretized drive fields (CSV)

Exit codes: 0 success, 2 configuration error, 3 numerical-integrity error,
4 I/O error.

Waveform records describe each field as ``-A (cos phi sigma_x + sin phi
sigma_y) - delta sigma_z`` with amplitude ``A`` and detuning ``delta`` in
rad/ms, so the adiabatic field has ``phi = 0`` and the counter-diabatic
field ``phi = -pi/2``.
"""
from __future__ import annotations

import argparse
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dynamics, metrics
from .config import RunConfig, dump_config, load_config
from .errors import BracketError, ConfigError, NumericalIntegrityError, StructuralError
from .protocols import LZParams, Protocol, ProtocolSpec, cd_amplitude, rabi

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

SWEEP_PROTOCOLS = (Protocol.ADIABATIC, Protocol.TRADITIONAL_TQD, Protocol.OPTIMAL_TQD)
SWEEP_COLUMNS = ("tau_ms", "protocol", "fidelity_unitary", "fidelity_dephasing",
                 "rel_intensity", "sigma_cost")
STOCHASTIC_COLUMNS = ("fidelity_stochastic", "stochastic_stderr")
RUN_POINTS = 201
WAVEFORM_MIN_SAMPLES = 16


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    return f"{value:.9g}"


def write_csv(out, header: str, columns, rows):
    out.write(f"# {header}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def base_params(config: RunConfig, tau: float = 1.0) -> LZParams:
    return LZParams(config.delta, config.theta0, tau)


def lindblad_steps(spec: ProtocolSpec, config: RunConfig) -> int:
    return max(config.steps, dynamics.lindblad_min_steps(spec, config.gamma_per_ms))


def _point_seed(seed: int, tau_index: int, protocol_index: int) -> int:
    return int(np.random.SeedSequence([seed, tau_index, protocol_index]).generate_state(1)[0])


def sweep_point(config: RunConfig, tau_index: int, protocol_index: int) -> tuple:
    """One CSV row of the sweep; a pure function of its arguments."""
    tau = config.tau_grid[tau_index]
    kind = SWEEP_PROTOCOLS[protocol_index]
    spec = ProtocolSpec(kind, base_params(config, tau))
    f_unitary = dynamics.propagate_unitary(spec, config.steps).final_fidelity
    noise = dynamics.NoiseConfig(config.gamma_per_ms)
    n_steps = lindblad_steps(spec, config)
    f_dephasing = dynamics.propagate_lindblad(spec, noise, n_steps).final_fidelity
    _, i_sa, i_op = metrics.relative_intensities(spec.params)
    intensity = {Protocol.ADIABATIC: 1.0, Protocol.TRADITIONAL_TQD: i_sa,
                 Protocol.OPTIMAL_TQD: i_op}[kind]
    row = (tau, kind.value, f_unitary, f_dephasing, intensity, metrics.sigma_cost(spec))
    if config.ensemble_size > 0:
        noisy = dynamics.NoiseConfig(config.gamma_per_ms, config.ensemble_size,
                                     _point_seed(config.seed, tau_index, protocol_index))
        res = dynamics.propagate_stochastic(spec, noisy, n_steps)
        row += (res.final_fidelity, res.fidelity_stderr)
    return row


def _sweep_task(args):
    return sweep_point(*args)


def sweep_rows(config: RunConfig) -> list:
    tasks = [(config, ti, pi) for ti in range(len(config.tau_grid))
             for pi in range(len(SWEEP_PROTOCOLS))]
    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(_sweep_task, tasks, chunksize=4))
    return [_sweep_task(t) for t in tasks]


def timescales(config: RunConfig) -> dict:
    p = base_params(config)
    return {
        "tau_ad": metrics.tau_adiabatic(p),
        "tau_B": metrics.tau_boundary_intensity(p, expand=True),
        "tau_B_sigma": metrics.tau_boundary_sigma(p, expand=True),
    }


def _header(command: str, config: RunConfig, extra: str = "") -> str:
    head = (f"gentqd {command} config_hash={config.config_hash()} delta_khz={fmt(config.delta_khz)} "
            f"theta0={fmt(config.theta0)} gamma_per_ms={fmt(config.gamma_per_ms)}")
    return head + (" " + extra if extra else "")


def cmd_sweep(config: RunConfig, stdout=None) -> list:
    stdout = stdout or sys.stdout
    rows = sweep_rows(config)
    columns = SWEEP_COLUMNS + (STOCHASTIC_COLUMNS if config.ensemble_size > 0 else ())
    buf = io.StringIO()
    write_csv(buf, _header("sweep", config, f"steps={config.steps} seed={config.seed}"), columns, rows)
    Path(config.output_path).write_text(buf.getvalue())

    last = {r[1]: r for r in rows if r[0] == config.tau_grid[-1]}
    print(f"wrote {len(rows)} rows to {config.output_path}", file=stdout)
    for name in (p.value for p in SWEEP_PROTOCOLS):
        r = last[name]
        print(f"  tau={fmt(r[0])} ms  {name:<16} F_unitary={r[2]:.6f}  F_dephasing={r[3]:.6f}",
              file=stdout)
    return rows


def cmd_boundaries(config: RunConfig, output=None, stdout=None) -> dict:
    stdout = stdout or sys.stdout
    values = timescales(config)
    labels = {"tau_ad": "tau_ad", "tau_B": "tau_B", "tau_B_sigma": "tau_B,Sigma"}
    for key, value in values.items():
        print(f"{labels[key]:<12} {value:.6g} ms", file=stdout)
    if output:
        buf = io.StringIO()
        write_csv(buf, _header("boundaries", config), ("quantity", "value_ms"),
                  [(k, v) for k, v in values.items()])
        Path(output).write_text(buf.getvalue())
    return values


def _parse_protocol(name: str) -> Protocol:
    try:
        kind = Protocol(name)
    except ValueError:
        kind = None
    if kind not in SWEEP_PROTOCOLS:
        raise ConfigError("protocol", f"expected one of {[p.value for p in SWEEP_PROTOCOLS]}, got {name!r}")
    return kind


def _check_tau(tau) -> float:
    if tau is None or not math.isfinite(tau) or tau <= 0:
        raise ConfigError("tau", f"must be a positive time in ms, got {tau!r}")
    return float(tau)


def run_trajectory(config: RunConfig, protocol: str, tau: float) -> dynamics.EvolutionResult:
    spec = ProtocolSpec(_parse_protocol(protocol), base_params(config, _check_tau(tau)))
    steps = max(config.steps, 2 * RUN_POINTS)
    if config.gamma_per_ms > 0:
        noise = dynamics.NoiseConfig(config.gamma_per_ms)
        return dynamics.propagate_lindblad(spec, noise, max(steps, lindblad_steps(spec, config)))
    return dynamics.propagate_unitary(spec, steps)


def cmd_run(config: RunConfig, protocol: str, tau: float, out) -> list:
    res = run_trajectory(config, protocol, tau)
    idx = np.unique(np.round(np.linspace(0, len(res.times) - 1, RUN_POINTS)).astype(int))
    pops, fids = res.populations(), res.fidelities()
    coh, tr, pur = res.coherence(), res.trace(), res.purity()
    rows = [(res.times[k], res.s[k], pops[k, 0], pops[k, 1], fids[k], coh[k], tr[k], pur[k])
            for k in idx]
    write_csv(out, _header("run", config, f"protocol={protocol} tau_ms={fmt(tau)}"),
              ("t_ms", "s", "p0", "p1", "fidelity", "coherence", "trace", "purity"), rows)
    return rows


def waveform_records(config: RunConfig, protocol: str, tau: float, sample_rate: float) -> list:
    kind = _parse_protocol(protocol)
    tau = _check_tau(tau)
    if not sample_rate or sample_rate <= 0 or sample_rate * tau < WAVEFORM_MIN_SAMPLES:
        raise ConfigError("sample_rate", f"sample_rate * tau must be >= {WAVEFORM_MIN_SAMPLES}")
    params = base_params(config, tau)
    n = int(round(sample_rate * tau))
    t = np.linspace(0.0, tau, n + 1)
    s = t / tau
    rows = []
    if kind in (Protocol.ADIABATIC, Protocol.TRADITIONAL_TQD):
        amp = rabi(params, s)
        rows += [("h0", tk, a, params.delta, 0.0) for tk, a in zip(t, amp)]
    if kind in (Protocol.OPTIMAL_TQD, Protocol.TRADITIONAL_TQD):
        amp = cd_amplitude(params, s)
        rows += [("cd", tk, a, 0.0, -math.pi / 2) for tk, a in zip(t, amp)]
    return rows


def cmd_waveform(config: RunConfig, protocol: str, tau: float, sample_rate: float, out) -> list:
    rows = waveform_records(config, protocol, tau, sample_rate)
    write_csv(out, _header("waveform", config, f"protocol={protocol} tau_ms={fmt(tau)} "
                                               f"sample_rate={fmt(sample_rate)}"),
              ("field", "t_ms", "rabi_amplitude", "detuning", "quadrature_phase"), rows)
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gentqd", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file with RunConfig keys")
    common.add_argument("--output", help="output CSV path (stdout if omitted, except sweep)")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="tau sweep of all protocols")
    sub.add_parser("boundaries", parents=[common], help="characteristic time scales")
    for name in ("run", "waveform"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--protocol", required=True, choices=[k.value for k in SWEEP_PROTOCOLS])
        p.add_argument("--tau", type=float, required=True, help="total time in ms")
        if name == "waveform":
            p.add_argument("--sample-rate", type=float, default=100.0, help="samples per ms")
    sub.add_parser("show-config", parents=[common], help="print the effective configuration")
    return parser


def _open_output(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline=""), True


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else RunConfig()
        config = config.with_overrides(seed=args.seed, threads=args.threads)
        if args.command == "sweep":
            cmd_sweep(config.with_overrides(output_path=args.output))
        elif args.command == "boundaries":
            cmd_boundaries(config, args.output)
        elif args.command == "show-config":
            sys.stdout.write(dump_config(config))
        else:
            out, close = _open_output(args.output)
            try:
                if args.command == "run":
                    cmd_run(config, args.protocol, args.tau, out)
                else:
                    cmd_waveform(config, args.protocol, args.tau, args.sample_rate, out)
            finally:
                if close:
                    out.close()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalIntegrityError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        if isinstance(exc, BracketError):
            print("hint: the crossing lies outside the search bracket; check delta_khz and theta0",
                  file=sys.stderr)
        return EXIT_NUMERIC
    except StructuralError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
