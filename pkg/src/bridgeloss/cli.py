"""Command line interface.

Exit codes: 0 success, 2 usage error (including missing input files),
3 parse error, 4 fit failure, 1 anything else (for example an unwritable
output directory).
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import reference as ref
from .cpw import CpwGeometry
from .errors import BridgeLossError, DomainError, FitError, ParseError
from .fileio import (
    format_loss_csv,
    format_table,
    format_touchstone,
    load_config,
    parse_loss_csv,
    read_traces,
    write_csv_trace,
    write_text,
)
from .loss import BridgeGeometry, DielectricSpec, bridge_capacitance
from .plotting import plot_fit, plot_regression, plot_sweep, plot_t1
from .qubit import (
    TWO_PI,
    GmonCircuit,
    T1Spectrum,
    constant_q_spectrum,
    crossover_frequency,
    frequency_for_t1,
    min_tail_resistance,
    tail_t1_spectrum,
)
from .regression import fit_loss_per_bridge, synthetic_dataset
from .report import budget_figure, budget_record, emit_report, prefixed, regression_record, to_record
from .resonator import (
    fit_s21,
    fit_tls_power_dependence,
    linewidth_grid,
    loaded_q,
    photon_number,
    power_sweep,
    simulate_s21,
    tls_loss,
)

log = logging.getLogger("bridgeloss")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_FIT = 0, 2, 3, 4


class UsageError(BridgeLossError):
    pass


def _pick(flag, config_value):
    return config_value if flag is None else flag


def _si(flag, unit):
    return None if flag is None else flag * unit


def _geometry(args, cfg) -> CpwGeometry:
    g = cfg.geometry
    return CpwGeometry(
        _pick(_si(args.center_width_um, 1e-6), g.center_width),
        _pick(_si(args.gap_um, 1e-6), g.gap),
        _pick(args.substrate_eps, g.substrate_rel_permittivity),
        g.film,
    )


def _bridge(args, cfg) -> BridgeGeometry:
    b = cfg.bridge
    return BridgeGeometry(
        _pick(_si(args.span_width_um, 1e-6), b.span_width),
        _pick(_si(args.bridge_width_um, 1e-6), b.bridge_width),
        _pick(_si(args.height_um, 1e-6), b.height),
    )


def _out_dir(args, cfg) -> Path:
    return Path(_pick(args.output_dir, cfg.output_dir))


def _fit_options(cfg) -> dict:
    return {"max_iterations": cfg.max_iterations, "step_tol": cfg.step_tol}


def _say(args, text):
    if not args.quiet:
        print(text)


def _print_paths(args, paths):
    for kind, p in paths.items():
        _say(args, f"{kind}: {p}")


# --- subcommands ----------------------------------------------------------------

def cmd_budget(args, cfg) -> int:
    geometry = _geometry(args, cfg)
    bridge = _bridge(args, cfg)
    layers = dict(cfg.dielectrics)
    names = args.layer or sorted(layers)
    unknown = [n for n in names if n not in layers and n != "custom"]
    if unknown:
        raise UsageError(f"unknown dielectric preset(s): {', '.join(unknown)}")
    if args.thickness_nm is not None:
        eps = args.layer_eps if args.layer_eps is not None else ref.SIO2_PERMITTIVITY
        layers["custom"] = DielectricSpec(args.thickness_nm * 1e-9, eps,
                                          _pick(args.tan_delta, ref.AMORPHOUS_LOSS_TANGENT))
        if "custom" not in names:
            names = names + ["custom"]
    elif "custom" in names:
        raise UsageError("--layer custom needs --thickness-nm")
    chosen = {n: layers[n] for n in names}
    rec = budget_record(
        geometry, bridge, chosen,
        resonance_freq=args.f0_ghz * 1e9,
        bridge_count=args.bridges,
        resonator_cap=None if args.resonator_cap_ff is None else args.resonator_cap_ff * 1e-15,
        both_surfaces=not args.single_surface,
        loss_tangent=_pick(args.tan_delta, ref.AMORPHOUS_LOSS_TANGENT),
        tunnel_pitch=args.tunnel_pitch_um * 1e-6,
        scaffold_participation=args.scaffold_participation,
    )
    paths = emit_report(rec, _out_dir(args, cfg), "budget",
                        figure=None if args.no_plot else budget_figure(args.bridges))
    _say(args, f"bridge capacitance {rec['bridge_capacitance_fF']:.4g} fF, "
               f"resonator capacitance {rec['resonator_capacitance_used_fF']:.4g} fF, "
               f"{rec['loss_per_nm_of_t_over_eps']:.3g} loss per nm of t/eps")
    _print_paths(args, paths)
    return EXIT_OK


def cmd_fit(args, cfg) -> int:
    traces = read_traces(args.input, args.format)
    out = _out_dir(args, cfg)
    for i, trace in enumerate(traces):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = fit_s21(trace, **_fit_options(cfg))
        for w in caught:
            log.warning("%s", w.message)
        extra = {"source": str(args.input), "trace_index": i, "n_points": len(trace)}
        power = trace.input_power if args.power_dbm is None else args.power_dbm
        if power is not None:
            extra["input_power_dbm"] = power
            extra["mean_photon_number"] = photon_number(result, power)
            extra["photon_number_convention"] = "n = 2 Ql^2 P_in / (hbar w0^2 Qc)"
        stem = "fit" if len(traces) == 1 else f"fit_{i:03d}"
        figure = None if args.no_plot else (lambda p, t=trace, r=result: plot_fit(t, r, p))
        paths = emit_report(result, out, stem, figure=figure, extra=extra)
        _say(args, f"trace {i}: f0 = {result.f0:.9g} Hz, Qi = {result.qi:.4g}, Qc = {result.qc:.4g}")
        _print_paths(args, paths)
    return EXIT_OK


def cmd_sweep(args, cfg) -> int:
    traces = []
    for path in args.inputs:
        traces.extend(read_traces(path, args.format))
    sweep, fits = power_sweep(traces, **_fit_options(cfg))
    out = _out_dir(args, cfg)
    order = np.argsort([photon_number(fr, tr.input_power) for fr, tr in zip(fits, traces)],
                       kind="stable")
    table = format_table({
        "input_power_dbm": [traces[i].input_power for i in order],
        "mean_photon_number": sweep.photon_numbers,
        "qi": sweep.qi,
        "qi_stderr": sweep.qi_err,
        "qc": [fits[i].qc for i in order],
        "f0_hz": [fits[i].f0 for i in order],
    })
    write_text(out / "sweep.csv", table)
    tls = None
    rec = to_record(sweep)
    if not args.no_tls:
        try:
            tls = fit_tls_power_dependence(sweep)
            rec.update(prefixed(to_record(tls), "tls_"))
        except FitError as exc:
            if args.require_tls:
                raise
            rec["tls_fit_error"] = str(exc)
            log.warning("TLS fit skipped: %s", exc)
    figure = None if args.no_plot else (lambda p: plot_sweep(sweep, tls, p))
    paths = emit_report(rec, out, "sweep", figure=figure)
    paths["table"] = out / "sweep.csv"
    _print_paths(args, paths)
    return EXIT_OK


def cmd_regress(args, cfg) -> int:
    bridge = _bridge(args, cfg)
    cap = bridge_capacitance(bridge) if args.bridge_cap_ff is None else args.bridge_cap_ff * 1e-15
    labels = args.power_labels or ["low", "high"][: len(args.inputs)]
    if len(labels) != len(args.inputs) or len(set(labels)) != len(labels):
        raise UsageError("give one distinct --power-label per input")
    datasets, results = [], []
    for path, label in zip(args.inputs, labels):
        ds = parse_loss_csv(path, label)
        datasets.append(ds)
        results.append(fit_loss_per_bridge(ds))
    out = _out_dir(args, cfg)
    rec = {}
    for ds, res in zip(datasets, results):
        rec.update(prefixed(regression_record(res, cap), f"{ds.power_label}_"))
        _say(args, f"{ds.power_label} power: {res.slope:.4g} +- {res.slope_stderr:.2g} per bridge, "
                   f"intercept {res.intercept:.4g}, r^2 {res.r_squared:.4f}")
    figure = None if args.no_plot else (lambda p: plot_regression(datasets, results, p))
    _print_paths(args, emit_report(rec, out, "regress", figure=figure))
    return EXIT_OK


def cmd_qubit_t1(args, cfg) -> int:
    freqs = np.linspace(args.fmin_ghz * 1e9, args.fmax_ghz * 1e9, args.points)
    measured = None
    if args.measured is not None:
        measured = _read_t1_csv(args.measured)
    probe = GmonCircuit(args.squid_nh * 1e-9, args.lg_nh * 1e-9, args.cq_ff * 1e-15, 1.0)
    reference_spec = measured or constant_q_spectrum(args.q_eff, freqs)
    rg_bound = min_tail_resistance(probe, reference_spec)
    rg = args.rg_ohm if args.rg_ohm is not None else rg_bound
    circuit = GmonCircuit(probe.squid_inductance_zero_flux, probe.geometric_inductance,
                          probe.qubit_capacitance, rg)

    tail = tail_t1_spectrum(circuit, freqs)
    tail_exact = tail_t1_spectrum(circuit, freqs, exact=True)
    const = constant_q_spectrum(args.q_eff, freqs)
    out = _out_dir(args, cfg)
    write_text(out / "qubit_t1.csv", format_table({
        "frequency_hz": freqs,
        "t1_tail_s": tail.t1,
        "t1_tail_exact_divider_s": tail_exact.t1,
        "t1_constant_q_s": const.t1,
    }))
    f_zero = circuit.squid_inductance_zero_flux
    rec = {
        "squid_inductance_zero_flux_nH": f_zero * 1e9,
        "geometric_inductance_nH": circuit.geometric_inductance * 1e9,
        "qubit_capacitance_fF": circuit.qubit_capacitance * 1e15,
        "tail_loss_resistance_ohm": rg,
        "tail_loss_resistance_lower_bound_ohm": rg_bound,
        "tail_resistance_source": "flag" if args.rg_ohm is not None else "lower_bound",
        "bound_reference": "measured" if measured is not None else "constant_q",
        "q_eff": args.q_eff,
        "max_frequency_hz_at_zero_flux": 1.0 / (TWO_PI * np.sqrt(f_zero * circuit.qubit_capacitance)),
        "tail_self_resonance_hz": ref.TAIL_SELF_RESONANCE,
        "crossover_frequency_hz": crossover_frequency(circuit, args.q_eff),
        "constant_q_30us_frequency_hz": frequency_for_t1(args.q_eff, 30e-6),
        "t1_constant_q_at_6ghz_s": args.q_eff / (TWO_PI * 6e9),
        "divider_deviation_at_zero_flux": ((f_zero + circuit.geometric_inductance) / f_zero) ** 2,
    }
    rec.update(prefixed(to_record(tail), "tail_"))
    rec.update(prefixed(to_record(const), "constant_q_"))
    curves = {
        "tail, w^-4": tail.t1,
        "tail, exact divider": tail_exact.t1,
        f"constant Q = {args.q_eff:.3g}": const.t1,
    }
    figure = None if args.no_plot else (lambda p: plot_t1(freqs, curves, p, measured))
    paths = emit_report(rec, out, "qubit_t1", figure=figure)
    paths["table"] = out / "qubit_t1.csv"
    _print_paths(args, paths)
    return EXIT_OK


def _read_t1_csv(path) -> T1Spectrum:
    import csv

    path = Path(path)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or [c.strip() for c in rows[0][:2]] != ["frequency_hz", "t1_s"]:
        raise ParseError("header must start with frequency_hz,t1_s", f"{path}: row 0")
    f, t = [], []
    for i, r in enumerate(rows[1:], start=1):
        try:
            f.append(float(r[0]))
            t.append(float(r[1]))
        except (ValueError, IndexError):
            raise ParseError("bad numeric row", f"{path}: row {i}") from None
    try:
        return T1Spectrum(np.array(f), np.array(t))
    except DomainError as exc:
        raise ParseError(str(exc), str(path)) from exc


def cmd_simulate(args, cfg) -> int:
    out = _out_dir(args, cfg)
    if args.kind == "dataset":
        ds = synthetic_dataset(args.intercept, args.slope, args.bridge_counts,
                               args.noise, args.seed, args.power_label)
        path = write_text(out / f"loss_{args.power_label}.csv", format_loss_csv(ds))
        _say(args, f"dataset: {path}")
        return EXIT_OK

    f0 = args.f0_ghz * 1e9
    if args.kind == "trace":
        ql = loaded_q(args.qi, args.qc, args.phi)
        freqs = linewidth_grid(f0, ql, args.span_linewidths, args.points)
        traces = [simulate_s21(f0, args.qi, args.qc, args.phi, freqs, args.noise, args.seed,
                               args.power_dbm)]
    else:
        traces = []
        for k, p in enumerate(args.powers_dbm):
            qi = _self_consistent_qi(f0, args, p)
            ql = loaded_q(qi, args.qc, args.phi)
            freqs = linewidth_grid(f0, ql, args.span_linewidths, args.points)
            seed = None if args.seed is None else args.seed + k
            traces.append(simulate_s21(f0, qi, args.qc, args.phi, freqs, args.noise, seed, p))
    if args.touchstone:
        path = write_text(out / f"{args.kind}.s2p", format_touchstone(traces))
    else:
        path = write_csv_trace(traces, out / f"{args.kind}.csv")
    _say(args, f"{args.kind}: {path}")
    return EXIT_OK


def _self_consistent_qi(f0, args, power_dbm, iterations=50):
    # Photon number depends on Ql, which depends on Qi(n).
    from .resonator import FitResult

    inv_qi = args.tls_f_tan_delta + args.tls_loss_hp
    for _ in range(iterations):
        qi = 1.0 / inv_qi
        ql = loaded_q(qi, args.qc, args.phi)
        n = photon_number(FitResult(f0, qi, args.qc, ql, args.phi), power_dbm)
        inv_qi = float(tls_loss(n, args.tls_f_tan_delta, args.tls_nc, args.tls_alpha,
                                args.tls_loss_hp))
    return 1.0 / inv_qi


# --- parser ---------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--config", help="JSON config file (default: $BRIDGELOSS_CONFIG)")
    p.add_argument("--output-dir", help="directory for reports and figures")
    p.add_argument("--no-plot", action="store_true", help="skip SVG figures")
    p.add_argument("-q", "--quiet", action="store_true")


def _add_geometry(p):
    p.add_argument("--center-width-um", type=float)
    p.add_argument("--gap-um", type=float)
    p.add_argument("--substrate-eps", type=float)


def _add_bridge(p):
    p.add_argument("--span-width-um", type=float, help="trace width under the bridge")
    p.add_argument("--bridge-width-um", type=float, help="bridge extent along the line")
    p.add_argument("--height-um", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bridgeloss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("budget", help="bridge participation and loss budget")
    _add_common(p)
    _add_geometry(p)
    _add_bridge(p)
    p.add_argument("--f0-ghz", type=float, default=ref.RESONANCE_FREQ / 1e9)
    p.add_argument("--bridges", type=int, default=12)
    p.add_argument("--layer", action="append", help="dielectric preset name (repeatable)")
    p.add_argument("--thickness-nm", type=float, help="add a custom lossy layer")
    p.add_argument("--layer-eps", type=float, help="custom layer permittivity")
    p.add_argument("--tan-delta", type=float)
    p.add_argument("--resonator-cap-ff", type=float,
                   help="override 1/(8 f0 Z0) with a fixed resonator capacitance")
    p.add_argument("--single-surface", action="store_true",
                   help="lossy film on one plate only")
    p.add_argument("--tunnel-pitch-um", type=float, default=3.0)
    p.add_argument("--scaffold-participation", type=float, default=ref.SCAFFOLD_PARTICIPATION)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("fit", help="fit a notch resonance")
    _add_common(p)
    p.add_argument("input")
    p.add_argument("--format", choices=["touchstone_2port", "csv_complex"])
    p.add_argument("--power-dbm", type=float, help="feedline power for photon number")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="fit a power sweep and the TLS model")
    _add_common(p)
    p.add_argument("inputs", nargs="+")
    p.add_argument("--format", choices=["touchstone_2port", "csv_complex"])
    p.add_argument("--no-tls", action="store_true")
    p.add_argument("--require-tls", action="store_true",
                   help="treat a failed TLS fit as a fit failure")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("regress", help="loss vs bridge count")
    _add_common(p)
    _add_bridge(p)
    p.add_argument("inputs", nargs="+", help="CSV bridge_count,loss[,loss_err]")
    p.add_argument("--power-label", dest="power_labels", action="append",
                   choices=["low", "high"])
    p.add_argument("--bridge-cap-ff", type=float)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("qubit-t1", help="gmon tail-loss vs constant-Q T1 spectra")
    _add_common(p)
    p.add_argument("--squid-nh", type=float, default=ref.SQUID_INDUCTANCE * 1e9)
    p.add_argument("--lg-nh", type=float, default=ref.GEOMETRIC_INDUCTANCE * 1e9)
    p.add_argument("--cq-ff", type=float, default=ref.QUBIT_CAPACITANCE * 1e15)
    p.add_argument("--rg-ohm", type=float, help="tail resistance (default: lower bound)")
    p.add_argument("--q-eff", type=float, default=ref.EFFECTIVE_QUBIT_Q)
    p.add_argument("--fmin-ghz", type=float, default=3.0)
    p.add_argument("--fmax-ghz", type=float, default=9.0)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--measured", help="CSV frequency_hz,t1_s")
    p.set_defaults(func=cmd_qubit_t1)

    p = sub.add_parser("simulate", help="synthetic traces, sweeps or loss datasets")
    _add_common(p)
    p.add_argument("kind", choices=["trace", "sweep", "dataset"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=1e-4)
    p.add_argument("--f0-ghz", type=float, default=6.0)
    p.add_argument("--qi", type=float, default=ref.BARE_QI_LOW_POWER)
    p.add_argument("--qc", type=float, default=7e5)
    p.add_argument("--phi", type=float, default=0.0, help="asymmetry angle (rad)")
    p.add_argument("--points", type=int, default=801)
    p.add_argument("--span-linewidths", type=float, default=6.0)
    p.add_argument("--power-dbm", type=float)
    p.add_argument("--powers-dbm", type=float, nargs="+",
                   default=[-160, -150, -140, -130, -120, -110, -100])
    p.add_argument("--tls-f-tan-delta", type=float, default=6.7e-7)
    p.add_argument("--tls-nc", type=float, default=10.0)
    p.add_argument("--tls-alpha", type=float, default=0.5)
    p.add_argument("--tls-loss-hp", type=float, default=1e-7)
    p.add_argument("--touchstone", action="store_true", help="write .s2p instead of CSV")
    p.add_argument("--intercept", type=float, default=1 / ref.BARE_QI_LOW_POWER)
    p.add_argument("--slope", type=float, default=ref.LOSS_PER_BRIDGE_LOW_POWER)
    p.add_argument("--bridge-counts", type=int, nargs="+", default=list(ref.BRIDGE_COUNTS))
    p.add_argument("--power-label", choices=["low", "high"], default="low")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FitError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BridgeLossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
