"""Command-line front end.

Exit status: 0 success, 2 usage/validation error, 1 runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from aptvdf import dpr_model, fixed_point, power_trace
from aptvdf.errors import AptVdfError
from aptvdf.filter_core import (
    FilterMode,
    FrequencySpec,
    build_filter,
    compute_alpha,
    design_prototype,
    load_coefficients,
    measure_spec,
    process_block,
    save_coefficients,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def format_seconds(t):
    if t < 1e-3:
        return f"{t * 1e6:.6g} µs"
    if t < 1:
        return f"{t * 1e3:.6g} ms"
    return f"{t:.6g} s"


def _emit(args, summary, payload):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(summary)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _filter_from_args(args):
    proto = load_coefficients(args.coeffs)
    if args.alpha is not None and args.target_cutoff is not None:
        raise UsageError("give either --alpha or --target-cutoff, not both")
    if args.target_cutoff is not None:
        if args.proto_cutoff is None:
            raise UsageError("--target-cutoff needs --proto-cutoff")
        alpha = compute_alpha(args.proto_cutoff, args.target_cutoff)
    else:
        alpha = args.alpha if args.alpha is not None else 0.0
    return build_filter(proto, alpha, FilterMode.parse(args.mode))


def _stimulus(args):
    if args.input:
        return _read_series(args.input)
    return fixed_point.white_noise(args.samples, args.seed)


def _read_series(path):
    """Values from an ``n,value`` CSV, or a bare one-column file."""
    values = []
    with open(path) as fh:
        for line in fh:
            parts = line.strip().split(",")
            if not parts[-1]:
                continue
            try:
                values.append(float(parts[-1]))
            except ValueError:
                continue
    return np.array(values)


# -- subcommands ---------------------------------------------------------------

def cmd_design(args):
    spec = FrequencySpec(args.cutoff, args.transition, args.ripple, args.atten)
    proto = design_prototype(spec, max_order=args.max_order)
    ripple, atten = measure_spec(proto.coefficients, spec)
    if args.out:
        save_coefficients(proto, args.out)
    _emit(args,
          f"order {proto.order} ({proto.method}): ripple {ripple:.3f} dB, "
          f"attenuation {atten:.2f} dB",
          {"order": proto.order, "method": proto.method, "ripple_db": ripple,
           "atten_db": atten, "coefficients": proto.coefficients.tolist()})


def cmd_response(args):
    filt = _filter_from_args(args)
    resp = filt.frequency_response(args.grid)
    if args.out:
        resp.to_csv(args.out)
    mag = resp.magnitude_db
    _emit(args,
          f"{filt.mode.label}, alpha={filt.alpha:.9g}, N={filt.n_sections}: "
          f"{args.grid} points, peak {mag.max():.3f} dB",
          {"mode": filt.mode.label, "alpha": filt.alpha, "grid": args.grid,
           "peak_db": float(mag.max()), "out": args.out})


def cmd_simulate(args):
    filt = _filter_from_args(args)
    x = _stimulus(args)
    y = process_block(filt, x)
    payload = {"samples": int(x.size), "alpha": filt.alpha, "mode": filt.mode.label}
    summary = f"{x.size} samples through {filt.mode.label} filter"
    if args.format:
        fmt = fixed_point.FixedPointFormat.parse(args.format)
        policy = fixed_point.QuantizationPolicy(args.rounding, args.overflow)
        cfg = fixed_point.FixedSimConfig.uniform(fmt, args.guard_bits, policy)
        yq = fixed_point.run_fixed(filt, x, cfg)
        err = fixed_point.rmse_db(y, yq)
        payload.update(format=str(fmt), rmse_db=err)
        summary += f"; fixed {fmt} RMSE {err:.2f} dB"
        y = yq
    if args.out:
        fixed_point.write_series_csv(args.out, y)
    if args.stimulus_out:
        fixed_point.write_series_csv(args.stimulus_out, x)
    _emit(args, summary, payload)


def cmd_quantize(args):
    fmt = fixed_point.FixedPointFormat.parse(args.format)
    policy = fixed_point.QuantizationPolicy(args.rounding, args.overflow)
    q = fixed_point.quantize(args.value, fmt, policy)
    _emit(args, repr(q), {"value": args.value, "format": str(fmt), "quantized": q,
                          "code": fixed_point.quantize_int(args.value, fmt, policy)})


def cmd_search(args):
    filt = _filter_from_args(args)
    x = _stimulus(args)
    res = fixed_point.wordlength_search(filt, x, args.target, max_frac_length=args.max_frac,
                                        guard_bits=args.guard_bits, seed=args.seed)
    if args.out:
        _write_json(args.out, res.to_dict())
    _emit(args, f"i_l={res.i_l} f_l={res.f_l} -> {res.config.data_format}, "
                f"RMSE {res.rmse_db:.2f} dB", res.to_dict())


def cmd_dpr_time(args):
    if args.bitstream:
        bs = dpr_model.BitstreamInfo.from_dict(_read_json(args.bitstream))
    elif args.size is not None:
        bs = dpr_model.BitstreamInfo("cli", args.size)
    else:
        raise UsageError("need --size or --bitstream")
    if args.interface:
        iface = dpr_model.ReconfigInterface.from_dict(_read_json(args.interface))
    elif args.throughput is not None:
        iface = dpr_model.ReconfigInterface("cli", args.throughput, args.overhead)
    else:
        raise UsageError("need --throughput or --interface")
    t = dpr_model.reconfig_time(bs, iface)
    _emit(args, format_seconds(t), {"size_bytes": bs.size_bytes,
                                    "throughput_bps": iface.throughput,
                                    "setup_overhead_s": iface.setup_overhead,
                                    "time_s": t})


def cmd_dpr_compare(args):
    if args.config:
        doc = _read_json(args.config)
        rows = [dpr_model.ModeRow(dpr_model.BitstreamInfo.from_dict(r["bitstream"]),
                                  dpr_model.ReconfigInterface.from_dict(r["interface"]),
                                  r.get("measured_s"))
                for r in doc["rows"]]
    else:
        rows = dpr_model.paper_rows()
    report = dpr_model.compare_modes(rows)
    if args.out:
        _write_json(args.out, report.to_dict())
    _emit(args, report.to_text(), report.to_dict())


def cmd_trace(args):
    trace = power_trace.read_trace_csv(args.input, args.skip_rows, args.time_col, args.volt_col)
    chain = power_trace.MeasurementChain.from_json(args.chain)
    pw = power_trace.trace_to_power(trace, chain)
    report = power_trace.overhead_report(
        power_trace.detect_events(pw, args.min_duration, args.sigma_k))
    if args.out:
        _write_json(args.out, report.to_dict())
    lines = [f"{len(report.events)} event(s)"]
    for e in report.events:
        lines.append(f"  {e.start_s:.6g}-{e.end_s:.6g} s  baseline {e.baseline_mw:.1f} mW  "
                     f"delta {e.polarity * e.mean_delta_mw:+.1f} mW  "
                     f"energy {e.energy_overhead_uj:.4g} uJ")
    lines.append(f"total energy {report.total_energy_uj:.4g} uJ")
    _emit(args, "\n".join(lines), report.to_dict())


def reproduce_checks():
    """``[(name, detail, ok)]`` for the reference timing/power dataset."""
    checks = []
    full, partial, icap = dpr_model.TIMING
    t = dpr_model.reconfig_time(
        dpr_model.BitstreamInfo("icap", icap.size_bytes),
        dpr_model.ReconfigInterface("icap", dpr_model.icap_throughput(32, 100e6),
                                    dpr_model.ICAP_SETUP_S))
    rel = abs(t - icap.measured_s) / icap.measured_s
    checks.append(("ICAP32 DMA time", f"{format_seconds(t)} vs {format_seconds(icap.measured_s)}"
                   f" ({100 * rel:.2f}%)", rel <= 0.03))
    tp_full = dpr_model.calibrate_throughput(full.size_bytes, full.measured_s)
    tp_part = dpr_model.calibrate_throughput(partial.size_bytes, partial.measured_s)
    rel = abs(tp_full - tp_part) / tp_part
    checks.append(("JTAG throughput consistency",
                   f"{tp_full:.0f} vs {tp_part:.0f} B/s ({100 * rel:.2f}%)", rel <= 0.03))
    for label, err, ok in dpr_model.table3_consistency():
        checks.append((f"power estimate {label}", f"static+dynamic-total = {err:+.0f} mW", ok))
    return checks


def cmd_reproduce(args):
    report = dpr_model.compare_modes(dpr_model.paper_rows())
    checks = reproduce_checks()
    ok = all(c[2] for c in checks)
    if args.json:
        print(json.dumps({"comparison": report.to_dict(),
                          "checks": [{"name": n, "detail": d, "pass": p} for n, d, p in checks],
                          "pass": ok}, indent=2))
    else:
        print(report.to_text())
        print()
        for name, detail, passed in checks:
            print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return EXIT_OK if ok else EXIT_RUNTIME


# -- parser --------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable stdout")

    filt = argparse.ArgumentParser(add_help=False)
    filt.add_argument("--coeffs", required=True, help="prototype coefficient file")
    filt.add_argument("--alpha", type=float, help="warping coefficient (default 0)")
    filt.add_argument("--target-cutoff", type=float, help="desired cutoff; alpha is derived")
    filt.add_argument("--proto-cutoff", type=float, help="prototype cutoff for --target-cutoff")
    filt.add_argument("--mode", default="00", help="sel_f1 sel_f2 bits, e.g. 01, or a type name")

    stim = argparse.ArgumentParser(add_help=False)
    stim.add_argument("--input", help="stimulus CSV (n,value)")
    stim.add_argument("--samples", type=int, default=10_000)
    stim.add_argument("--seed", type=int, default=0)

    quant = argparse.ArgumentParser(add_help=False)
    quant.add_argument("--rounding", default="nearest-even",
                       choices=[r.value for r in fixed_point.Rounding])
    quant.add_argument("--overflow", default="saturate",
                       choices=[o.value for o in fixed_point.Overflow])

    p = argparse.ArgumentParser(prog="aptvdf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("design", parents=[common], help="design a lowpass prototype")
    s.add_argument("--cutoff", type=float, required=True)
    s.add_argument("--transition", type=float, required=True)
    s.add_argument("--ripple", type=float, required=True, help="passband ripple, dB")
    s.add_argument("--atten", type=float, required=True, help="stopband attenuation, dB")
    s.add_argument("--max-order", type=int, default=200)
    s.add_argument("--out")
    s.set_defaults(func=cmd_design)

    s = sub.add_parser("response", parents=[common, filt], help="frequency response CSV")
    s.add_argument("--grid", type=int, default=1024)
    s.add_argument("--out")
    s.set_defaults(func=cmd_response)

    s = sub.add_parser("simulate", parents=[common, filt, stim, quant],
                       help="run a stimulus through the filter")
    s.add_argument("--format", help="fixed-point [w_l,f_l]; float if omitted")
    s.add_argument("--guard-bits", type=int, default=4)
    s.add_argument("--out")
    s.add_argument("--stimulus-out")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("quantize", parents=[common, quant], help="quantize one value")
    s.add_argument("--value", type=float, required=True)
    s.add_argument("--format", required=True)
    s.set_defaults(func=cmd_quantize)

    s = sub.add_parser("search", parents=[common, filt, stim], help="word-length search")
    s.add_argument("--target", type=float, required=True, help="target RMSE, dB")
    s.add_argument("--max-frac", type=int, default=30)
    s.add_argument("--guard-bits", type=int, default=4)
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("dpr-time", parents=[common], help="predicted reconfiguration time")
    s.add_argument("--size", type=int, help="bitstream bytes")
    s.add_argument("--throughput", type=float, help="bytes/s")
    s.add_argument("--overhead", type=float, default=0.0, help="setup overhead, s")
    s.add_argument("--bitstream", help="bitstream JSON")
    s.add_argument("--interface", help="interface JSON")
    s.set_defaults(func=cmd_dpr_time)

    s = sub.add_parser("dpr-compare", parents=[common], help="compare reconfiguration modes")
    s.add_argument("--config", help="JSON with a 'rows' list; built-in dataset if omitted")
    s.add_argument("--out")
    s.set_defaults(func=cmd_dpr_compare)

    s = sub.add_parser("trace", parents=[common], help="analyze a shunt-voltage trace")
    s.add_argument("--input", required=True)
    s.add_argument("--chain", required=True, help="measurement chain JSON")
    s.add_argument("--min-duration", type=float, default=20e-6)
    s.add_argument("--sigma-k", type=float, default=6.0)
    s.add_argument("--skip-rows", type=int, default=0)
    s.add_argument("--time-col", type=int, default=0)
    s.add_argument("--volt-col", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("reproduce-paper", parents=[common],
                       help="run the built-in timing/power dataset checks")
    s.set_defaults(func=cmd_reproduce)
    return p


def parse_args(argv=None):
    return build_parser().parse_args(argv)


def execute(args):
    try:
        rc = args.func(args)
    except UsageError as exc:
        print(f"aptvdf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"aptvdf {args.command}: {exc.filename or ''}: {exc.strerror or exc}",
              file=sys.stderr)
        return EXIT_RUNTIME
    except AptVdfError as exc:
        print(f"aptvdf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ValueError) else EXIT_RUNTIME
    return EXIT_OK if rc is None else rc


def main(argv=None):
    args = parse_args(argv)
    return execute(args)


if __name__ == "__main__":
    sys.exit(main())
