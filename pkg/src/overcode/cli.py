"""Command-line front end.

    overcode codes --sf 8 --extras all
    overcode run --config scenario.json --set snr_db=6 --format json
    overcode sweep --preset fig4 --workers 4
    overcode validate

Exit status: 0 success, 1 validation failure, 2 usage or configuration error.
"""

import argparse
import csv
import io
import json
import os
import sys

from . import __version__
from .codes import correlation_matrix, format_code_set, generate_overloaded_set
from .engine import (
    BE,
    MT,
    PROPOSED,
    ScenarioConfig,
    UserSpec,
    run_preset,
    run_scenario,
)
from .errors import OvercodeError
from .phy import ChannelConfig
from .validation import run_checks

SEED_ENV = "OVERCODE_SEED"
CSV_FIELDS = ("sweep_value", "class", "transmitted_bits", "bit_errors", "ber", "stderr",
              "ber_paper_norm")
CONFIG_FIELDS = ("sf", "iterations", "packet_bits", "snr_db", "snr_reference", "seed",
                 "modulation", "fec", "users", "mode")

DEFAULT_CONFIG = {
    "sf": 8,
    "iterations": 10000,
    "packet_bits": 128,
    "snr_db": 10.0,
    "snr_reference": "chip",
    "seed": 0,
    "modulation": "qpsk",
    "fec": "none",
    "mode": PROPOSED,
    "users": [{"class": "machine_type", "sending_probability": 0.5}] * 4
    + [{"class": "best_effort", "sending_probability": 0.5}] * 6,
}


class UsageError(Exception):
    pass


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config_dict(path):
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(data) - set(CONFIG_FIELDS)
    if unknown:
        raise UsageError(f"unknown config fields: {', '.join(sorted(unknown))}")
    merged = dict(DEFAULT_CONFIG)
    merged.update(data)
    return merged


def apply_overrides(data, overrides, seed_flag=None, environ=None):
    """Apply ``--set`` pairs and the seed precedence: flag > env > file."""
    environ = os.environ if environ is None else environ
    data = dict(data)
    if SEED_ENV in environ and environ[SEED_ENV].strip():
        data["seed"] = _parse_value(environ[SEED_ENV])
    for item in overrides or ():
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        if key not in CONFIG_FIELDS:
            raise UsageError(f"--set names unknown field {key!r}")
        data[key] = _parse_value(value)
    if seed_flag is not None:
        data["seed"] = seed_flag
    return data


def config_from_dict(data):
    try:
        users = []
        for i, u in enumerate(data["users"]):
            code = u.get("code")
            users.append(UserSpec(
                id=int(u.get("id", i)),
                traffic_class=u["class"],
                sending_probability=float(u["sending_probability"]),
                code=tuple(code) if code is not None else None,
                fec=u.get("fec", data["fec"]),
                modulation=u.get("modulation", data["modulation"]),
            ))
        return ScenarioConfig(
            sf=int(data["sf"]),
            users=users,
            channel=ChannelConfig(float(data["snr_db"]), data["snr_reference"]),
            iterations=int(data["iterations"]),
            packet_bits=int(data["packet_bits"]),
            seed=int(data["seed"]),
            mode=data["mode"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid scenario config: {exc}") from exc


def _fmt(x):
    if x is None:
        return "nan"
    return repr(float(x)) if isinstance(x, float) else str(x)


def report_rows(report, sweep_value="", prefix="", classes=(MT, BE)):
    rows = []
    for c in classes:
        t = report.tally(c)
        rows.append([_fmt(sweep_value), prefix + c.value, t.transmitted_bits, t.bit_errors,
                     _fmt(t.ber), _fmt(t.stderr), _fmt(report.ber_paper_norm(c))])
    return rows


def baseline_row(report, sweep_value, label="hadamard_baseline"):
    t = report.tally()
    return [_fmt(sweep_value), label, t.transmitted_bits, t.bit_errors, _fmt(t.ber),
            _fmt(t.stderr), _fmt(report.ber_paper_norm())]


def series_rows(series_list):
    rows = []
    multi = len(series_list) > 1
    for s in series_list:
        prefix = f"{s.label}:" if multi else ""
        for p in s.points:
            if s.label.startswith("hadamard"):
                rows.append(baseline_row(p.report, p.value, s.label))
                continue
            rows.extend(report_rows(p.report, p.value, prefix))
            if p.baseline is not None:
                rows.append(baseline_row(p.baseline, p.value))
    return rows


def write_csv(rows, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    w.writerows(rows)
    out.write(buf.getvalue())


def _open_output(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline=""), True


def cmd_codes(args):
    extras = args.extras if args.extras == "all" else int(args.extras)
    s = generate_overloaded_set(args.sf, extras)
    sys.stdout.write(format_code_set(s))
    rows = s.rows()
    labels = ([f"U{i}" for i in range(len(s.upper))] + [f"L{i}" for i in range(len(s.lower_base))]
              + [f"E{i}" for i in range(s.n_extras)])
    if len(rows) > 64:
        sys.stdout.write(f"CORRELATION omitted ({len(rows)} sequences)\n")
        return 0
    c = correlation_matrix(rows)
    width = max(3, len(str(args.sf)) + 2)
    sys.stdout.write("CORRELATION\n")
    sys.stdout.write(" " * 4 + "".join(f"{l:>{width}}" for l in labels) + "\n")
    for label, row in zip(labels, c):
        sys.stdout.write(f"{label:<4}" + "".join(f"{v:>{width}d}" for v in row) + "\n")
    return 0


def _scenario(args):
    data = load_config_dict(args.config)
    data = apply_overrides(data, args.set, args.seed)
    return config_from_dict(data)


def cmd_run(args):
    cfg = _scenario(args)
    report = run_scenario(cfg, workers=args.workers)
    out, close = _open_output(args.output)
    try:
        if args.format == "json":
            json.dump(report.as_dict(), out, indent=2, sort_keys=True)
            out.write("\n")
        else:
            write_csv(report_rows(report), out)
    finally:
        if close:
            out.close()
    return 0


def cmd_sweep(args):
    cfg = _scenario(args)
    series = run_preset(args.preset, cfg, workers=args.workers)
    out, close = _open_output(args.output)
    try:
        if args.format == "json":
            doc = {"preset": args.preset, "series": [
                {"label": s.label, "parameter": s.parameter, "points": [
                    {"value": p.value, "report": p.report.as_dict(),
                     "baseline": p.baseline.as_dict() if p.baseline is not None else None}
                    for p in s.points]}
                for s in series]}
            json.dump(doc, out, indent=2, sort_keys=True)
            out.write("\n")
        else:
            write_csv(series_rows(series), out)
    finally:
        if close:
            out.close()
    return 0


def cmd_validate(args):
    results = run_checks()
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return 0 if all(ok for _, ok in results) else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="overcode", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codes", help="print an overloaded code set and its correlations")
    p.add_argument("--sf", type=int, required=True)
    p.add_argument("--extras", default="all", help="'all' or a count")
    p.set_defaults(func=cmd_codes)

    def sim_args(p, config_required):
        p.add_argument("--config", required=config_required)
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--seed", type=int)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default="-")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("run", help="simulate one scenario")
    sim_args(p, True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a preset parameter sweep")
    p.add_argument("--preset", choices=("fig4", "fig5", "fig6", "fig7"), required=True)
    sim_args(p, False)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="run the exact invariant checks")
    p.set_defaults(func=cmd_validate)
    return parser


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, OvercodeError, ValueError) as exc:
        print(f"overcode: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
