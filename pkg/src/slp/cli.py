"""Command-line entry points: ``slp ser``, ``slp complexity``, ``slp selftest``.

Exit codes: 0 on success, 2 for configuration errors, 1 for runtime
failures (including failed self-test suites). Result CSVs are
byte-identical for identical configurations; the accompanying
``manifest.json`` records the resolved configuration, seed, and output
paths of each run.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import selftest
from .complexity import complexity_report
from .config import (
    ConfigError,
    build_manifest,
    read_config_file,
    resolve_settings,
    write_manifest,
)
from .simulation import SimConfig, simulate_ser

CSV_HEADER = "snr_db,symbols,errors,ser,ci_halfwidth"

PLOT_SCRIPT = """\
#!/usr/bin/env python3
# manifest: manifest.json
\"\"\"Render SER-vs-SNR curves from the CSV files next to this script.

Requires matplotlib. Usage: python plot_ser.py [output.png]
\"\"\"
import csv
import glob
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "ser.png")
fig, ax = plt.subplots(figsize=(7, 5))
for path in sorted(glob.glob(os.path.join(here, "ser_*.csv"))):
    label = os.path.basename(path)[4:-4]
    snr, ser = [], []
    with open(path) as fh:
        rows = csv.DictReader(r for r in fh if not r.startswith("#"))
        for row in rows:
            snr.append(float(row["snr_db"]))
            ser.append(float(row["ser"]))
    ax.semilogy(snr, ser, marker="o", label=label)
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("SER")
ax.grid(True, which="both", alpha=0.4)
ax.legend()
fig.tight_layout()
fig.savefig(out, dpi=150)
print(f"wrote {out}")
"""


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--seed", type=int, help="RNG seed (fallback: SLP_SEED env)")
    parser.add_argument("--threads", type=int, help="worker process bound")
    parser.add_argument("--out-dir", dest="out_dir", help="output directory")
    parser.add_argument("--precoders", help="comma list, e.g. mmse,ci-zf,ci-mmse")
    parser.add_argument("--snr", dest="snr_db", help="grid: start:stop:step or comma list")
    parser.add_argument("--scheme", help="qpsk | 8psk | 16qam | 64qam")
    parser.add_argument("--rho-convention", dest="rho_convention",
                        choices=["complex", "real-literal"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ser = sub.add_parser("ser", help="Monte Carlo SER sweep")
    _add_common_flags(ser)
    ser.add_argument("--n-tx", dest="n_tx", type=int)
    ser.add_argument("--n-users", dest="n_users", type=int)
    ser.add_argument("--block-length", dest="block_length", type=int)
    ser.add_argument("--min-errors", dest="min_errors", type=int)
    ser.add_argument("--max-symbols", dest="max_symbols", type=int)
    ser.add_argument("--min-blocks", dest="min_blocks", type=int)

    comp = sub.add_parser("complexity", help="multiplication-count report")
    _add_common_flags(comp)
    comp.add_argument("--n-tx", dest="n_tx", type=int)
    comp.add_argument("--n-users", dest="n_users", type=int)
    comp.add_argument("--samples", type=int, help="draws per SNR point")

    st = sub.add_parser("selftest", help="run built-in consistency suites")
    st.add_argument("--seed", type=int, default=None)
    return parser


def _settings_from(args: argparse.Namespace):
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {
        key: getattr(args, key)
        for key in ("n_tx", "n_users", "scheme", "precoders", "snr_db",
                    "block_length", "min_errors", "max_symbols", "min_blocks", "seed",
                    "rho_convention", "samples", "threads", "out_dir")
        if hasattr(args, key) and getattr(args, key) is not None
    }
    return resolve_settings(file_values, overrides)


def _format_float(x: float) -> str:
    return repr(float(x))


def cmd_ser(args: argparse.Namespace) -> int:
    settings = _settings_from(args)
    config = SimConfig(
        n_tx=settings.n_tx, n_users=settings.n_users, scheme=settings.scheme,
        precoders=settings.precoders, snr_db=settings.snr_db,
        block_length=settings.block_length, min_errors=settings.min_errors,
        max_symbols=settings.max_symbols, min_blocks=settings.min_blocks,
        seed=settings.seed,
        power=settings.power, rho_convention=settings.rho_convention,
    )
    curves = simulate_ser(config, threads=settings.threads)
    os.makedirs(settings.out_dir, exist_ok=True)
    outputs = []
    for kind, curve in curves.items():
        path = os.path.join(settings.out_dir, f"ser_{kind}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# manifest: manifest.json\n")
            fh.write(CSV_HEADER + "\n")
            for p in curve.points:
                fh.write(",".join([
                    _format_float(p.snr_db), str(p.symbols), str(p.errors),
                    _format_float(p.ser), _format_float(p.ci_halfwidth),
                ]) + "\n")
        outputs.append(path)
        print(f"{kind}: " + "  ".join(
            f"{p.snr_db:g}dB={p.ser:.3e}" for p in curve.points))
    plot_path = os.path.join(settings.out_dir, "plot_ser.py")
    with open(plot_path, "w", encoding="utf-8") as fh:
        fh.write(PLOT_SCRIPT)
    outputs.append(plot_path)
    manifest_path = os.path.join(settings.out_dir, "manifest.json")
    write_manifest(build_manifest(settings, "ser", outputs), manifest_path)
    print(f"wrote {len(outputs)} files + manifest to {settings.out_dir}")
    return 0


def cmd_complexity(args: argparse.Namespace) -> int:
    settings = _settings_from(args)
    report = complexity_report(
        settings.n_tx, settings.n_users, settings.scheme, settings.snr_db,
        samples=settings.samples, seed=settings.seed, power=settings.power,
        rho_convention=settings.rho_convention,
    )
    os.makedirs(settings.out_dir, exist_ok=True)
    csv_path = os.path.join(settings.out_dir, f"complexity_{settings.scheme}.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("# manifest: manifest.json\n")
        fh.write("pipeline,mean_loops,cost_units,per_draw_mean_units\n")
        for name in report.ratios:
            fh.write(",".join([
                name, _format_float(report.mean_loops[name]),
                _format_float(report.ratios[name]),
                _format_float(report.mean_ratios[name]),
            ]) + "\n")
    summary_path = os.path.join(settings.out_dir, f"complexity_{settings.scheme}.txt")
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("# manifest: manifest.json\n")
        fh.write("\n".join(report.summary_lines()) + "\n")
    for line in report.summary_lines():
        print(line)
    outputs = [csv_path, summary_path]
    manifest_path = os.path.join(settings.out_dir, "manifest.json")
    write_manifest(build_manifest(settings, "complexity", outputs), manifest_path)
    return 0


def cmd_selftest(args: argparse.Namespace) -> int:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("SLP_SEED", "0"))
    results = selftest.run_all(seed)
    failed = 0
    for name, ok, detail in results:
        status = "PASS" if ok else "FAIL"
        print(f"{name:24s} {status}  {detail}")
        failed += 0 if ok else 1
    print(f"{len(results) - failed}/{len(results)} suites passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "ser":
            return cmd_ser(args)
        if args.command == "complexity":
            return cmd_complexity(args)
        return cmd_selftest(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures get a distinct code
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
