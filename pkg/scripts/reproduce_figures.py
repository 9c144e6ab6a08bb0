#!/usr/bin/env python3
"""BER curves of ARake, DTR and SR on CM1..CM4, written as CSV and SVG per channel.

Example: python3 scripts/reproduce_figures.py --out figures --bits 200000 --workers 1
"""
import argparse
from dataclasses import replace
from pathlib import Path

from uwbsr.cli import format_csv, parse_snr
from uwbsr.engine import LinkConfig, run_sweep
from uwbsr.plot import ber_svg


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--channels", default="cm1,cm2,cm3,cm4")
    ap.add_argument("--schemes", default="arake,dtr,sr")
    ap.add_argument("--snr", default="0:2:20")
    ap.add_argument("--bits", type=int, default=100_000, help="bit budget per point")
    ap.add_argument("--min-errors", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2008)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = LinkConfig(snr_db=parse_snr(args.snr), max_bits=args.bits,
                      min_errors=args.min_errors, seed=args.seed)
    for ch in args.channels.split(","):
        curves = {}
        for scheme in args.schemes.split(","):
            pts = run_sweep(replace(base, scheme=scheme, channel=ch), workers=args.workers)
            curves[scheme.upper()] = pts
            (out / f"{ch}_{scheme}.csv").write_text(format_csv(pts))
            print(f"{ch} {scheme}: " + " ".join(f"{p.snr_db:g}:{p.ber:.2e}" for p in pts), flush=True)
        (out / f"{ch}.svg").write_text(ber_svg(curves, title=f"BER over {ch.upper()}"))


if __name__ == "__main__":
    main()
