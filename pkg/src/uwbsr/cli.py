"""Command-line front end.

    uwbsr [sweep] --scheme sr --channel cm1 --snr 0:2:20 --out results/
    uwbsr chanstats --channel cm1 --n 10000 --seed 1
    uwbsr dump-waveform --scheme sr --bits +1,-1 --out burst.txt

Settings can also come from a flat ``key = value`` file (``--config``);
command-line flags win. Every sweep writes ``manifest.txt``, which is itself a
valid config file that reproduces the run.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import channel as chan
from .engine import BerPoint, Link, LinkConfig, run_sweep
from .errors import ConfigurationError
from .plot import ber_svg
from .streams import RandomStream

CSV_HEADER = "snr_db,errors,trials,ber,ci_low,ci_high,censored"
SUBCOMMANDS = ("sweep", "chanstats", "dump-waveform")


def parse_snr(text: str) -> tuple[float, ...]:
    """``start:step:stop`` (inclusive), a comma list, or a single value."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(x) for x in text.split(":")]
            if len(parts) != 3:
                raise ConfigurationError(f"snr: expected start:step:stop, got {text!r}")
            start, step, stop = parts
            if step <= 0:
                raise ConfigurationError(f"snr: step must be positive, got {step:g}")
            if stop < start:
                raise ConfigurationError(f"snr: stop {stop:g} is below start {start:g}")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(round(start + k * step, 10) for k in range(n))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ConfigurationError:
        raise
    except ValueError:
        raise ConfigurationError(f"snr: cannot parse {text!r}") from None


def _on_off(key):
    def conv(v: str) -> bool:
        v = v.strip().lower()
        if v in ("on", "1", "true", "yes"):
            return True
        if v in ("off", "0", "false", "no"):
            return False
        raise ConfigurationError(f"{key}: expected on/off, got {v!r}")
    return conv


def _auto(conv):
    return lambda v: None if v.strip().lower() == "auto" else conv(v)


def _u64(v: str) -> int:
    n = int(v, 0)
    if not 0 <= n < 2**64:
        raise ValueError("outside unsigned 64-bit range")
    return n


# config key -> (LinkConfig field, parser, formatter)
KEYS = {
    "scheme": ("scheme", str, str),
    "channel": ("channel", str, str),
    "snr": ("snr_db", parse_snr, lambda s: ",".join(repr(x) for x in s)),
    "bits": ("max_bits", int, str),
    "min-errors": ("min_errors", int, str),
    "ns": ("ns", int, str),
    "dt": ("dt", float, repr),
    "tint": ("t_int", _auto(float), lambda v: "auto" if v is None else repr(v)),
    "tf": ("tf", _auto(float), lambda v: "auto" if v is None else repr(v)),
    "td": ("td", float, repr),
    "tw": ("tw", float, repr),
    "seed": ("seed", _u64, str),
    "coherence": ("coherence", _auto(str), lambda v: "auto" if v is None else v),
    "sr-diff": ("sr_diff", _on_off("sr-diff"), lambda v: "on" if v else "off"),
    "shadowing": ("shadowing", _on_off("shadowing"), lambda v: "on" if v else "off"),
    "dtr-delay": ("dtr_delay", str, str),
    "lb": ("lb", int, str),
    "lp": ("lp", int, str),
    "burst": ("burst_bits", int, str),
    "polarity": ("polarity", str, str),
    "order": ("pulse_order", int, str),
}


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in KEYS:
            raise ConfigurationError(f"{path}:{n}: unknown key {key!r}")
        values[key] = value
    return values


def build_config(values: dict[str, str]) -> LinkConfig:
    kwargs = {}
    for key, raw in values.items():
        if key not in KEYS:
            raise ConfigurationError(f"unknown key {key!r}")
        name, conv, _ = KEYS[key]
        try:
            kwargs[name] = conv(raw)
        except ConfigurationError:
            raise
        except ValueError as exc:
            raise ConfigurationError(f"{key}: invalid value {raw!r} ({exc})") from None
    return LinkConfig(**kwargs)


def config_items(cfg: LinkConfig) -> list[tuple[str, str]]:
    return [(key, fmt(getattr(cfg, name))) for key, (name, _, fmt) in KEYS.items()]


def _add_link_flags(p: argparse.ArgumentParser, budget: bool = True):
    p.add_argument("--config", help="flat key=value settings file (flags override it)")
    p.add_argument("--scheme", choices=["arake", "srake", "prake", "tr", "dtr", "sr"])
    p.add_argument("--channel", help="awgn | cm1..cm4 | file:<path>")
    p.add_argument("--snr", help="Eb/N0 grid in dB: start:step:stop or a comma list")
    if budget:
        p.add_argument("--bits", help="maximum counted bits per SNR point")
    p.add_argument("--min-errors", dest="min_errors")
    p.add_argument("--ns", help="pulses (frames) per bit")
    p.add_argument("--dt", help="sample interval in ns")
    p.add_argument("--tint", help="integration window in ns (or auto)")
    p.add_argument("--tf", help="frame duration in ns (or auto)")
    p.add_argument("--td", help="TR reference-to-data delay in ns")
    p.add_argument("--tw", help="pulse width in ns")
    p.add_argument("--seed", help="unsigned 64-bit seed")
    p.add_argument("--coherence", choices=["per-symbol", "per-2-symbols", "static", "auto"])
    p.add_argument("--sr-diff", dest="sr_diff", choices=["on", "off"])
    p.add_argument("--shadowing", choices=["on", "off"])
    p.add_argument("--dtr-delay", dest="dtr_delay", choices=["tf", "td"])
    p.add_argument("--lb", help="SRake fingers (strongest paths)")
    p.add_argument("--lp", help="PRake fingers (first paths)")
    p.add_argument("--burst", help="bits per simulated burst")
    p.add_argument("--polarity", choices=["random", "positive"], help="channel ray polarity")
    p.add_argument("--order", help="Gaussian derivative order of the pulse")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uwbsr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"uwbsr {__version__}")
    sub = parser.add_subparsers(dest="command")

    sweep = sub.add_parser("sweep", help="BER vs Eb/N0 sweep (default)")
    _add_link_flags(sweep)
    sweep.add_argument("--out", default="results", help="output directory")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--no-svg", action="store_true")

    cs = sub.add_parser("chanstats", help="delay statistics of a channel model")
    cs.add_argument("--channel", default="cm1")
    cs.add_argument("--n", type=int, default=1000, help="number of realizations")
    cs.add_argument("--seed", type=_u64, default=1)
    cs.add_argument("--polarity", choices=["random", "positive"], default="random")
    cs.add_argument("--export", help="write the first realization to this file")

    dump = sub.add_parser("dump-waveform", help="write one burst's waveforms and decisions")
    _add_link_flags(dump, budget=False)
    dump.add_argument("--bits", dest="pattern", default="+1,-1",
                      help="bit pattern, e.g. --bits=+1,-1,-1")
    dump.add_argument("--out", default="waveform.txt")
    return parser


def parse_config(args: argparse.Namespace) -> LinkConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for key, (name, _, _) in KEYS.items():
        attr = key.replace("-", "_")
        v = getattr(args, attr, None)
        if v is not None:
            values[key] = v
    return build_config(values)


@dataclass
class RunManifest:
    config: LinkConfig
    version: str = __version__
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    outputs: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = ["# uwbsr run manifest; feed back with --config to reproduce",
                 f"# version = {self.version}",
                 f"# timestamp = {self.timestamp}",
                 f"# outputs = {', '.join(self.outputs)}"]
        lines += [f"{k} = {v}" for k, v in config_items(self.config)]
        return "\n".join(lines) + "\n"


def format_csv(points: list[BerPoint]) -> str:
    rows = [CSV_HEADER]
    for p in points:
        rows.append(f"{p.snr_db:.10g},{p.errors},{p.trials},{p.ber:.10g},"
                    f"{p.ci_low:.10g},{p.ci_high:.10g},{int(p.censored)}")
    return "\n".join(rows) + "\n"


def emit_results(points: list[BerPoint], manifest: RunManifest, out_dir: str | Path,
                 svg: bool = True) -> dict[str, Path]:
    if not points:
        raise ConfigurationError("no BER points to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out / "results.csv", "manifest": out / "manifest.txt"}
    if svg:
        paths["svg"] = out / "ber.svg"
    manifest.outputs = [p.name for p in paths.values()]
    paths["csv"].write_text(format_csv(points))
    if svg:
        cfg = manifest.config
        paths["svg"].write_text(ber_svg({cfg.scheme.upper(): points},
                                        title=f"{cfg.scheme.upper()} over {cfg.channel}"))
    paths["manifest"].write_text(manifest.to_text())
    return paths


def cmd_sweep(args, parser) -> int:
    try:
        cfg = parse_config(args)
    except (ConfigurationError, OSError) as exc:
        parser.error(str(exc))
    points = run_sweep(cfg, workers=args.workers)
    try:
        paths = emit_results(points, RunManifest(cfg), args.out, svg=not args.no_svg)
    except OSError as exc:
        print(f"uwbsr: cannot write results: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(format_csv(points))
    print(f"# wrote {', '.join(str(p) for p in paths.values())}", file=sys.stderr)
    return 0


def cmd_chanstats(args, parser) -> int:
    if args.n < 1:
        parser.error("n: need at least one realization")
    root = RandomStream(args.seed)
    try:
        if args.channel.startswith("file:"):
            reals = [chan.read_realization(args.channel[5:])]
        else:
            from dataclasses import replace
            params = replace(chan.preset(args.channel), random_polarity=args.polarity == "random")
            reals = [chan.draw_realization(params, root.split(i)) for i in range(args.n)]
    except (ConfigurationError, OSError) as exc:
        parser.error(str(exc))
    if args.export:
        chan.write_realization(args.export, reals[0])
    print(f"channel={args.channel} seed={args.seed} {chan.stats(reals).line()}")
    return 0


def parse_pattern(text: str) -> np.ndarray:
    try:
        bits = np.array([int(x) for x in text.split(",") if x.strip()], dtype=np.int8)
    except ValueError:
        raise ConfigurationError(f"bits: cannot parse pattern {text!r}") from None
    if bits.size == 0 or not np.all(np.abs(bits) == 1):
        raise ConfigurationError("bits: pattern must be a comma list of +1/-1")
    return bits


def cmd_dump(args, parser) -> int:
    try:
        cfg = parse_config(args)
        bits = parse_pattern(args.pattern)
    except (ConfigurationError, OSError) as exc:
        parser.error(str(exc))
    link = Link(cfg)
    # a single SNR value adds noise; default is noiseless
    n0 = link.n0(cfg.snr_db[0]) if args.snr is not None else 0.0
    burst = link.burst(RandomStream(cfg.seed), n0, bits=bits, keep_clean=True)
    frame = link.frame
    nf = frame.frame_samples(cfg.dt)
    n = bits.size * frame.ns * nf
    tx_times, tx_pols = _tx_waveform(link, bits)
    tr = burst.trace
    lines = [f"# uwbsr {__version__} dump-waveform",
             *(f"# {k} = {v}" for k, v in config_items(cfg)),
             f"# frames = {bits.size * frame.ns}  samples_per_frame = {nf}  t_int = {frame.t_int}",
             f"# n0 = {n0!r}",
             f"# tx_bits = {' '.join(f'{b:+d}' for b in bits)}",
             f"# first_decided_bit = {tr.first_bit}",
             f"# decided = {' '.join(f'{b:+d}' for b in tr.bits)}",
             f"# bit_statistics = {' '.join(f'{v:.10g}' for v in tr.statistics)}",
             f"# frame_statistics = {' '.join(f'{v:.10g}' for v in tr.frame_statistics)}",
             "# columns: t_ns tx rx_clean rx"]
    tx = tx_times
    for k in range(n):
        lines.append(f"{k * cfg.dt:.6f} {tx[k]:.10g} {burst.clean.samples[k]:.10g} "
                     f"{burst.received.samples[k]:.10g}")
    try:
        Path(args.out).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        print(f"uwbsr: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    print(f"# wrote {args.out} ({n} samples, {bits.size * frame.ns} frames)", file=sys.stderr)
    return 0


def _tx_waveform(link: Link, bits):
    from .modem import pulse_train, synthesize
    nf = link.frame.frame_samples(link.cfg.dt)
    times, pols = pulse_train(bits, link.frame, differential=link.differential_tx)
    w = synthesize(times, pols, link.pulse, bits.size * link.frame.ns * nf + len(link.pulse))
    return w.samples, pols


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in (*SUBCOMMANDS, "-h", "--help", "--version"):
        argv.insert(0, "sweep")
    parser = make_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    handler = {"sweep": cmd_sweep, "chanstats": cmd_chanstats, "dump-waveform": cmd_dump}[args.command]
    return handler(args, sub)


if __name__ == "__main__":
    raise SystemExit(main())
