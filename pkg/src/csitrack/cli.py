"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (bad file, bad config
values, module precondition failures).  ``-`` stands for stdin/stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import classify, corpus, io, pipeline
from . import simulator as sim
from .core import DomainError, DomainTag, to_domain

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _columns_help(kind: str) -> str:
    cols = pipeline.load_schema()[kind]["columns"]
    width = max(len(c["name"]) for c in cols)
    lines = [f"output columns ({kind}, schema {pipeline.SCHEMA_VERSION}):"]
    for c in cols:
        unit = f" [{c['unit']}]" if c["unit"] else ""
        lines.append(f"  {c['name']:<{width}}  {c['description']}{unit}")
    return "\n".join(lines)


def _write_text(target: str, text: str):
    if target == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(target).write_text(text)


def _parse_event(spec: str) -> sim.Event:
    """``kind:time[:magnitude[:duration]]``, e.g. ``impulse-rotation:1.0:1.57``."""
    parts = spec.split(":")
    if len(parts) < 2 or len(parts) > 4:
        raise UsageError(f"event must be kind:time[:magnitude[:duration]], got {spec!r}")
    try:
        nums = [float(p) for p in parts[1:]]
    except ValueError:
        raise UsageError(f"event times and magnitudes must be numbers: {spec!r}") from None
    kw = dict(zip(("time", "magnitude", "duration"), nums))
    return sim.Event(kind=parts[0], **kw)


# ------------------------------------------------------------------ commands

def cmd_simulate(args) -> int:
    cfg = sim.ChannelSimConfig()
    if args.config:
        cfg = sim.ChannelSimConfig.from_json(Path(args.config).read_text())
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.volatility is not None:
        over["volatility"] = args.volatility
    if args.correlation is not None:
        over["correlation"] = args.correlation
    if args.dims is not None:
        over["dims"] = tuple(args.dims)
    if args.sample_rate is not None:
        over["sample_rate"] = args.sample_rate
    if args.domain is not None:
        over["domain"] = args.domain
    if args.event:
        over["events"] = tuple(cfg.events) + tuple(_parse_event(e) for e in args.event)
    cfg = replace(cfg, **over)
    if args.frames < 1:
        raise UsageError("--frames must be >= 1")
    frames = (f for f, _ in sim.iter_stream(cfg, args.frames))
    io.write_stream(args.output, frames, cfg.sample_rate)
    if args.dump_config:
        _write_text(args.dump_config, cfg.to_json() + "\n")
    return EXIT_OK


def _pipeline_config(args, **forced) -> pipeline.PipelineConfig:
    base = pipeline.PipelineConfig()
    if getattr(args, "config", None):
        base = pipeline.PipelineConfig.from_json(Path(args.config).read_text())
    if getattr(args, "preset", None) == "activity":
        base = pipeline.activity_preset()
    over = {}
    for name in ("axes", "estimator", "stationarity", "window_len", "overlap", "forgetting",
                 "targets_db", "variants", "components", "slope_window",
                 "spectrogram_window", "spectrogram_overlap"):
        val = getattr(args, name, None)
        if val is not None:
            over[name] = tuple(val) if isinstance(val, list) else val
    over.update(forced)
    return replace(base, **over)


def _run(args, **forced) -> pipeline.PipelineResult:
    cfg = _pipeline_config(args, **forced)
    header, frames = io.open_stream(args.input)
    result = pipeline.run_pipeline(cfg, frames, header.sample_rate)
    if getattr(args, "meta", None):
        _write_text(args.meta, json.dumps(result.metadata(), indent=2, sort_keys=True) + "\n")
    return result


def cmd_track(args) -> int:
    result = _run(args)
    _write_text(args.output, pipeline.track_csv(result))
    if args.cdf:
        _write_text(args.cdf, pipeline.cdf_csv(result))
    return EXIT_OK


def cmd_boundary(args) -> int:
    result = _run(args, variants=("pairwise",))
    _write_text(args.output, pipeline.boundary_csv(result))
    return EXIT_OK


def cmd_spectrogram(args) -> int:
    result = _run(args)
    _write_text(args.output, pipeline.spectrogram_csv(result))
    return EXIT_OK


def cmd_classify(args) -> int:
    dcfg = classify.DtwConfig(band_radius=args.band_radius, k=args.k)
    if args.generate:
        ccfg = corpus.CorpusConfig(per_class=args.generate, seed=args.seed or 0)
        classify.write_corpus(args.corpus, corpus.event_corpus(ccfg))
    items = classify.read_corpus(args.corpus)
    if dcfg.k > len(items) - 1:
        raise ValueError(f"k={dcfg.k} needs at least {dcfg.k + 1} series, corpus has {len(items)}")
    preds = classify.leave_one_out(items, dcfg)
    labels, M = classify.confusion_matrix(preds, [s.label for s in items])
    _write_text(args.output, classify.confusion_csv(labels, M))
    acc = classify.accuracy(preds, [s.label for s in items])
    print(f"leave-one-out accuracy {acc:.4f} over {len(items)} series", file=sys.stderr)
    return EXIT_OK


def cmd_convert_domain(args) -> int:
    header, frames = io.open_stream(args.input)
    target = DomainTag.parse(args.to) if args.to else (
        DomainTag.TIME_CIR if header.domain is DomainTag.FREQUENCY_CSI else DomainTag.FREQUENCY_CSI)
    out_header = io.RecordHeader(header.dims, header.sample_rate, target)
    io.write_stream(args.output, (to_domain(f, target) for f in frames), header.sample_rate,
                    header=out_header)
    return EXIT_OK


# ------------------------------------------------------------------- parser

def _add_pipeline_flags(p, targets=True, tracker_flags=True):
    g = p.add_argument_group("pipeline")
    g.add_argument("--config", help="pipeline config JSON; flags override its fields")
    g.add_argument("--preset", choices=["activity"],
                   help="activity: 25 ms stationarity, 95%% overlap, stochastic with forgetting 0.99")
    g.add_argument("--axis", dest="axes", action="append", choices=["rx", "tx", "dy"],
                   help="measurement axis (repeatable, default dy)")
    g.add_argument("--estimator", choices=["batch", "stochastic"])
    g.add_argument("--stationarity", type=float, help="stationarity period in seconds (default 0.025)")
    g.add_argument("--window-len", type=int, help="frames per window, overrides --stationarity")
    g.add_argument("--overlap", type=float, help="window overlap fraction (default 0.95)")
    g.add_argument("--forgetting", type=float, help="stochastic forgetting factor (default 0.99)")
    if targets:
        g.add_argument("--target", dest="targets_db", action="append", type=float,
                       help="MSE target in dB (repeatable, default -12)")
    if tracker_flags:
        g.add_argument("--variant", dest="variants", action="append", choices=["pairwise", "slope"],
                       help="tracker variant (repeatable, default pairwise)")
        g.add_argument("--component", dest="components", action="append", type=int,
                       help="tracked eigenvector index (repeatable, default 1)")
        g.add_argument("--slope-window", type=int, help="bases per slope window (default 4)")
    g.add_argument("--meta", help="write run metadata JSON (config echo, rates) here")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="csitrack", description="Subspace tracking of MIMO CSI streams.",
                     formatter_class=fmt,
                     epilog="exit codes: 0 ok, 1 usage error, 2 data error; '-' means stdin/stdout")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="write a synthetic CSI record file", formatter_class=fmt)
    p.add_argument("-o", "--output", default="-", help="record file (default stdout)")
    p.add_argument("-n", "--frames", type=int, default=2000, help="number of frames (default 2000)")
    p.add_argument("--config", help="simulator config JSON; flags override its fields")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--volatility", type=float, help="basis rotation per frame in radians")
    p.add_argument("--correlation", type=float, help="AR(1) coefficient of the latent process")
    p.add_argument("--dims", type=int, nargs=3, metavar=("RX", "TX", "SC"))
    p.add_argument("--sample-rate", type=float)
    p.add_argument("--domain", choices=["csi", "cir"])
    p.add_argument("--event", action="append",
                   help="kind:time[:magnitude[:duration]], kind impulse-rotation or sustained-rotation")
    p.add_argument("--dump-config", help="write the effective simulator config JSON here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("track", help="record file -> tracker CSV", formatter_class=fmt,
                       epilog=_columns_help("track"))
    p.add_argument("input", help="record file or '-'")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--cdf", help="also write per-series CDF CSV here")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("boundary", help="record file -> boundary / E_s CSV", formatter_class=fmt,
                       epilog=_columns_help("boundary"))
    p.add_argument("input")
    p.add_argument("-o", "--output", default="-")
    _add_pipeline_flags(p, tracker_flags=False)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("spectrogram", help="record file -> spectrogram CSV of tracker magnitude",
                       formatter_class=fmt, epilog=_columns_help("spectrogram"))
    p.add_argument("input")
    p.add_argument("-o", "--output", default="-")
    _add_pipeline_flags(p)
    p.add_argument("--spectrogram-window", type=float, help="seconds (default 1.28)")
    p.add_argument("--spectrogram-overlap", type=float, help="fraction (default 0.95)")
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("classify", help="corpus directory -> leave-one-out confusion CSV",
                       formatter_class=fmt, epilog=_columns_help("confusion"))
    p.add_argument("corpus", help="directory of *.series files")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("-k", type=int, default=3, help="neighbours (odd, default 3)")
    p.add_argument("--band-radius", type=float, default=0.1, help="DTW band as fraction of length")
    p.add_argument("--generate", type=int, metavar="PER_CLASS",
                   help="first write a simulated 3-class corpus with this many series per class")
    p.add_argument("--seed", type=int, help="corpus generation seed (default 0)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("convert-domain", help="CSI <-> CIR by unitary DFT over subcarriers")
    p.add_argument("input")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--to", choices=["csi", "cir"], help="target domain (default: the other one)")
    p.set_defaults(func=cmd_convert_domain)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not an error
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except UsageError as exc:
        print(f"csitrack: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"csitrack {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
