"""Command-line entry point: ``cgebd <subcommand> ...``.

Exit codes: 0 success, 1 unexpected error, 2 bad configuration or arguments,
3 missing input file, 4 corrupt stream, 5 shape mismatch.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import annotations as ann_io
from . import backtrace, codec, evaluation, model, params as params_io, synth, training
from .config import PipelineConfig, dump_config, load_config
from .errors import ConfigError, CorruptStream, ShapeError

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_MISSING, EXIT_CORRUPT, EXIT_SHAPE = 0, 1, 2, 3, 4, 5


def _read_bytes(path):
    return Path(path).read_bytes()


def _write(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        path.write_text(data, encoding="utf-8")
    else:
        path.write_bytes(data)


def _json(obj):
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _outputs(inputs, out, out_dir, suffix):
    """One output path per input: ``-o`` for a single input, else ``--out-dir``."""
    if out is not None:
        if len(inputs) != 1:
            raise ConfigError("-o takes a single input; use --out-dir for several")
        return [Path(out)]
    if out_dir is None:
        raise ConfigError("give -o or --out-dir")
    return [Path(out_dir) / (Path(p).stem + suffix) for p in inputs]


def _load_streams(paths):
    return [(Path(p).stem, codec.deserialize(_read_bytes(p))) for p in paths]


def _load_model(args, cfg: PipelineConfig):
    """Weights file (its stored model config wins) or seed weights from the config."""
    if args.weights is None:
        return model.init_model(cfg.model), cfg.model
    p, meta = params_io.load_weights(Path(args.weights).read_text(encoding="utf-8"))
    mcfg = model.ModelConfig.from_dict(meta["model"]) if "model" in meta else cfg.model
    model.check_params(p, mcfg)
    return p, mcfg


# subcommands ---------------------------------------------------------------

def cmd_synth(args, cfg):
    if args.suite:
        pairs = synth.hard_cut_suite(args.suite, seed=args.seed)
    elif args.spec:
        spec = synth.SynthSpec.from_json(json.loads(Path(args.spec).read_text(encoding="utf-8")))
        pairs = [synth.generate(spec)]
    else:
        pairs = [synth.generate(synth.demo_spec())]
    out_dir = Path(args.out_dir)
    for video, ann in pairs:
        _write(out_dir / f"{ann.video_id}.lcvr", codec.write_raw(video))
    _write(out_dir / "annotations.json", ann_io.dumps([a for _, a in pairs]))
    print(f"wrote {len(pairs)} video(s) to {out_dir}")


def cmd_encode(args, cfg):
    for src, dst in zip(args.inputs, _outputs(args.inputs, args.output, args.out_dir, ".lcvs")):
        stream = codec.encode(codec.read_raw(_read_bytes(src)), cfg.codec)
        _write(dst, codec.serialize(stream))


def cmd_decode(args, cfg):
    for src, dst in zip(args.inputs, _outputs(args.inputs, args.output, args.out_dir, ".lcvr")):
        _write(dst, codec.write_raw(codec.decode(codec.deserialize(_read_bytes(src)))))


def cmd_accumulate(args, cfg):
    for src, dst in zip(args.inputs, _outputs(args.inputs, args.output, args.out_dir, ".lcva")):
        _write(dst, backtrace.dump_accumulated(codec.deserialize(_read_bytes(src))))


def cmd_detect(args, cfg):
    p, mcfg = _load_model(args, cfg)
    tau = cfg.detect.threshold if args.threshold is None else args.threshold
    results = [
        model.detect(p, stream, mcfg, tau, cfg.detect.nms_radius, args.threads, video_id=vid)
        for vid, stream in _load_streams(args.inputs)
    ]
    text = _json(results)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)


def cmd_baseline(args, cfg):
    preds = {}
    for path in args.inputs:
        preds[Path(path).stem] = synth.baseline_detector(codec.read_raw(_read_bytes(path)), args.tau_pix)
    text = _json(preds)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)


def _match_annotations(streams, annotations):
    by_id = {a.video_id: a for a in annotations}
    missing = [vid for vid, _ in streams if vid not in by_id]
    if missing:
        raise ConfigError(f"no annotation for {', '.join(missing)}")
    return [(s, by_id[vid]) for vid, s in streams]


def cmd_train(args, cfg):
    tc = cfg.train
    p, mcfg = _load_model(args, cfg)
    items = _match_annotations(
        _load_streams(args.inputs),
        ann_io.loads(Path(args.annotations).read_text(encoding="utf-8")),
    )
    data = training.build_dataset(items, mcfg, tc.top_n_raters, tc.alpha)
    p = training.fit_standardization(p, data, mcfg, args.threads)
    steps = tc.steps if args.steps is None else args.steps
    lr = tc.lr if args.lr is None else args.lr

    def report(step, loss):
        if not args.quiet:
            print(f"step {step} loss {loss:.6f}", file=sys.stderr)

    p, trace = training.micro_train(p, data, mcfg, steps, lr, tc.trainable,
                                    threads=args.threads, callback=report)
    meta = {"seed": mcfg.seed, "model": mcfg.as_dict(),
            "train": {"steps": steps, "lr": lr, "trainable": list(tc.trainable)}}
    _write(args.weights_out, params_io.dump_weights(p, meta))
    if args.loss_csv:
        _write(args.loss_csv, training.loss_csv(trace))
    print(f"loss {trace[0]:.6f} -> {trace[-1]:.6f}")


def _load_predictions(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(doc, list):  # detect output
        return {d["video_id"]: list(d["boundaries_s"]) for d in doc}
    if isinstance(doc, dict):
        return {k: list(v) for k, v in doc.items()}
    raise ConfigError("predictions must be a detect result list or a video_id -> timestamps object")


def cmd_eval(args, cfg):
    preds = _load_predictions(args.predictions)
    anns = ann_io.loads(Path(args.annotations).read_text(encoding="utf-8"))
    report = evaluation.f1_report(preds, anns, cfg.eval.thresholds)
    print(report.table())
    if args.csv:
        _write(args.csv, report.to_csv())


def bench_accumulate(lengths, size=64, repeats=7, seed=0):
    """Median accumulate time per GOP length over ``repeats`` rounds; returns (lengths, seconds, r2)."""
    rng = np.random.default_rng(seed)
    g = size // 16
    gops = []
    for n in lengths:
        gop = codec.Gop(
            rng.integers(0, 256, (size, size, 3), dtype=np.uint8),
            rng.integers(-7, 8, (n, g, g, 2)).astype(np.int8),
            rng.integers(-20, 21, (n, 3, size, size)).astype(np.int16),
        )
        backtrace.accumulate(gop)  # warm-up (jit compile)
        gops.append(gop)
    # round-robin over lengths so machine-load drift hits every length alike
    samples = np.empty((repeats, len(gops)))
    for r in range(repeats):
        for i, gop in enumerate(gops):
            t0 = time.perf_counter()
            backtrace.accumulate(gop)
            samples[r, i] = time.perf_counter() - t0
    times = np.median(samples, axis=0).tolist()
    x, y = np.asarray(lengths, float), np.asarray(times)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    r2 = 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())
    return list(lengths), times, r2


def cmd_bench(args, cfg):
    lengths = [int(v) for v in args.lengths.split(",")]
    lens, times, r2 = bench_accumulate(lengths, args.size, args.repeats)
    from . import kernels
    print(f"backend {kernels.BACKEND}")
    print("gop_pframes,seconds")
    for n, t in zip(lens, times):
        print(f"{n},{t:.6f}")
    print(f"linear fit R^2 = {r2:.4f}")


def cmd_config(args, cfg):
    sys.stdout.write(dump_config(cfg))


# parser ----------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="cgebd", description="Event boundary detection on GOP streams.")
    ap.add_argument("--config", help="pipeline config file (INI); defaults apply when omitted")
    ap.add_argument("--threads", type=int, default=1, help="worker threads across GOPs")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="render synthetic video(s) plus annotations")
    s.add_argument("spec", nargs="?", help="SynthSpec JSON (default: bundled demo)")
    s.add_argument("--suite", type=int, default=0, help="render N hard-cut videos instead")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_synth)

    for name, fn, helptext in (
        ("encode", cmd_encode, "raw .lcvr -> GOP stream .lcvs"),
        ("decode", cmd_decode, "GOP stream .lcvs -> raw .lcvr"),
        ("accumulate", cmd_accumulate, "GOP stream -> accumulated planes .lcva"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("inputs", nargs="+")
        s.add_argument("-o", "--output")
        s.add_argument("--out-dir")
        s.set_defaults(func=fn)

    s = sub.add_parser("detect", help="GOP streams -> scores and boundaries JSON")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--weights", help="weights JSON (default: seed weights)")
    s.add_argument("--threshold", type=float)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("baseline", help="pixel-difference detector on raw videos")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--tau-pix", type=float, default=20.0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_baseline)

    s = sub.add_parser("train", help="finite-difference micro-training")
    s.add_argument("inputs", nargs="+", help="GOP streams; file stem = video_id")
    s.add_argument("--annotations", required=True)
    s.add_argument("--weights", help="initial weights (default: seed weights)")
    s.add_argument("--weights-out", required=True)
    s.add_argument("--loss-csv")
    s.add_argument("--steps", type=int)
    s.add_argument("--lr", type=float)
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="predictions + annotations -> F1 report")
    s.add_argument("predictions")
    s.add_argument("annotations")
    s.add_argument("--csv")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bench", help="accumulation time versus GOP length")
    s.add_argument("--lengths", default="8,16,32,64,128")
    s.add_argument("--size", type=int, default=64)
    s.add_argument("--repeats", type=int, default=7)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("config", help="print the effective configuration")
    s.set_defaults(func=cmd_config)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.config)
        args.func(args, cfg)
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename}", file=sys.stderr)
        return EXIT_MISSING
    except CorruptStream as e:
        print(f"error: corrupt stream: {e}", file=sys.stderr)
        return EXIT_CORRUPT
    except ShapeError as e:
        print(f"error: shape mismatch: {e}", file=sys.stderr)
        return EXIT_SHAPE
    except (ConfigError, json.JSONDecodeError, KeyError) as e:
        print(f"error: configuration: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
