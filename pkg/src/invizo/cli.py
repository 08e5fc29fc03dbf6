"""Command-line entry points.

Subcommands:

* ``run``        -- process one image against a template, emit JSON.
* ``synth``      -- generate a synthetic labelled line dataset.
* ``train``      -- train the recognizer on a manifest dataset.
* ``eval``       -- CER/WER between a reference and a hypothesis file.
* ``eval-model`` -- error rates of a trained checkpoint on a manifest.
* ``eval-det``   -- detection precision/recall/F1 between two quad files.
* ``serve``      -- start the HTTP service.

Exit codes: 0 success, 1 input/usage error, 2 processing failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from invizo.template import TemplateError


class ProcessingError(Exception):
    """A run-time failure after inputs were read successfully."""


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_model(checkpoint: str | None):
    """Build (model, vocab) from a checkpoint, or fresh defaults."""
    from invizo.recognizer.checkpoint import load_checkpoint, read_manifest
    from invizo.recognizer.model import LineRecognizer, ModelConfig
    from invizo.recognizer.vocab import Vocabulary
    from invizo.synthesis.corpus import DEFAULT_CHARSET

    if checkpoint:
        manifest = read_manifest(checkpoint)
        meta = manifest.get("meta", {})
        vocab = Vocabulary.from_charset(meta.get("charset", DEFAULT_CHARSET))
        raw_cfg = dict(meta.get("model_config", {}))
        if "conv_channels" in raw_cfg:
            raw_cfg["conv_channels"] = tuple(raw_cfg["conv_channels"])
        model = LineRecognizer(ModelConfig(**raw_cfg), vocab.size)
        load_checkpoint(model, checkpoint)
    else:
        vocab = Vocabulary.from_charset(DEFAULT_CHARSET)
        model = LineRecognizer(ModelConfig(), vocab.size)
    model.eval()
    return model, vocab


def _cmd_run(args: argparse.Namespace) -> int:
    import torch

    from invizo.imaging.raster import read_image
    from invizo.pipeline import FALLBACK, PipelineConfig, run_pipeline
    from invizo.template import load_template

    config = PipelineConfig.from_env()
    seed = args.seed if args.seed is not None else config.seed
    torch.manual_seed(seed)
    template = load_template(args.template)
    image = read_image(args.image)
    model, vocab = _load_model(args.model or config.model_checkpoint)
    result = run_pipeline(image, template, model, vocab, config)
    if (
        result.registration.method == FALLBACK
        and not args.fallback_on_registration_fail
    ):
        raise ProcessingError(
            "registration failed"
            + (f": {result.registration.detail}" if result.registration.detail else "")
            + " (pass --fallback-on-registration-fail to emit unregistered"
            " predictions)"
        )
    payload = result.to_json()
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    import numpy as np

    from invizo.imaging.raster import write_image
    from invizo.synthesis import (
        AugmentSpec,
        augment,
        compose_digit_sequence,
        compose_line,
        normalize_corpus,
        render_line,
        split_dataset,
        write_manifest,
    )

    out_dir = Path(args.out)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    corpus_lines = [
        normalize_corpus(line)
        for line in Path(args.corpus).read_text(encoding="utf-8").splitlines()
    ]
    corpus_lines = [line for line in corpus_lines if line]
    if not corpus_lines:
        print("corpus contains no usable lines", file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    digit_bank = [(render_line(d, args.font), d) for d in "٠١٢٣٤٥٦٧٨٩"]
    entries: list[tuple[str, str]] = []
    for index in range(args.count):
        if rng.random() < args.digit_fraction:
            n = int(rng.integers(1, 9))
            image, label = compose_digit_sequence(digit_bank, n, rng)
        else:
            label = corpus_lines[int(rng.integers(0, len(corpus_lines)))]
            words = [render_line(w, args.font) for w in label.split(" ")]
            image = compose_line(words)
        if args.augment:
            spec = AugmentSpec(
                seed=int(rng.integers(0, 2**31)),
                background="lined" if rng.random() < 0.3 else None,
                rotation_deg=float(rng.uniform(-2.0, 2.0)),
                motion_blur_len=int(rng.choice([0, 0, 3, 5])),
                lowres_factor=float(rng.choice([1.0, 1.0, 1.5, 2.0])),
                noise_std=float(rng.uniform(0.0, 8.0)),
                salt_pepper_rate=float(rng.choice([0.0, 0.0, 0.002, 0.005])),
            )
            image = augment(image, spec)
        name = f"images/{index:06d}.png"
        write_image(image, str(out_dir / name))
        entries.append((name, label))

    write_manifest(entries, out_dir / "manifest.tsv")
    train, val, test = split_dataset(entries, seed=args.seed)
    for split_name, split in (("train", train), ("val", val), ("test", test)):
        write_manifest(split, out_dir / f"{split_name}.tsv")
    print(
        f"wrote {len(entries)} lines "
        f"({len(train)}/{len(val)}/{len(test)} train/val/test) to {out_dir}"
    )
    return 0


def _load_manifest_samples(manifest: Path):
    from invizo.imaging.raster import read_image
    from invizo.synthesis import load_manifest

    base = manifest.parent
    return [
        (read_image(str(base / rel)), label)
        for rel, label in load_manifest(manifest)
    ]


_TRAIN_CONFIG_KEYS = {
    "d_model", "n_heads", "n_encoder_layers", "n_decoder_layers", "ffn_dim",
    "dropout", "conv_channels", "input_height", "input_width", "max_len",
    "batch_size", "learning_rate", "epochs", "steps", "seed",
}

_COMPACT_OVERRIDES = {
    "d_model": 64,
    "n_heads": 4,
    "n_encoder_layers": 2,
    "n_decoder_layers": 2,
    "ffn_dim": 128,
    "dropout": 0.0,
    "conv_channels": (16, 32, 64),
    "learning_rate": 1e-3,
}


def _cmd_train(args: argparse.Namespace) -> int:
    import torch

    from invizo.recognizer.checkpoint import save_checkpoint
    from invizo.recognizer.model import LineRecognizer, ModelConfig
    from invizo.recognizer.training import (
        batch_iterator,
        make_optimizer,
        train_step,
    )
    from invizo.recognizer.vocab import Vocabulary
    from invizo.synthesis.corpus import DEFAULT_CHARSET

    overrides: dict = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(overrides, dict):
            raise ValueError("training config must be a JSON object")
        unknown = set(overrides) - _TRAIN_CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown training config keys: {sorted(unknown)}")
        if "conv_channels" in overrides:
            overrides["conv_channels"] = tuple(overrides["conv_channels"])
    if args.compact:
        overrides = {**_COMPACT_OVERRIDES, **overrides}
    steps = args.steps if args.steps is not None else int(overrides.pop("steps", 300))
    seed = args.seed if args.seed is not None else int(overrides.pop("seed", 0))
    overrides.pop("steps", None)
    overrides.pop("seed", None)

    torch.manual_seed(seed)
    samples = _load_manifest_samples(Path(args.manifest))
    if not samples:
        print("no training samples found", file=sys.stderr)
        return 1
    vocab = Vocabulary.from_charset(DEFAULT_CHARSET)
    cfg = ModelConfig(**overrides)
    model = LineRecognizer(cfg, vocab.size)
    optimizer = make_optimizer(model, cfg)
    batches = batch_iterator(samples, vocab, cfg, seed=seed)
    start = time.time()
    for step in range(1, steps + 1):
        loss = train_step(model, optimizer, *next(batches))
        if step % max(1, steps // 20) == 0 or step == 1:
            print(f"step {step:5d}  loss {loss:.4f}  {time.time()-start:6.1f}s")
    meta = {
        "charset": vocab.characters,
        "model_config": {
            "d_model": cfg.d_model,
            "n_heads": cfg.n_heads,
            "n_encoder_layers": cfg.n_encoder_layers,
            "n_decoder_layers": cfg.n_decoder_layers,
            "ffn_dim": cfg.ffn_dim,
            "dropout": cfg.dropout,
            "conv_channels": list(cfg.conv_channels),
        },
        "steps": steps,
    }
    save_checkpoint(model, args.checkpoint, meta=meta)
    print(f"saved {args.checkpoint}")
    return 0


def _read_lines(path: str) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _cmd_eval(args: argparse.Namespace) -> int:
    from invizo.enhancement import levenshtein

    refs = _read_lines(args.refs)
    hyps = _read_lines(args.hyps)
    if len(refs) != len(hyps):
        raise ValueError(
            f"line count mismatch: {len(refs)} references vs {len(hyps)}"
            " hypotheses"
        )
    if not refs:
        raise ValueError("reference file is empty")
    rows = []
    char_dist = char_len = word_dist = word_len = 0
    for index, (ref, hyp) in enumerate(zip(refs, hyps), start=1):
        if not ref.strip():
            raise ValueError(f"reference line {index} is empty")
        cd = levenshtein(ref, hyp)
        wd = levenshtein(ref.split(), hyp.split())
        char_dist += cd
        char_len += len(ref)
        word_dist += wd
        word_len += len(ref.split())
        rows.append((index, cd / len(ref), wd / len(ref.split())))
    summary = {
        "lines": len(refs),
        "cer": char_dist / char_len,
        "wer": word_dist / word_len,
    }
    if args.format == "tsv":
        print("line\tcer\twer")
        for index, line_cer, line_wer in rows:
            print(f"{index}\t{line_cer:.6f}\t{line_wer:.6f}")
        print(f"total\t{summary['cer']:.6f}\t{summary['wer']:.6f}")
    else:
        print(json.dumps(summary, indent=2))
    return 0


def _cmd_eval_model(args: argparse.Namespace) -> int:
    import torch

    from invizo.metrics import cer, wer
    from invizo.recognizer.decoding import recognize

    torch.manual_seed(0)
    model, vocab = _load_model(args.model)
    samples = _load_manifest_samples(Path(args.manifest))
    if not samples:
        print("no evaluation samples found", file=sys.stderr)
        return 1
    total_cer = total_wer = 0.0
    exact = 0
    for image, label in samples:
        text = recognize(model, vocab, image).text
        total_cer += cer(label, text)
        total_wer += wer(label, text)
        exact += int(text == label)
    n = len(samples)
    print(
        json.dumps(
            {
                "samples": n,
                "cer": total_cer / n,
                "wer": total_wer / n,
                "sequence_accuracy": exact / n,
            },
            indent=2,
        )
    )
    return 0


def _cmd_eval_det(args: argparse.Namespace) -> int:
    from invizo.metrics import detection_prf

    predicted = json.loads(Path(args.predicted).read_text(encoding="utf-8"))
    actual = json.loads(Path(args.actual).read_text(encoding="utf-8"))
    precision, recall, f1 = detection_prf(actual, predicted, args.iou)
    print(
        json.dumps(
            {"precision": precision, "recall": recall, "f1": f1}, indent=2
        )
    )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from invizo.service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="invizo",
        description="Template-driven Arabic document field recognition.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="process one document image")
    p.add_argument("--image", required=True)
    p.add_argument("--template", required=True)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--fallback-on-registration-fail",
        action="store_true",
        help="emit unregistered (flagged) predictions instead of failing",
    )
    p.add_argument("--model", default=None, help="checkpoint path")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("synth", help="generate a synthetic line dataset")
    p.add_argument("--corpus", required=True, help="text file, one line per entry")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--font", default=None)
    p.add_argument("--digit-fraction", type=float, default=0.3)
    p.add_argument("--augment", action="store_true")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train the recognizer")
    p.add_argument("--manifest", required=True, help="TSV of image paths/labels")
    p.add_argument("--checkpoint", required=True, help="checkpoint output path")
    p.add_argument("--config", default=None, help="JSON architecture overrides")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--compact",
        action="store_true",
        help="small architecture that trains quickly on one CPU",
    )
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="CER/WER between two parallel text files")
    p.add_argument("--refs", required=True, help="reference lines")
    p.add_argument("--hyps", required=True, help="hypothesis lines")
    p.add_argument("--format", default="json", choices=("json", "tsv"))
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("eval-model", help="error rates on a manifest dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=_cmd_eval_model)

    p = sub.add_parser("eval-det", help="detection precision/recall/F1")
    p.add_argument("--predicted", required=True, help="JSON list of quads")
    p.add_argument("--actual", required=True, help="JSON list of quads")
    p.add_argument("--iou", type=float, default=0.5)
    p.set_defaults(func=_cmd_eval_det)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 2
    except (
        FileNotFoundError,
        IsADirectoryError,
        PermissionError,
        NotADirectoryError,
        json.JSONDecodeError,
        TemplateError,
        ValueError,
        KeyError,
        TypeError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ProcessingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # any other run-time failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
