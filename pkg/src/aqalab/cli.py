"""Command-line entry point wiring the whole pipeline together.

One binary with subcommands: forge, compose, stats, train, sample, eval,
ablate, noise-probe, hallucination-report, smoke. Every run writes a
run_manifest.json with the resolved settings and code version into its
output directory. A YAML config file, when given, OVERRIDES command-line
flags (the file is the durable record; flags are ad-hoc). The only
environment variable consulted is the LLM auth token named in the client
config.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import subprocess
import sys
from dataclasses import asdict
from pathlib import Path

import yaml

from . import __version__
from .audio import MelConfig
from .data import SOURCE_TAGS, DatasetManifest, QAQuadruple
from .encoder import ENCODER_KINDS, EncoderConfig
from .errors import AqaLabError, ConfigError, DataError
from .evaluation import (
    evaluate_predictions,
    hallucination_report,
    load_predictions,
    noise_ablation,
    save_predictions,
)
from .forge import (
    ClientConfig,
    extract_options,
    HttpLLMClient,
    MockLLMClient,
    composition_report,
    compose_splits,
    compute_stats,
    get_template,
    parse_qa,
    run_generation,
)
from .lm import LMConfig
from .lora import LoraConfig
from .mapper import MapperConfig
from .pipeline import AlmPipeline
from .sampling import SamplerConfig, generate
from .tokenizer import Tokenizer, train_tokenizer
from .toydata import write_toy_audio
from .trainer import TrainConfig, train

# the CLI speaks "transformer"; the mapper calls that projection
# "transformer_const" internally
PROJECTION_FLAGS = {
    "linear": "linear",
    "nonlinear": "nonlinear",
    "transformer": "transformer_const",
}


# ---- config plumbing ----


def load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    raw = Path(path).read_text(encoding="utf-8")
    loaded = yaml.safe_load(raw)
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigError(f"{path}: config root must be a mapping")
    return loaded


def resolve_section(config: dict, section: str, flag_values: dict) -> dict:
    """Merge one config-file section over flag-derived values (file wins)."""
    merged = dict(flag_values)
    overrides = config.get(section) or {}
    if not isinstance(overrides, dict):
        raise ConfigError(f"config section {section!r} must be a mapping")
    merged.update(overrides)
    return merged


def code_version() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"pkg-{__version__}"


def write_run_manifest(out_dir: Path, command: str, resolved: dict,
                       seed: int | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "resolved_config": resolved,
        "seed": seed,
        "code_version": code_version(),
        "package_version": __version__,
    }
    (out_dir / "run_manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8")


# ---- shared model construction ----


def build_pipeline(config: dict, rows: list[QAQuadruple], mode: str,
                   projection: str, seed: int) -> AlmPipeline:
    """Fresh pipeline: tokenizer trained on the manifest text, then the
    model stack from the config sections (config file overrides flags)."""
    tok_cfg = resolve_section(config, "tokenizer", {"n_merges": 64})
    texts = [r.question for r in rows] + [r.answer for r in rows]
    tokenizer = train_tokenizer(texts, n_merges=int(tok_cfg["n_merges"]))

    mel = MelConfig(**resolve_section(config, "mel", {}))
    encoder = EncoderConfig(**resolve_section(config, "encoder", {
        "kind": "toy_conv", "n_classes": 8, "latent_dim": 16,
        "depth": 2, "width": 16}))
    mapper = MapperConfig(**resolve_section(config, "mapper", {
        "projection_kind": PROJECTION_FLAGS[projection], "d_model": 32}))
    lm_section = resolve_section(config, "lm", {
        "n_layers": 2, "d_model": 32, "n_heads": 2, "max_seq_len": 256})
    lm_section["vocab_size"] = tokenizer.vocab_size
    lm_section.setdefault("mode", mode)
    lm = LMConfig(**lm_section)
    lora = None
    if mode == "lora":
        lora_section = resolve_section(config, "lora", {})
        if "targets" in lora_section:
            lora_section["targets"] = tuple(lora_section["targets"])
        lora = LoraConfig(**lora_section)
    return AlmPipeline.build(mel, encoder, mapper, lm, tokenizer,
                             seed=seed, lora_config=lora)


def sampler_from(config: dict, flag_values: dict) -> SamplerConfig:
    return SamplerConfig(**resolve_section(config, "sampler", flag_values))


def _generate_predictions(pipeline: AlmPipeline, rows: list[QAQuadruple],
                          sampler: SamplerConfig) -> list[str]:
    texts = []
    for row in rows:
        prefix = pipeline.prefix_for_prompt(row.audio1_id,
                                            row.audio2_id or None,
                                            row.question)
        texts.append(generate(prefix, pipeline.lm, pipeline.tokenizer,
                              sampler).text)
    return texts


# ---- forge ----


def read_captions_csv(path: str) -> list[tuple[str, str]]:
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        for record in csv.reader(f):
            if not record or not any(cell.strip() for cell in record):
                continue
            if record[0].strip() == "id" and len(rows) == 0:
                continue  # header
            if len(record) < 2:
                raise DataError(f"{path}: caption row needs id,caption: {record}")
            rows.append((record[0].strip(), record[1].strip()))
    if not rows:
        raise DataError(f"{path}: no captions found")
    return rows


def mock_transcript(caption: str, kind: str) -> str:
    """Deterministic stand-in for an LLM completion, grounded in the caption."""
    if kind == "mcq":
        return (
            f"Q: What is the primary sound event present in the clip? "
            f"A) {caption} B) total silence C) a ringing phone D) heavy rain\n"
            f"A: A) {caption}\n"
            f"Q: How does the sound level behave in the clip? "
            f"A) it stays steady B) it jumps around wildly "
            f"C) it fades to nothing D) it cuts out badly\n"
            f"A: A) it stays steady\n"
            f"Q: Which description fits the recording best? "
            f"A) {caption} B) a crowd cheering C) breaking glass D) a barking dog\n"
            f"A: A) {caption}\n"
            f"Q: How many distinct sound sources dominate the clip? "
            f"A) one B) two C) three D) four\n"
            f"A: A) one\n"
            f"Q: What should a listener expect to hear in the clip? "
            f"A) {caption} B) applause C) a siren D) footsteps\n"
            f"A: A) {caption}\n"
        )
    return (
        f"Q: What is happening in the clip?\n"
        f"A: In this clip, {caption}.\n"
        f"Q: What is the primary sound event present in the clip?\n"
        f"A: The primary sound event in the clip is {caption}.\n"
        f"Q: How would you describe the character of this sound?\n"
        f"A: The sound in the recording is steady and clearly audible throughout.\n"
        f"Q: Does the sound change over the course of the recording?\n"
        f"A: The sound stays consistent from the start of the clip to its end.\n"
        f"Q: What is the overall scene in this recording likely to be?\n"
        f"A: The recording suggests a simple scene in which {caption}.\n"
    )


def cmd_forge(args: argparse.Namespace) -> int:
    config = load_config_file(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    captions = read_captions_csv(args.captions)
    data_type = f"type{args.type}"
    template = get_template(data_type, args.kind)

    client_cfg = ClientConfig(**resolve_section(config, "client", {
        "endpoint": args.endpoint or "",
        "model": args.model,
        "max_concurrency": args.max_concurrency,
    }))
    if client_cfg.endpoint:
        client = HttpLLMClient(client_cfg)
    else:
        transcripts = {text: mock_transcript(text, args.kind)
                       for _, text in captions}
        if args.transcripts:
            canned = json.loads(Path(args.transcripts).read_text(encoding="utf-8"))
            transcripts.update(canned)
        client = MockLLMClient(transcripts)

    log_path = out_dir / "generation_log.jsonl"
    outcomes = run_generation(captions, template, client, client_cfg,
                              str(log_path))

    task = f"synth_{args.kind}"
    accepted_rows: list[QAQuadruple] = []
    reject_counts: dict[str, int] = {}
    failed = 0
    for caption_id, _ in captions:
        outcome = outcomes[caption_id]
        if outcome.status != "ok":
            failed += 1
            continue
        accepted, rejected = parse_qa(outcome.transcript, args.kind,
                                      template.questions_per_call)
        for question, answer in accepted:
            accepted_rows.append(QAQuadruple(
                audio1_id=caption_id, audio2_id="", question=question,
                answer=answer, task=task, source=data_type))
        for reject in rejected:
            reject_counts[reject.reason] = reject_counts.get(reject.reason, 0) + 1

    rows_path = out_dir / "rows.jsonl"
    DatasetManifest(split="train", rows=accepted_rows).save(str(rows_path))
    write_run_manifest(out_dir, "forge", {
        "captions": args.captions, "data_type": data_type, "kind": args.kind,
        "client": asdict(client_cfg), "n_captions": len(captions),
    })
    print(f"captions: {len(captions)} (failed: {failed})")
    print(f"accepted pairs: {len(accepted_rows)} -> {rows_path}")
    for reason in sorted(reject_counts):
        print(f"rejected[{reason}]: {reject_counts[reason]}")
    print(f"generation log: {log_path}")
    return 0


# ---- compose ----


def cmd_compose(args: argparse.Namespace) -> int:
    config = load_config_file(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[QAQuadruple] = []
    for path in args.rows:
        rows.extend(DatasetManifest.load(path).rows)
    fractions = resolve_section(config, "splits", {
        "train": args.train, "val": args.val, "test": args.test})
    manifests = compose_splits(rows, fractions, seed=args.seed)
    for split, manifest in manifests.items():
        manifest.save(str(out_dir / f"{split}.jsonl"))

    subset_counts: dict[str, int] = {}
    subset_groups: dict[str, str] = {}
    for row in rows:
        key = f"{row.source}/{row.task}"
        subset_counts[key] = subset_counts.get(key, 0) + 1
        subset_groups[key] = ("existing" if row.source == "existing"
                              else "synthetic")
    report = composition_report(subset_counts, subset_groups)
    report_text = "\n".join(report.lines()) + "\n"
    (out_dir / "composition.txt").write_text(report_text, encoding="utf-8")
    write_run_manifest(out_dir, "compose",
                       {"rows": list(args.rows), "fractions": fractions},
                       seed=args.seed)
    for split, manifest in manifests.items():
        print(f"{split}: {len(manifest.rows)} rows")
    print(report_text, end="")
    return 0


# ---- stats ----


def cmd_stats(args: argparse.Namespace) -> int:
    rows = DatasetManifest.load(args.manifest).rows
    stats = compute_stats(rows, top_k=args.top_k)
    text = "\n".join(stats.lines()) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


# ---- train ----


def cmd_train(args: argparse.Namespace) -> int:
    config = load_config_file(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = DatasetManifest.load(args.manifest).rows
    pipeline = build_pipeline(config, rows, args.mode, args.projection,
                              args.seed)
    train_cfg = TrainConfig(**resolve_section(config, "train", {
        "max_lr": args.max_lr, "epochs": args.epochs,
        "batch_size": args.batch_size, "seed": args.seed, "mode": args.mode,
        "checkpoint_dir": str(out_dir),
    }))
    state = train(rows, pipeline, train_cfg)
    model_path = out_dir / "model.pt"
    pipeline.save(str(model_path))
    write_run_manifest(out_dir, "train", {
        "manifest": args.manifest, "mode": args.mode,
        "projection": args.projection, "train": asdict(train_cfg),
        "lm": asdict(pipeline.lm.config),
        "mapper": asdict(pipeline.mapper.config),
        "encoder": asdict(pipeline.encoder.config),
    }, seed=args.seed)
    print(f"rows: {len(rows)}  steps: {state.step}  epochs: {train_cfg.epochs}")
    print(f"final epoch mean loss: {state.epoch_mean_losses[-1]:.6f}")
    print(f"checkpoint: {model_path}")
    return 0


# ---- sample ----


def cmd_sample(args: argparse.Namespace) -> int:
    config = load_config_file(args.config)
    pipeline = AlmPipeline.load(args.checkpoint)
    sampler = sampler_from(config, {
        "top_p": args.top_p, "temperature": args.temperature,
        "max_new_tokens": args.max_new_tokens, "seed": args.seed,
        "greedy": args.greedy})
    prefix = pipeline.prefix_for_prompt(args.audio1, args.audio2, args.prompt)
    result = generate(prefix, pipeline.lm, pipeline.tokenizer, sampler)
    print(result.text)
    print(f"[stop: {result.stop_reason}; {len(result.token_ids)} tokens]",
          file=sys.stderr)
    return 0


# ---- eval ----


def cmd_eval(args: argparse.Namespace) -> int:
    config = load_config_file(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = DatasetManifest.load(args.manifest).rows
    if args.predictions:
        predictions = load_predictions(args.predictions)
    else:
        pipeline = AlmPipeline.load(args.checkpoint)
        sampler = sampler_from(config, {
            "greedy": True, "max_new_tokens": args.max_new_tokens,
            "seed": args.seed})
        generated = _generate_predictions(pipeline, rows, sampler)
        predictions_path = out_dir / "predictions.jsonl"
        save_predictions(str(predictions_path), rows, generated)
        predictions = load_predictions(str(predictions_path))
    report = evaluate_predictions(rows, predictions)
    report_path = out_dir / "report.txt"
    report.save(str(report_path))
    write_run_manifest(out_dir, "eval", {
        "manifest": args.manifest, "checkpoint": args.checkpoint,
        "predictions": args.predictions}, seed=args.seed)
    print(report.render(), end="")
    print(f"report: {report_path}")
    return 0


# ---- ablate ----


def cmd_ablate(args: argparse.Namespace) -> int:
    config = load_config_file(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = DatasetManifest.load(args.manifest).rows

    projections = [p.strip() for p in args.projections.split(",") if p.strip()]
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    encoders = [e.strip() for e in args.encoders.split(",") if e.strip()]
    mixtures = [m.strip() for m in args.mixtures.split(",") if m.strip()]
    for projection in projections:
        if projection not in PROJECTION_FLAGS:
            raise ConfigError(f"unknown projection {projection!r}")
    for encoder_kind in encoders:
        if encoder_kind not in ENCODER_KINDS:
            raise ConfigError(f"unknown encoder kind {encoder_kind!r}")

    cells = list(itertools.product(projections, modes, encoders, mixtures))
    results = []
    for projection, mode, encoder_kind, mixture in cells:
        cell_name = f"{projection}_{mode}_{encoder_kind}_{mixture}"
        cell_path = out_dir / f"cell_{cell_name}.json"
        if cell_path.exists():
            results.append(json.loads(cell_path.read_text(encoding="utf-8")))
            print(f"cell {cell_name}: cached")
            continue
        if mixture == "all":
            cell_rows = rows
        else:
            wanted = set(mixture.split("+"))
            unknown = wanted - set(SOURCE_TAGS)
            if unknown:
                raise ConfigError(f"unknown sources in mixture: {sorted(unknown)}")
            cell_rows = [r for r in rows if r.source in wanted]
        if not cell_rows:
            raise DataError(f"mixture {mixture!r} selects no rows")
        cell_config = dict(config)
        cell_config.setdefault("encoder", {})
        cell_config["encoder"] = {**cell_config["encoder"], "kind": encoder_kind}
        pipeline = build_pipeline(cell_config, cell_rows, mode, projection,
                                  args.seed)
        train_cfg = TrainConfig(**resolve_section(config, "train", {
            "max_lr": args.max_lr, "epochs": args.epochs,
            "batch_size": args.batch_size, "seed": args.seed, "mode": mode}))
        state = train(cell_rows, pipeline, train_cfg)
        sampler = SamplerConfig(greedy=True, max_new_tokens=args.max_new_tokens)
        generated = _generate_predictions(pipeline, cell_rows, sampler)
        predictions = {f"{i:06d}": g for i, g in enumerate(generated)}
        report = evaluate_predictions(cell_rows, predictions)
        row = {
            "projection": projection, "mode": mode, "encoder": encoder_kind,
            "mixture": mixture, "rows": len(cell_rows),
            "final_loss": state.epoch_mean_losses[-1],
            "accuracy": report.accuracy, "exact_match": report.exact_match,
            "bleu4": report.bleu4,
        }
        cell_path.write_text(json.dumps(row, sort_keys=True) + "\n",
                             encoding="utf-8")
        results.append(row)
        print(f"cell {cell_name}: loss {row['final_loss']:.4f} "
              f"exact {row['exact_match']:.3f}")

    results.sort(key=lambda r: (r["projection"], r["mode"], r["encoder"],
                                r["mixture"]))
    table_path = out_dir / "table.csv"
    columns = ["projection", "mode", "encoder", "mixture", "rows",
               "final_loss", "accuracy", "exact_match", "bleu4"]
    with open(table_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=columns)
        writer.writeheader()
        for row in results:
            writer.writerow({k: row[k] for k in columns})
    write_run_manifest(out_dir, "ablate", {
        "manifest": args.manifest, "projections": projections, "modes": modes,
        "encoders": encoders, "mixtures": mixtures, "epochs": args.epochs,
    }, seed=args.seed)
    print(f"table: {table_path} ({len(results)} rows)")
    return 0


# ---- noise probe ----


def cmd_noise_probe(args: argparse.Namespace) -> int:
    config = load_config_file(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    all_rows = DatasetManifest.load(args.manifest).rows
    rows = [r for r in all_rows if len(extract_options(r.question)) >= 2]
    if len(rows) < len(all_rows):
        print(f"skipping {len(all_rows) - len(rows)} open-ended rows")
    if not rows:
        raise DataError(f"{args.manifest}: no closed-ended rows to probe")
    pipeline = AlmPipeline.load(args.checkpoint)
    sampler = sampler_from(config, {
        "greedy": True, "max_new_tokens": args.max_new_tokens,
        "seed": args.seed})
    result = noise_ablation(pipeline, rows, sampler, seed=args.seed)
    (out_dir / "noise_probe.txt").write_text(result.render(), encoding="utf-8")
    write_run_manifest(out_dir, "noise-probe", {
        "manifest": args.manifest, "checkpoint": args.checkpoint},
        seed=args.seed)
    print(result.render(), end="")
    return 0


# ---- hallucination report ----


def cmd_hallucination(args: argparse.Namespace) -> int:
    config = load_config_file(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pipeline = AlmPipeline.load(args.checkpoint)
    if args.generated is not None:
        text = args.generated
    else:
        sampler = sampler_from(config, {
            "greedy": True, "max_new_tokens": args.max_new_tokens,
            "seed": args.seed})
        prefix = pipeline.prefix_for_prompt(args.audio1, None, args.prompt)
        text = generate(prefix, pipeline.lm, pipeline.tokenizer, sampler).text
    report = hallucination_report(args.audio1, text, pipeline.encoder,
                                  pipeline.mel_config, top_k=args.top_k)
    report_path = out_dir / "hallucination.json"
    report.save(str(report_path))
    write_run_manifest(out_dir, "hallucination-report", {
        "checkpoint": args.checkpoint, "audio1": args.audio1,
        "prompt": args.prompt}, seed=args.seed)
    names = report.timeline.class_names
    top = ", ".join(names[i] for i in report.timeline.top_k)
    print(f"generated: {text}")
    print(f"top classes: {top}")
    print(f"report: {report_path}")
    return 0


# ---- smoke ----


TOY_CAPTIONS = {
    "low hum": "a deep steady hum drones on",
    "mid tone": "a clear mid tone rings steadily",
    "high whistle": "a thin high whistle holds its pitch",
    "rising sweep": "a tone sweeps steadily upward in pitch",
}


def cmd_smoke(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stage = "corpus"
    try:
        if args.corpus_dir:
            corpus_dir = Path(args.corpus_dir)
            if not corpus_dir.is_dir():
                raise DataError(f"missing corpus directory: {corpus_dir}")
            from .toydata import TOY_CLASSES, ToyClip
            wavs = sorted(corpus_dir.glob("*.wav"))
            if not wavs:
                raise DataError(f"no wav files in corpus directory: {corpus_dir}")
            clips = []
            for path in wavs:
                for idx, name in enumerate(TOY_CLASSES):
                    if name.replace(" ", "_") in path.stem or f"_c{idx}_" in path.stem:
                        clips.append(ToyClip(path=str(path), class_idx=idx))
                        break
            if not clips:
                raise DataError(
                    f"no recognizable toy clips in corpus directory: {corpus_dir}")
        else:
            clips = write_toy_audio(str(out_dir / "corpus"),
                                    per_class=args.per_class, seed=args.seed)

        stage = "forge"
        captions_path = out_dir / "captions.csv"
        with open(captions_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["id", "caption"])
            for clip in clips:
                writer.writerow([clip.path, TOY_CAPTIONS[clip.class_name]])
        forge_rows: list[str] = []
        for kind in ("mcq", "detail"):
            forge_args = argparse.Namespace(
                config=None, out_dir=str(out_dir / f"forge_{kind}"),
                captions=str(captions_path), type=1, kind=kind,
                endpoint="", model="mock", max_concurrency=4, transcripts=None)
            cmd_forge(forge_args)
            forge_rows.append(str(out_dir / f"forge_{kind}" / "rows.jsonl"))

        stage = "compose"
        compose_args = argparse.Namespace(
            config=None, out_dir=str(out_dir / "splits"), rows=forge_rows,
            train=0.8, val=0.1, test=0.1, seed=args.seed)
        cmd_compose(compose_args)
        train_manifest = str(out_dir / "splits" / "train.jsonl")

        stage = "train"
        train_args = argparse.Namespace(
            config=None, out_dir=str(out_dir / "train"),
            manifest=train_manifest, mode="full", projection="linear",
            seed=args.seed, max_lr=1e-3, epochs=2, batch_size=8)
        cmd_train(train_args)
        checkpoint = str(out_dir / "train" / "model.pt")

        stage = "sample"
        first_row = DatasetManifest.load(train_manifest).rows[0]
        sample_args = argparse.Namespace(
            config=None, checkpoint=checkpoint, audio1=first_row.audio1_id,
            audio2=None, prompt=first_row.question, greedy=True,
            top_p=0.8, temperature=1.0, max_new_tokens=args.max_new_tokens,
            seed=args.seed)
        cmd_sample(sample_args)

        stage = "eval"
        eval_args = argparse.Namespace(
            config=None, out_dir=str(out_dir / "eval"),
            manifest=train_manifest, checkpoint=checkpoint, predictions=None,
            max_new_tokens=args.max_new_tokens, seed=args.seed)
        cmd_eval(eval_args)
    except Exception as exc:
        print(f"smoke failed at stage {stage}: {exc}", file=sys.stderr)
        raise
    write_run_manifest(out_dir, "smoke", {"per_class": args.per_class},
                       seed=args.seed)
    print(f"smoke ok: report at {out_dir / 'eval' / 'report.txt'}")
    return 0


# ---- parser ----


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aqalab",
        description="Audio question answering at desk scale: data forge, "
                    "prefix-conditioned LM training, and evaluation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default):
        p.add_argument("--config", default=None,
                       help="YAML config; values in the file OVERRIDE flags")
        p.add_argument("--out-dir", default=out_default,
                       help="output directory for this run")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("forge", help="generate QA pairs from captions")
    common(p, "runs/forge")
    p.add_argument("--captions", required=True, help="CSV of id,caption rows")
    p.add_argument("--type", type=int, choices=(1, 2, 3), required=True,
                   help="data generation flavor")
    p.add_argument("--kind", choices=("detail", "mcq"), required=True)
    p.add_argument("--endpoint", default="",
                   help="LLM chat endpoint; empty = offline mock client")
    p.add_argument("--model", default="mock")
    p.add_argument("--max-concurrency", type=int, default=4)
    p.add_argument("--transcripts", default=None,
                   help="JSON file caption->transcript for the mock client")
    p.set_defaults(func=cmd_forge)

    p = sub.add_parser("compose", help="split rows into train/val/test")
    common(p, "runs/compose")
    p.add_argument("--rows", nargs="+", required=True,
                   help="row manifest JSONL files to pool")
    p.add_argument("--train", type=float, default=0.8)
    p.add_argument("--val", type=float, default=0.1)
    p.add_argument("--test", type=float, default=0.1)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("stats", help="corpus statistics for a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train the audio-conditioned LM")
    common(p, "runs/train")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("frozen", "lora", "full"),
                   default="full")
    p.add_argument("--projection",
                   choices=("linear", "nonlinear", "transformer"),
                   default="linear")
    p.add_argument("--max-lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--batch-size", type=int, default=8)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="generate text from a checkpoint")
    p.add_argument("--config", default=None,
                   help="YAML config; values in the file OVERRIDE flags")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--audio1", required=True)
    p.add_argument("--audio2", default=None)
    p.add_argument("--prompt", required=True)
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--top-p", type=float, default=0.8)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--max-new-tokens", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="score a checkpoint on a manifest")
    common(p, "runs/eval")
    p.add_argument("--manifest", required=True)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--predictions", default=None,
                   help="existing predictions JSONL; skips generation")
    p.add_argument("--max-new-tokens", type=int, default=64)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="cross-product ablation on a manifest")
    common(p, "runs/ablate")
    p.add_argument("--manifest", required=True)
    p.add_argument("--projections", default="linear,nonlinear,transformer")
    p.add_argument("--modes", default="frozen,full")
    p.add_argument("--encoders", default="toy_conv")
    p.add_argument("--mixtures", default="all",
                   help="comma list; each entry 'all' or '+'-joined source tags")
    p.add_argument("--max-lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--max-new-tokens", type=int, default=24)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("noise-probe", help="real-vs-noise accuracy delta")
    common(p, "runs/noise_probe")
    p.add_argument("--manifest", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--max-new-tokens", type=int, default=24)
    p.set_defaults(func=cmd_noise_probe)

    p = sub.add_parser("hallucination-report",
                       help="evidence bundle for one generation")
    common(p, "runs/hallucination")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--audio1", required=True)
    p.add_argument("--prompt", default="Describe the audio.")
    p.add_argument("--generated", default=None,
                   help="use this text instead of sampling from the model")
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--max-new-tokens", type=int, default=48)
    p.set_defaults(func=cmd_hallucination)

    p = sub.add_parser("smoke", help="tiny end-to-end run: forge to eval")
    common(p, "runs/smoke")
    p.add_argument("--corpus-dir", default=None,
                   help="use existing toy wavs instead of generating them")
    p.add_argument("--per-class", type=int, default=2)
    p.add_argument("--max-new-tokens", type=int, default=24)
    p.set_defaults(func=cmd_smoke)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AqaLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
