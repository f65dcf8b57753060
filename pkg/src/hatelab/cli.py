"""Command-line front end.

Three batch commands tie the library together:

``hatelab preprocess``   normalize a labeled CSV, adding a tokens column
``hatelab experiment``   run k-fold cross-validation from a JSON spec
``hatelab compare``      bootstrap significance test between two reports

Every command is deterministic for a fixed seed: artifacts carry no
timestamps, so rerunning a spec reproduces the same bytes.  Output files
are never overwritten unless --force is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .checkpoint import load_checkpoint, save_checkpoint
from .data import Dataset, Document, load_dataset_csv, write_dataset_csv
from .encoding import build_vocab, load_embedding_file
from .evaluate import run_cv
from .models import ModelConfig, build_model, encode_dataset, train_model
from .report import (
    load_report,
    report_from_cv,
    system_folds_from_report,
    write_report,
)
from .significance import bootstrap_compare
from .text_pipeline import PreprocessStats, load_tables, preprocess_with_stats


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


# --- preprocess ---

def cmd_preprocess(args: argparse.Namespace) -> int:
    try:
        dataset = load_dataset_csv(
            args.input,
            text_column=args.text_column,
            label_column=args.label_column,
            id_column=args.id_column,
        )
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    try:
        tables = load_tables(args.fixtures)
    except (OSError, ValueError) as exc:
        return _fail(f"cannot load fixtures: {exc}")

    output = Path(args.output)
    if output.exists() and not args.force:
        return _fail(f"{output} exists; pass --force to overwrite")

    totals = PreprocessStats()
    token_column = []
    for doc in dataset.documents:
        tokens, stats = preprocess_with_stats(doc.text, tables)
        totals.merge(stats)
        token_column.append(" ".join(tokens))

    write_dataset_csv(dataset, output, extra={"tokens": token_column})
    print(f"rows written: {len(dataset)}")
    print(f"hashtags segmented: {totals.hashtags_segmented}")
    print(f"emoticons mapped: {totals.emoticons_mapped}")
    print(f"contractions expanded: {totals.contractions_expanded}")
    return 0


# --- experiment ---

_SPEC_KEYS = {
    "name", "dataset", "output_dir", "seed", "model", "k_folds",
    "preprocess", "fixtures", "text_column", "label_column", "id_column",
}
_MODEL_KEYS = {f.name for f in dataclasses.fields(ModelConfig)}


def validate_spec(spec: dict) -> list[str]:
    """Return every schema violation found (empty list when valid)."""
    problems = []
    if not isinstance(spec, dict):
        return ["spec must be a JSON object"]
    for key in sorted(set(spec) - _SPEC_KEYS):
        problems.append(f"unknown key {key!r}")
    for key in ("dataset", "output_dir", "model"):
        if key not in spec:
            problems.append(f"missing required key {key!r}")
    if "seed" not in spec:
        problems.append("missing required key 'seed' (no wall-clock seeding)")
    elif not isinstance(spec["seed"], int) or isinstance(spec["seed"], bool):
        problems.append("'seed' must be an integer")
    if "dataset" in spec and not Path(str(spec["dataset"])).exists():
        problems.append(f"dataset file not found: {spec['dataset']}")
    if "fixtures" in spec and not Path(str(spec["fixtures"])).is_dir():
        problems.append(f"fixtures directory not found: {spec['fixtures']}")
    k_folds = spec.get("k_folds", 5)
    if not isinstance(k_folds, int) or isinstance(k_folds, bool) or k_folds < 2:
        problems.append("'k_folds' must be an integer >= 2")
    if "preprocess" in spec and not isinstance(spec["preprocess"], bool):
        problems.append("'preprocess' must be true or false")

    model = spec.get("model")
    if model is not None:
        if not isinstance(model, dict):
            problems.append("'model' must be a JSON object")
        else:
            for key in sorted(set(model) - _MODEL_KEYS):
                problems.append(f"unknown model key {key!r}")
            if "arch" not in model:
                problems.append("missing model key 'arch'")
            else:
                # class count comes from the dataset later; use a stand-in
                # so the remaining field validations can run now
                trial = dict(model)
                trial.setdefault("k", 2)
                try:
                    cfg = ModelConfig(**{
                        k: _listify(v) for k, v in trial.items() if k in _MODEL_KEYS
                    })
                except (TypeError, ValueError) as exc:
                    problems.append(f"model: {exc}")
                else:
                    path = cfg.embedding_path
                    if path is not None and not Path(path).exists():
                        problems.append(f"embedding file not found: {path}")
    return problems


def _listify(value):
    # JSON has no tuples; ModelConfig.windows wants one
    return tuple(value) if isinstance(value, list) else value


def _apply_preprocess(dataset: Dataset, fixtures) -> Dataset:
    tables = load_tables(fixtures)
    documents = tuple(
        Document(doc.doc_id, " ".join(preprocess_with_stats(doc.text, tables)[0]),
                 doc.label)
        for doc in dataset.documents
    )
    return Dataset(documents, dataset.label_names)


def cmd_experiment(args: argparse.Namespace) -> int:
    try:
        with open(args.spec, encoding="utf-8") as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(f"cannot read spec: {exc}")

    problems = validate_spec(spec)
    if problems:
        for problem in problems:
            print(f"spec error: {problem}", file=sys.stderr)
        return 1

    outdir = Path(spec["output_dir"])
    ckpt_path = outdir / "model.ckpt"
    if not args.force:
        blockers = [p for p in [outdir / "report.json", ckpt_path] if p.exists()]
        if blockers:
            return _fail(
                f"{[str(p) for p in blockers]} exist; pass --force to overwrite"
            )

    try:
        dataset = load_dataset_csv(
            spec["dataset"],
            text_column=spec.get("text_column", "text"),
            label_column=spec.get("label_column", "label"),
            id_column=spec.get("id_column", "id"),
        )
        if spec.get("preprocess", False):
            dataset = _apply_preprocess(dataset, spec.get("fixtures"))
        model_fields = {k: _listify(v) for k, v in spec["model"].items()}
        model_fields.setdefault("k", dataset.k)
        config = ModelConfig(**model_fields)

        pretrained = None
        if config.embedding_path is not None:
            pretrained = load_embedding_file(config.embedding_path)
            dim = len(next(iter(pretrained.values())))
            if dim != config.embedding_dim:
                return _fail(
                    f"embedding file is {dim}-dimensional but the model "
                    f"wants {config.embedding_dim}"
                )

        seed = spec["seed"]
        k_folds = spec.get("k_folds", 5)
        cv = run_cv(config, dataset, k=k_folds, seed=seed, jobs=args.jobs,
                    pretrained=pretrained)

        # final model trained on the full dataset, for later prediction
        vocab = build_vocab([d.text.split() for d in dataset.documents]) \
            if config.uses_words else None
        model = build_model(config, vocab, dataset.label_names,
                            pretrained=pretrained, seed=[seed, k_folds])
        train_model(model, encode_dataset(dataset, vocab, config),
                    seed=[seed, k_folds])

        name = spec.get("name", config.arch)
        report = report_from_cv(name, config, cv, seed)
        write_report(outdir, report, force=args.force)
        save_checkpoint(model, ckpt_path)

        # trust nothing until it reads back
        written = load_report(outdir / "report.json")
        if len(written["folds"]) != k_folds:
            return _fail("report readback has wrong fold count")
        load_checkpoint(ckpt_path)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    print(f"system: {report['system']}")
    print(f"mean accuracy: {report['mean_accuracy']:.4f}")
    print(f"weighted F1 (fold mean): {report['mean_weighted_f1']:.4f}")
    print(f"weighted F1 (pooled): {report['pooled_weighted_f1']:.4f}")
    print(f"wrote: {outdir}")
    return 0


# --- compare ---

def cmd_compare(args: argparse.Namespace) -> int:
    try:
        report_a = load_report(args.a)
        report_b = load_report(args.b)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))

    output = Path(args.output)
    if output.exists() and not args.force:
        return _fail(f"{output} exists; pass --force to overwrite")

    try:
        result = bootstrap_compare(
            system_folds_from_report(report_a),
            system_folds_from_report(report_b),
            subset_size=args.subset,
        )
    except ValueError as exc:
        return _fail(str(exc))

    payload = result.to_dict()
    payload.update({
        "a": report_a["system"],
        "b": report_b["system"],
        "subset_size": args.subset,
    })
    output.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                      encoding="utf-8")
    print(f"full-data winner: {result.full_winner}")
    print(f"p-value: {result.p_value}")
    print(f"subsets where the winner flips: "
          f"{result.disagreements} of {result.subset_count}")
    return 0


# --- argument wiring ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hatelab",
        description="Text-classification experiments: preprocess, train, compare.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="tokenize a labeled CSV")
    p.add_argument("--input", required=True, help="input CSV path")
    p.add_argument("--output", required=True, help="output CSV path")
    p.add_argument("--fixtures", default=None,
                   help="fixture table directory (default: bundled, or "
                        "HATELAB_FIXTURES)")
    p.add_argument("--text-column", default="text")
    p.add_argument("--label-column", default="label")
    p.add_argument("--id-column", default="id")
    p.add_argument("--force", action="store_true", help="overwrite output")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("experiment", help="run cross-validation from a JSON spec")
    p.add_argument("--spec", required=True, help="experiment spec JSON path")
    p.add_argument("--jobs", type=int, default=1,
                   help="fold-level worker processes (default 1)")
    p.add_argument("--force", action="store_true", help="overwrite outputs")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("compare", help="bootstrap test between two reports")
    p.add_argument("--a", required=True, help="first report.json")
    p.add_argument("--b", required=True, help="second report.json")
    p.add_argument("--subset", type=int, default=3,
                   help="folds per bootstrap subset (default 3)")
    p.add_argument("--output", default="comparison.json",
                   help="comparison JSON path")
    p.add_argument("--force", action="store_true", help="overwrite output")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
