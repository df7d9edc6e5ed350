"""Command-line entry point: codec utilities, data tools, training, eval, serving.

Exit codes: 0 success, 1 domain error (bad codes, bad data, bad config),
2 usage error.  Results go to stdout, diagnostics to stderr.  Every
subcommand is scriptable; only ``annotate --interactive`` prompts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

from . import data as data_mod
from . import embedding as emb
from . import evaluation as ev
from . import taxonomy as tx
from . import verbmodel as vm
from .config import ConfigError, RunConfig, config_hash, load_run_config
from .nn import NNError


class CliError(Exception):
    """Domain error already formatted for the user."""


def _describe(code: tx.MotionCode) -> str:
    inter = code.interaction
    if inter.contact:
        eng = "soft" if inter.engagement is tx.Engagement.SOFT else "rigid"
        dur = (
            "continuous"
            if inter.duration is tx.ContactDuration.CONTINUOUS
            else "discontinuous"
        )
        inter_text = f"contact, {eng} engagement, {dur} contact"
    else:
        inter_text = "non-contact"
    dof = {tx.DofClass.ZERO: "zero DOF", tx.DofClass.ONE: "one DOF", tx.DofClass.MANY: "many DOF"}
    groups = code.groups()
    return "\n".join(
        [
            code.canonical(),
            f"interaction: {inter_text} ({groups[0]})",
            f"recurrence: {'cyclical' if code.recurrence else 'acyclical'} ({groups[1]})",
            f"prismatic: {dof[code.prismatic]} ({groups[2]})",
            f"revolute: {dof[code.revolute]} ({groups[3]})",
            f"passive: {'moves w.r.t. active' if code.passive_moves else 'stays'} ({groups[4]})",
        ]
    )


# --- code subcommands ----------------------------------------------------------

def _cmd_code_parse(args) -> int:
    print(_describe(tx.parse_code(args.text)))
    return 0


def _cmd_code_fmt(args) -> int:
    print(tx.format_code(tx.parse_code(args.text), args.style))
    return 0


def _cmd_code_dist(args) -> int:
    a, b = tx.parse_code(args.a), tx.parse_code(args.b)
    print(f"hamming={tx.hamming(a, b)}")
    print(f"components={tx.weighted_distance(a, b, [1.0] * 5):g}")
    return 0


def _cmd_code_enum(args) -> int:
    for code in tx.enumerate_codes():
        print(tx.format_code(code, args.style))
    return 0


def _cmd_code_verbs(args) -> int:
    if args.query is None:
        print(tx.default_table().to_json())
        return 0
    try:
        code = tx.parse_code(args.query)
    except tx.CodeError:
        codes = tx.codes_for_verb(args.query)
        for c in sorted(codes, key=lambda c: c.compact()):
            print(c.canonical())
        return 0
    for verb in sorted(tx.verbs_for_code(code)):
        print(verb)
    return 0


# --- data subcommands ----------------------------------------------------------

def _load_synth_config(path: str) -> data_mod.SynthConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: not valid JSON ({exc})") from None
    known = {f.name for f in fields(data_mod.SynthConfig)}
    unknown = set(doc) - known
    if unknown:
        raise CliError(f"{path}: unknown generator keys: {sorted(unknown)}")
    try:
        return data_mod.SynthConfig(**doc)
    except TypeError as exc:
        raise CliError(f"{path}: {exc}") from None


def _cmd_data_synth(args) -> int:
    cfg = _load_synth_config(args.config)
    train, val = data_mod.synth_generate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data_mod.save_dataset(train, out / "train.jsonl")
    data_mod.save_dataset(val, out / "val.jsonl")
    print(f"wrote {len(train)} train and {len(val)} val examples to {out}")
    return 0


def _cmd_data_check(args) -> int:
    dataset = data_mod.load_dataset(args.path)
    stats = data_mod.dataset_stats(dataset)
    print(json.dumps(stats.as_dict(), indent=2, sort_keys=True))
    return 0


# --- training ------------------------------------------------------------------

def _load_datasets(rc: RunConfig) -> tuple[data_mod.Dataset, data_mod.Dataset]:
    return (
        data_mod.load_dataset(rc.train_path, "train"),
        data_mod.load_dataset(rc.val_path, "val"),
    )


def _noun_table(
    rc: RunConfig, train: data_mod.Dataset, needed: bool
) -> data_mod.WordVectorTable | None:
    if not needed:
        return None
    if rc.noun_vectors_path is not None:
        return data_mod.load_word_vectors(rc.noun_vectors_path)
    return data_mod.WordVectorTable.one_hot(train.noun_vocab)


def _out_dir(rc: RunConfig) -> Path:
    out = Path(rc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_train_embed(args) -> int:
    rc = load_run_config(args.config)
    train, val = _load_datasets(rc)
    nouns = _noun_table(rc, train, rc.use_nouns_motion)
    model, history = emb.train_embedding(
        train, val, rc.train_config(use_nouns=rc.use_nouns_motion), nouns
    )
    out = _out_dir(rc)
    emb.save_motion_model(out / "motion_model.json", model, config_hash(rc))
    emb.write_history_csv(history, out / "history_embed.csv")
    last = history[-1]
    print(
        f"trained motion model: epochs={len(history)} "
        f"val_exact_acc={last['val_exact_acc']:.4f}"
    )
    return 0


def _cmd_train_verb(args) -> int:
    rc = load_run_config(args.config)
    train, val = _load_datasets(rc)
    nouns = _noun_table(rc, train, rc.use_nouns_verb)
    clf, history = vm.train_baseline(
        train, val, rc.train_config(use_nouns=rc.use_nouns_verb), nouns
    )
    out = _out_dir(rc)
    vm.save_verb_classifier(out / "verb_classifier.json", clf, config_hash(rc))
    emb.write_history_csv(history, out / "history_verb.csv")
    print(
        f"trained verb classifier: epochs={len(history)} "
        f"val_top1_acc={history[-1]['val_top1_acc']:.4f}"
    )
    return 0


def _motion_source(
    rc: RunConfig, nouns: data_mod.WordVectorTable | None
) -> vm.MotionSource:
    desc = rc.motion_source
    kind = desc["kind"]
    if kind == "ground_truth":
        return vm.GroundTruth()
    if kind == "corrupted":
        return vm.Corrupted(rate=float(desc["rate"]), seed=int(desc.get("seed", rc.seed)))
    if rc.motion_checkpoint is None:
        raise CliError("predicted motion source requires motion_checkpoint")
    model = emb.load_motion_model(rc.motion_checkpoint)
    return vm.Predicted(model, nouns if model.uses_nouns else None)


def _cmd_train_fusion(args) -> int:
    rc = load_run_config(args.config)
    if rc.baseline_checkpoint is None:
        raise CliError("train fusion requires baseline_checkpoint in the config")
    train, val = _load_datasets(rc)
    baseline = vm.load_verb_classifier(rc.baseline_checkpoint)
    needs_nouns = baseline.uses_nouns or rc.use_nouns_motion
    nouns = _noun_table(rc, train, needs_nouns)
    source = _motion_source(rc, nouns)
    fusion, history = vm.train_fusion(
        baseline, source, train, val, rc.fusion_config(), nouns
    )
    out = _out_dir(rc)
    vm.save_fusion(out / "fusion_mlp.json", fusion, config_hash(rc))
    emb.write_history_csv(history, out / "history_fusion.csv")
    print(
        f"trained fusion MLP: epochs={len(history)} "
        f"val_top1_acc={history[-1]['val_top1_acc']:.4f}"
    )
    return 0


# --- evaluation ----------------------------------------------------------------

def _cmd_eval_report(args) -> int:
    rc = load_run_config(args.config)
    train, val = _load_datasets(rc)
    out = _out_dir(rc)
    cfg_hash = config_hash(rc)
    top1 = None
    vocabulary = None
    confusion = None
    if rc.baseline_checkpoint is not None:
        baseline = vm.load_verb_classifier(rc.baseline_checkpoint)
        nouns = _noun_table(rc, train, baseline.uses_nouns or rc.use_nouns_motion)
        if rc.fusion_checkpoint is not None:
            fusion = vm.load_fusion(rc.fusion_checkpoint)
            source = _motion_source(rc, nouns)
            predictor = vm.fused_predictor(fusion, baseline, source, nouns)
        else:
            predictor = vm.baseline_predictor(baseline, nouns)
        verb_report = ev.evaluate_verb_predictor(predictor, val)
        top1 = verb_report.top1_verb
        vocabulary = verb_report.vocabulary
        confusion = verb_report.per_verb_confusion
    per_component = None
    exact = None
    if rc.motion_checkpoint is not None:
        model = emb.load_motion_model(rc.motion_checkpoint)
        nouns_m = _noun_table(rc, train, model.uses_nouns)
        stats = emb.eval_embedding(model, val, nouns_m)
        per_component = stats.per_component
        exact = stats.exact
    if top1 is None and exact is None:
        raise CliError("eval report needs baseline_checkpoint and/or motion_checkpoint")
    report = ev.EvalReport(
        top1_verb=top1,
        per_component_acc=per_component,
        exact_code_acc=exact,
        vocabulary=vocabulary,
        per_verb_confusion=confusion,
        metadata={"config_hash": cfg_hash, "seeds": [rc.seed]},
    )
    path = out / ev.artifact_name("report", cfg_hash, [rc.seed], "json")
    ev.write_report_json(report, path)
    print(report.render())
    print(f"wrote {path}")
    return 0


def _cmd_eval_sweep(args) -> int:
    rc = load_run_config(args.config)
    if rc.baseline_checkpoint is None:
        raise CliError("eval sweep requires baseline_checkpoint in the config")
    train, val = _load_datasets(rc)
    baseline = vm.load_verb_classifier(rc.baseline_checkpoint)
    nouns = _noun_table(rc, train, baseline.uses_nouns)

    def trainer(source: vm.Corrupted, seed: int) -> vm.FusionMLP:
        cfg = replace(rc.fusion_config(), seed=seed)
        fusion, _ = vm.train_fusion(baseline, source, train, val, cfg, nouns)
        return fusion

    result = ev.corruption_sweep(
        baseline, trainer, val, list(rc.p_grid), list(rc.sweep_seeds), nouns
    )
    out = _out_dir(rc)
    path = out / ev.artifact_name("sweep", config_hash(rc), rc.sweep_seeds, "csv")
    ev.write_sweep_csv(result, path)
    for row in result.rows:
        print(f"p={row.p:g} mean_acc={row.mean_acc:.4f} std={row.std_acc:.4f}")
    print(f"wrote {path}")
    return 0


# --- service + wizard ----------------------------------------------------------

def _cmd_serve(args) -> int:
    import uvicorn

    from .service import AnnotationStore, create_app, load_manifest

    manifest = load_manifest(args.manifest)
    store = AnnotationStore(args.store)
    app = create_app(manifest, store, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_annotate(args) -> int:
    if not args.interactive:
        raise CliError("annotate currently requires --interactive")
    node = tx.decision_tree()
    bits = ""
    print("Answer each question by number.", file=sys.stderr)
    while True:
        print(node["question"])
        if "help" in node:
            print(f"  ({node['help']})")
        for i, option in enumerate(node["options"], start=1):
            print(f"  {i}. {option['label']}")
        try:
            raw = input("> ")
        except EOFError:
            raise CliError("input ended before the wizard completed") from None
        try:
            choice = int(raw.strip())
            option = node["options"][choice - 1]
        except (ValueError, IndexError):
            print("please answer with one of the listed numbers", file=sys.stderr)
            continue
        bits += option["bits"]
        if option.get("leaf"):
            break
        node = option["next"]
    code = tx.parse_code(bits)
    print(f"code: {code.canonical()}")
    hints = sorted(tx.verbs_for_code(code))
    if hints:
        print(f"verb hints: {', '.join(hints)}")
    if args.store is not None:
        from .service import AnnotationStore

        store = AnnotationStore(args.store)
        store.append(args.clip, code.canonical(), args.annotator)
        print(f"stored annotation for clip {args.clip!r} in {args.store}")
    return 0


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motioncodes",
        description="Motion-code codec, dataset tools, training, evaluation, "
        "and the annotation service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    code = sub.add_parser("code", help="codec utilities").add_subparsers(
        dest="subcommand", required=True
    )
    p = code.add_parser("parse", help="parse and describe a code")
    p.add_argument("text")
    p.set_defaults(fn=_cmd_code_parse)
    p = code.add_parser("fmt", help="reformat a code")
    p.add_argument("text")
    p.add_argument("--style", choices=["hyphenated", "compact"], default="hyphenated")
    p.set_defaults(fn=_cmd_code_fmt)
    p = code.add_parser("dist", help="distances between two codes")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(fn=_cmd_code_dist)
    p = code.add_parser("enum", help="list all 180 valid codes")
    p.add_argument("--style", choices=["hyphenated", "compact"], default="hyphenated")
    p.set_defaults(fn=_cmd_code_enum)
    p = code.add_parser("verbs", help="verb/code lookups in the built-in table")
    p.add_argument("query", nargs="?", default=None, help="a code or a verb; omit to dump the table as JSON")
    p.set_defaults(fn=_cmd_code_verbs)

    data = sub.add_parser("data", help="dataset tools").add_subparsers(
        dest="subcommand", required=True
    )
    p = data.add_parser("synth", help="generate a synthetic dataset pair")
    p.add_argument("--config", required=True, help="SynthConfig JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(fn=_cmd_data_synth)
    p = data.add_parser("check", help="validate a dataset and print stats")
    p.add_argument("path")
    p.set_defaults(fn=_cmd_data_check)

    train = sub.add_parser("train", help="train models").add_subparsers(
        dest="subcommand", required=True
    )
    for name, fn in [("embed", _cmd_train_embed), ("verb", _cmd_train_verb), ("fusion", _cmd_train_fusion)]:
        p = train.add_parser(name)
        p.add_argument("--config", required=True, help="RunConfig JSON file")
        p.set_defaults(fn=fn)

    evalp = sub.add_parser("eval", help="evaluate models").add_subparsers(
        dest="subcommand", required=True
    )
    for name, fn in [("report", _cmd_eval_report), ("sweep", _cmd_eval_sweep)]:
        p = evalp.add_parser(name)
        p.add_argument("--config", required=True, help="RunConfig JSON file")
        p.set_defaults(fn=fn)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None, help="directory of built annotator UI to serve at /")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("annotate", help="terminal annotation wizard")
    p.add_argument("--interactive", action="store_true")
    p.add_argument("--clip", default="unnamed-clip")
    p.add_argument("--annotator", default="anonymous")
    p.add_argument("--store", default=None)
    p.set_defaults(fn=_cmd_annotate)

    return parser


_DOMAIN_ERRORS = (
    CliError,
    ConfigError,
    NNError,
    tx.CodeError,
    data_mod.DatasetError,
    emb.EmptyDatasetError,
    emb.MissingCodeError,
    emb.NounRequiredError,
    emb.NounUnexpectedError,
    vm.UnknownVerbLabelError,
    ev.LengthMismatchError,
    ev.EmptyError,
    ev.VocabularyMismatchError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
