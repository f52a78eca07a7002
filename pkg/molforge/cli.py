"""
Command line entry point.

Exit codes: 0 success, 1 any other library error, 2 invalid configuration,
3 corpus or sample file problems, 4 missing stage input.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from molforge.chem import VALIDATION_SCAFFOLDS, CorpusStats, Scaffold, scaffold_prevalence
from molforge.diffusion import BASE_FILE, SCM_FILE, VOCAB_FILE, DenoiserParams, ModelConfig
from molforge.errors import ConfigError, DependencyMissing, MolforgeError
from molforge.guidance import GuidanceConfig, PropertyPredictor, PropertyTarget, predictor_file, sample_many
from molforge.metrics import REPORT_JSON, REPORT_TXT, evaluate, top_k_scores, write_report
from molforge.optimization import tune_guidance
from molforge.training import PCM, PRETRAIN, SCM, STATS_FILE, TrainConfig, load_corpus, train_pcm, train_pretrain
from molforge.training import train_scm
from molforge.utils import Manifest, State, build_config, file_sha256, read_config_file
from molforge.utils.config_file import warn_unknown

logger = logging.getLogger("molforge")

SAMPLES_FILE = "samples.smi"
FAILED_FILE = "samples.failed.tsv"
PREVALENCE_FILE = "scaffold_prevalence.csv"
TOP_K_FILE = "top_k.csv"
TRIALS_FILE = "tune_trials.csv"
BEST_FILE = "best_params.json"

# keys read by commands outside the config dataclasses
EXTRA_KEYS = (
    "samples",
    "out_dir",
    "count",
    "workers",
    "sample_batch",
    "budget",
    "conf_level",
    "top_k",
    "w_p_range",
    "boundary_range",
)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="flat key = value config file, flags override its values")
    parser.add_argument("--seed", type=int, help="global seed")
    parser.add_argument("--verbose", action="store_true", help="debug logging and progress bars")


def _add_guidance(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scaffold", help="scaffold SMILES, turns structure guidance on")
    parser.add_argument(
        "--target",
        action="append",
        metavar="GOAL",
        help="property goal descriptor:direction[:lambda] or descriptor:value[:lambda], repeatable",
    )
    parser.add_argument("--w-s", dest="w_s", type=float, help="unconditional weight of the structure module")
    parser.add_argument("--w-p", dest="w_p", type=float, help="unconditional weight of the property module")
    parser.add_argument("--t2-boundary", dest="t2_boundary", type=int, help="last step of phase two")
    parser.add_argument("--workers", type=int, help="sampling threads, capped by MOLFORGE_THREADS")
    parser.add_argument("--count", type=int, help="number of chains")


def _add_training(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", type=Path, help="one-SMILES-per-line training file")
    parser.add_argument("--run-dir", dest="run_dir", type=Path, help="run directory with checkpoints")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", dest="batch_size", type=int)
    parser.add_argument("--max-steps", dest="max_steps", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="molforge", description=__doc__, formatter_class=argparse.RawTextHelpFormatter
    )
    commands = parser.add_subparsers(dest="command", required=True)

    pretrain = commands.add_parser("pretrain", help="train the unconditional denoiser")
    _add_training(pretrain)
    pretrain.add_argument("--learning-rate", dest="learning_rate", type=float)

    scm = commands.add_parser("train-scm", help="fine-tune the structure control module")
    _add_training(scm)
    scm.add_argument("--learning-rate", dest="learning_rate", type=float)

    pcm = commands.add_parser("train-pcm", help="train property predictors on noisy embeddings")
    _add_training(pcm)
    pcm.add_argument("--descriptors", help="comma separated descriptor ids")
    pcm.add_argument("--t-max", dest="t_max", type=int, help="largest timestep predictors see")
    pcm.add_argument("--predictor-lr", dest="predictor_lr", type=float)

    sample = commands.add_parser("sample", help="draw guided or unguided samples")
    sample.add_argument("--run-dir", dest="run_dir", type=Path, help="trained run directory")
    sample.add_argument("--out-dir", dest="out_dir", type=Path, help="directory for samples and manifest")
    _add_guidance(sample)

    evaluation = commands.add_parser("evaluate", help="compute the metric report of a sample file")
    evaluation.add_argument("--samples", type=Path, help="one-SMILES-per-line sample file")
    evaluation.add_argument("--corpus", type=Path, help="training corpus")
    evaluation.add_argument("--run-dir", dest="run_dir", type=Path, help="run directory holding corpus statistics")
    evaluation.add_argument("--out-dir", dest="out_dir", type=Path, help="directory for the report files")
    evaluation.add_argument("--scaffold", help="scaffold the samples were generated for")
    evaluation.add_argument("--target", action="append", metavar="GOAL", help="property goal, repeatable")
    evaluation.add_argument("--descriptors", help="further comma separated descriptors to report")
    evaluation.add_argument("--top-k", dest="top_k", help="descriptor to rank samples by")
    evaluation.add_argument("--conf-level", dest="conf_level", type=float, help="confidence level, 0.95 by default")

    stats = commands.add_parser("stats", help="corpus descriptor statistics and scaffold prevalence")
    stats.add_argument("--corpus", type=Path, help="training corpus")
    stats.add_argument("--out-dir", dest="out_dir", type=Path, help="output directory")

    tune = commands.add_parser("tune", help="search guidance weights and the phase boundary")
    tune.add_argument("--run-dir", dest="run_dir", type=Path, help="trained run directory")
    tune.add_argument("--corpus", type=Path, help="training corpus for the baselines")
    tune.add_argument("--out-dir", dest="out_dir", type=Path, help="directory for the trial table")
    tune.add_argument("--budget", type=int, help="number of trials")
    _add_guidance(tune)

    for sub in commands.choices.values():
        _add_common(sub)
    return parser


def _layer(args: argparse.Namespace) -> Dict[str, Any]:
    """Flag values that were given"""
    values = {key: value for key, value in vars(args).items() if value is not None}
    values.pop("command", None)
    values.pop("config", None)
    values.pop("verbose", None)
    return values


def _merged(args: argparse.Namespace) -> Dict[str, Any]:
    values: Dict[str, Any] = dict(read_config_file(args.config))
    values.update(_layer(args))
    return values


def _require(values: Dict[str, Any], key: str, flag: str) -> Any:
    if values.get(key) is None:
        raise ConfigError(f"{flag} is required (or {key} in the config file)")
    return values[key]


def _existing_file(values: Dict[str, Any], key: str, flag: str) -> Path:
    path = Path(_require(values, key, flag))
    if not path.is_file():
        raise ConfigError(f"{flag} {path} does not exist")
    return path


def _seed(values: Dict[str, Any]) -> int:
    seed = _require(values, "seed", "--seed")
    try:
        return int(seed)
    except ValueError as exc:
        raise ConfigError(f"seed must be an integer, got {seed!r}") from exc


def _int(values: Dict[str, Any], key: str, default: int) -> int:
    try:
        result = int(values.get(key, default))
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {values[key]!r}") from exc
    if result < 1:
        raise ConfigError(f"{key} must be positive, got {result}")
    return result


def _targets(value: Any) -> Optional[tuple]:
    if value is None:
        return None
    if isinstance(value, str):
        value = [item for item in value.split(",") if item.strip()]
    return tuple(PropertyTarget.parse(item) for item in value)


def _train_config(values: Dict[str, Any], stage: str) -> TrainConfig:
    values = dict(values)
    _existing_file(values, "corpus", "--corpus")
    _require(values, "run_dir", "--run-dir")
    values["seed"] = _seed(values)
    model = build_config(ModelConfig, values)
    warn_unknown(values, TrainConfig, ModelConfig, extra=EXTRA_KEYS)
    return build_config(TrainConfig, values, stage=stage, model=model)


def _check_run_dir(run_dir: Path, names: Sequence[str]) -> None:
    for name in names:
        if not (run_dir / name).exists():
            raise DependencyMissing(f"{run_dir / name} not found; --run-dir must point to a trained run")


def _guidance_config(values: Dict[str, Any]) -> GuidanceConfig:
    values = dict(values)
    values["targets"] = _targets(values.get("target") or values.get("targets"))
    both = values.get("scaffold") is not None and values["targets"]
    if both and values.get("w_p") is not None and values.get("w_s") is None:
        values["w_s"] = 1 - float(values["w_p"])
    elif both and values.get("w_s") is not None and values.get("w_p") is None:
        values["w_p"] = 1 - float(values["w_s"])
    return build_config(GuidanceConfig, values)


def _workers(values: Dict[str, Any]) -> int:
    return min(_int(values, "workers", 1), State().threads)


def _load_predictors(run_dir: Path, config: GuidanceConfig) -> Dict[str, PropertyPredictor]:
    return {target.descriptor: PropertyPredictor.load(run_dir, target.descriptor) for target in config.targets}


def _run_inputs(manifest: Manifest, run_dir: Path, config: GuidanceConfig) -> None:
    names = [VOCAB_FILE, BASE_FILE, SCM_FILE] + [predictor_file(target.descriptor) for target in config.targets]
    for name in names:
        if (run_dir / name).exists():
            manifest.add_input(run_dir / name)


def _train(values: Dict[str, Any], command: str, stage: str, progress: bool) -> int:
    config = _train_config(values, stage)
    if stage != PRETRAIN:
        _check_run_dir(config.run_dir, [VOCAB_FILE, BASE_FILE])
    manifest = Manifest(command, config.to_dict(), seed=config.seed, threads=State().threads)
    manifest.add_input(config.corpus)
    if stage != PRETRAIN:
        for name in (VOCAB_FILE, BASE_FILE, SCM_FILE):
            if (config.run_dir / name).exists():
                manifest.add_input(config.run_dir / name)
    logger.info("effective config: %s", json.dumps(config.to_dict(), sort_keys=True, default=str))
    runner: Callable = {PRETRAIN: train_pretrain, SCM: train_scm, PCM: train_pcm}[stage]
    result = runner(config, progress=progress)
    manifest.outputs.update(result.artifacts)
    manifest.write(config.run_dir)
    return 0


def cmd_pretrain(values: Dict[str, Any], progress: bool = False) -> int:
    return _train(values, "pretrain", PRETRAIN, progress)


def cmd_train_scm(values: Dict[str, Any], progress: bool = False) -> int:
    return _train(values, "train-scm", SCM, progress)


def cmd_train_pcm(values: Dict[str, Any], progress: bool = False) -> int:
    return _train(values, "train-pcm", PCM, progress)


def cmd_sample(values: Dict[str, Any], progress: bool = False) -> int:
    """
    Write ``samples.smi`` in chain order and ``samples.failed.tsv`` for chains without an end token.
    """
    run_dir = Path(_require(values, "run_dir", "--run-dir"))
    out_dir = Path(values.get("out_dir", run_dir))
    seed = _seed(values)
    count = _int(values, "count", 100)
    config = _guidance_config(values)
    warn_unknown(values, GuidanceConfig, extra=EXTRA_KEYS + ("run_dir", "seed", "target"))
    _check_run_dir(run_dir, [VOCAB_FILE, BASE_FILE] + ([SCM_FILE] if config.structure_active else []))
    params = DenoiserParams.load(run_dir, require_structure=config.structure_active)
    predictors = _load_predictors(run_dir, config)
    workers = _workers(values)
    echo = {**config.to_dict(), "run_dir": str(run_dir), "count": count, "workers": workers}
    logger.info("effective config: %s", json.dumps(echo, sort_keys=True))
    manifest = Manifest("sample", echo, seed=seed, threads=State().threads)
    _run_inputs(manifest, run_dir, config)

    batch = _int(values, "sample_batch", 32)
    results = sample_many(config, params, seed, count, predictors, workers=workers, batch_size=batch, progress=progress)
    out_dir.mkdir(parents=True, exist_ok=True)
    decoded = [result.smiles for result in results if result.decoded]
    (out_dir / SAMPLES_FILE).write_text("".join(f"{text}\n" for text in decoded), encoding="utf-8")
    failed = ["chain\tseed\treason\traw"]
    failed += [f"{res.chain}\t{res.seed}\t{res.reason}\t{res.raw}" for res in results if not res.decoded]
    (out_dir / FAILED_FILE).write_text("\n".join(failed) + "\n", encoding="utf-8")
    logger.info("%d of %d chains decoded, samples in %s", len(decoded), count, out_dir / SAMPLES_FILE)
    for name in (SAMPLES_FILE, FAILED_FILE):
        manifest.outputs[name] = file_sha256(out_dir / name)
    manifest.write(out_dir)
    return 0


def _stats_for(run_dir: Optional[Path], molecules) -> Optional[CorpusStats]:
    if run_dir is not None and (Path(run_dir) / STATS_FILE).exists():
        return CorpusStats.load(Path(run_dir) / STATS_FILE)
    return CorpusStats.from_molecules(molecules, skip_degenerate=True)


def cmd_evaluate(values: Dict[str, Any], progress: bool = False) -> int:  # pylint: disable=unused-argument
    samples_path = _existing_file(values, "samples", "--samples")
    corpus_path = _existing_file(values, "corpus", "--corpus")
    out_dir = Path(values.get("out_dir", samples_path.parent))
    corpus = load_corpus(corpus_path)
    targets = _targets(values.get("target") or values.get("targets")) or ()
    descriptors = [item.strip() for item in str(values.get("descriptors", "")).split(",") if item.strip()]
    try:
        conf_level = float(values.get("conf_level", 0.95))
    except ValueError as exc:
        raise ConfigError(f"conf_level must be a number, got {values['conf_level']!r}") from exc
    run_dir = values.get("run_dir")
    stats = _stats_for(run_dir, corpus.molecules)
    samples = samples_path.read_text(encoding="utf-8").splitlines()

    report = evaluate(samples, corpus.molecules, values.get("scaffold"), targets, stats, descriptors, conf_level)
    paths = write_report(report, out_dir)
    echo = {
        "samples": str(samples_path),
        "corpus": str(corpus_path),
        "scaffold": values.get("scaffold"),
        "targets": [str(target) for target in targets],
        "descriptors": descriptors,
        "conf_level": conf_level,
    }
    manifest = Manifest("evaluate", echo, seed=values.get("seed"), threads=State().threads)
    manifest.add_input(samples_path)
    manifest.add_input(corpus_path)
    if values.get("top_k"):
        scores = top_k_scores(samples, values["top_k"], stats=stats)
        scores.rename(values["top_k"]).to_csv(out_dir / TOP_K_FILE, header=True)
        manifest.outputs[TOP_K_FILE] = file_sha256(out_dir / TOP_K_FILE)
    for name in (REPORT_JSON, REPORT_TXT):
        manifest.outputs[name] = file_sha256(paths[name])
    manifest.write(out_dir)
    return 0


def cmd_stats(values: Dict[str, Any], progress: bool = False) -> int:  # pylint: disable=unused-argument
    """Write corpus statistics and the prevalence of the validation scaffolds"""
    corpus_path = _existing_file(values, "corpus", "--corpus")
    out_dir = Path(_require(values, "out_dir", "--out-dir"))
    corpus = load_corpus(corpus_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    stats = CorpusStats.from_molecules(corpus.molecules, skip_degenerate=True)
    stats.save(out_dir / STATS_FILE)
    scaffolds = {name: Scaffold.from_smiles(text) for name, text in VALIDATION_SCAFFOLDS.items()}
    prevalence = scaffold_prevalence(corpus.molecules, scaffolds)
    prevalence.to_csv(out_dir / PREVALENCE_FILE, header=True)
    for name, value in prevalence.sort_values(ascending=False).items():
        logger.info("%s: %.1f%% of the corpus", name, value * 100)
    manifest = Manifest("stats", {"corpus": str(corpus_path), "out_dir": str(out_dir)}, threads=State().threads)
    manifest.add_input(corpus_path)
    for name in (STATS_FILE, PREVALENCE_FILE):
        manifest.outputs[name] = file_sha256(out_dir / name)
    manifest.write(out_dir)
    return 0


def _range(values: Dict[str, Any], key: str) -> Optional[List[float]]:
    if values.get(key) is None:
        return None
    try:
        return [float(item) for item in str(values[key]).split(",")]
    except ValueError as exc:
        raise ConfigError(f"{key} must be low,high, got {values[key]!r}") from exc


def cmd_tune(values: Dict[str, Any], progress: bool = False) -> int:  # pylint: disable=unused-argument
    run_dir = Path(_require(values, "run_dir", "--run-dir"))
    corpus_path = _existing_file(values, "corpus", "--corpus")
    out_dir = Path(values.get("out_dir", run_dir))
    seed = _seed(values)
    config = _guidance_config(values)
    _check_run_dir(run_dir, [VOCAB_FILE, BASE_FILE] + ([SCM_FILE] if config.structure_active else []))
    params = DenoiserParams.load(run_dir, require_structure=config.structure_active)
    predictors = _load_predictors(run_dir, config)
    corpus = load_corpus(corpus_path)
    borders = {}
    for name, key in (("w_p", "w_p_range"), ("boundary_fraction", "boundary_range")):
        if _range(values, key) is not None:
            borders[name] = _range(values, key)
    count, budget, workers = _int(values, "count", 32), _int(values, "budget", 10), _workers(values)
    echo = {**config.to_dict(), "count": count, "budget": budget, "borders": borders, "workers": workers}
    logger.info("effective config: %s", json.dumps(echo, sort_keys=True))
    manifest = Manifest("tune", echo, seed=seed, threads=State().threads)
    _run_inputs(manifest, run_dir, config)
    manifest.add_input(corpus_path)

    best, study = tune_guidance(
        config,
        params,
        predictors,
        corpus.molecules,
        _stats_for(run_dir, corpus.molecules),
        seed=seed,
        count=count,
        budget=budget,
        param_borders=borders,
        workers=workers,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    study.trials_dataframe().to_csv(out_dir / TRIALS_FILE, index=False)
    with open(out_dir / BEST_FILE, "w", encoding="utf-8") as file:
        json.dump({"params": best, "score": study.best_value}, file, indent=2)
    for name in (TRIALS_FILE, BEST_FILE):
        manifest.outputs[name] = file_sha256(out_dir / name)
    manifest.write(out_dir)
    return 0


COMMANDS: Dict[str, Callable[..., int]] = {
    "pretrain": cmd_pretrain,
    "train-scm": cmd_train_scm,
    "train-pcm": cmd_train_pcm,
    "sample": cmd_sample,
    "evaluate": cmd_evaluate,
    "stats": cmd_stats,
    "tune": cmd_tune,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    :param argv: arguments without the program name, ``sys.argv[1:]`` when ``None``
    :return: exit code
    """
    args = build_parser().parse_args(argv)
    try:
        State().logger.setLevel(logging.DEBUG if args.verbose else logging.INFO)
        values = _merged(args)
        return COMMANDS[args.command](values, progress=args.verbose)
    except MolforgeError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
