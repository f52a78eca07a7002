import logging
import time
from argparse import ArgumentParser
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
import tqdm
from scipy.stats import ttest_ind

from molforge.chem import (
    VALIDATION_SCAFFOLDS,
    MoleculeGraph,
    Scaffold,
    canonical_smiles,
    descriptor,
    has_substructure,
    scaffold_prevalence,
)
from molforge.diffusion import ModelConfig
from molforge.guidance import GuidanceConfig, PropertyTarget, sample_many
from molforge.metrics import Experiment, SampleSet, evaluate
from molforge.training import TrainConfig, load_corpus, train_pcm, train_pretrain, train_scm
from molforge.utils import State

DEFAULT_CORPUS = Path(__file__).resolve().parents[1] / "tests" / "data" / "toy_corpus.smi"


def injections_agree(mol: MoleculeGraph, scaffold: Scaffold) -> bool:
    """Depth-first enumeration of atom injections, pruned only on already placed bonds"""
    small = scaffold.graph
    image: List[int] = []

    def extend() -> bool:
        if len(image) == len(small):
            return True
        idx = len(image)
        atom = small.atoms[idx]
        for target in range(len(mol)):
            if target in image:
                continue
            if (mol.atoms[target].element, mol.atoms[target].aromatic) != (atom.element, atom.aromatic):
                continue
            image.append(target)
            placed = all(
                (found := mol.bond_between(image[bond.begin], image[bond.end])) is not None
                and found.order is bond.order
                for bond in small.bonds
                if bond.begin <= idx and bond.end <= idx
            )
            if placed and extend():
                return True
            image.pop()
        return False

    return extend()


def check_oracle(molecules: List[MoleculeGraph], pairs: int, seed: int) -> float:
    """Share of random pairs where the matcher agrees with injection enumeration"""
    rng = np.random.default_rng(seed)
    hosts = [mol for mol in molecules if len(mol) <= 12]
    patterns = [mol for mol in molecules if len(mol) <= 8]
    start, agree = time.time(), 0
    for _ in tqdm.tqdm(range(pairs), desc="Oracle"):
        host = hosts[rng.integers(len(hosts))]
        pattern = patterns[rng.integers(len(patterns))]
        scaffold = Scaffold(pattern, canonical_smiles(pattern))
        agree += has_substructure(host, scaffold) == injections_agree(host, scaffold)
    logging.getLogger("molforge").info("oracle: %d pairs in %.1f s", pairs, time.time() - start)
    return agree / pairs


def draw(name: str, config: GuidanceConfig, params, predictors, seed: int, count: int, experiment: Experiment, corpus):
    """Sample, evaluate and store a named run; returns the valid molecules"""
    start_time = time.time()
    results = sample_many(config, params, seed, count, predictors, workers=State().threads)
    texts = [result.smiles for result in results if result.decoded]
    report = evaluate(texts, corpus.molecules, config.scaffold, config.targets)
    experiment.add_result(name, report)
    experiment.results.loc[name, "sample_time"] = time.time() - start_time
    return SampleSet.from_smiles(texts).valid


def held_in_scaffold(corpus) -> str:
    scaffolds = {name: Scaffold.from_smiles(text) for name, text in VALIDATION_SCAFFOLDS.items()}
    prevalence = scaffold_prevalence(corpus.molecules, scaffolds)
    return VALIDATION_SCAFFOLDS[prevalence.idxmax()]


def main():
    parser = ArgumentParser()
    parser.add_argument("--corpus", dest="corpus", type=Path, required=False, default=DEFAULT_CORPUS)
    parser.add_argument("--work-dir", dest="work_dir", type=Path, required=False, default=Path("guidance_compare"))
    parser.add_argument("--seed", dest="seed", type=int, required=False, default=12345)
    parser.add_argument("--samples", dest="samples", type=int, required=False, default=500)
    parser.add_argument("--steps", dest="steps", type=int, required=False, default=2000)
    parser.add_argument("--scm-epochs", dest="scm_epochs", type=int, required=False, default=5)
    parser.add_argument("--pcm-epochs", dest="pcm_epochs", type=int, required=False, default=5)
    parser.add_argument("--pairs", dest="pairs", type=int, required=False, default=1000)
    parser.add_argument("--scaffold", dest="scaffold", required=False, default=None)
    args = parser.parse_args()

    logger = State().logger
    corpus = load_corpus(args.corpus)
    outcome: Dict[str, Optional[float]] = {}

    outcome["oracle_agreement"] = check_oracle(corpus.molecules, args.pairs, args.seed)

    model = ModelConfig(diffusion_steps=200, dim=64, layers=2, heads=4, seq_len=64)
    # memorization of ten molecules
    tiny_corpus = args.work_dir / "ten.smi"
    tiny_corpus.parent.mkdir(parents=True, exist_ok=True)
    tiny_corpus.write_text("".join(f"{text}\n" for text in corpus.smiles[:10]), encoding="utf-8")
    memo = TrainConfig(
        tiny_corpus, args.work_dir / "ten", model=model, epochs=10**6, max_steps=args.steps, seed=args.seed,
        learning_rate=1e-3, augment_prob=0.0, batch_size=10,
    )
    params = train_pretrain(memo, progress=True).model
    memo_run = Experiment()
    draw("memorization", GuidanceConfig(), params, {}, args.seed, args.samples, memo_run, load_corpus(tiny_corpus))
    outcome["memorization_validity"] = memo_run.results.loc["memorization", "Validity"]

    config = TrainConfig(
        args.corpus, args.work_dir / "toy", model=model, epochs=10**6, max_steps=args.steps, seed=args.seed,
        learning_rate=1e-3,
    )
    params = train_pretrain(config, progress=True).model
    train_scm(replace(config, stage="scm", max_steps=None, epochs=args.scm_epochs), params, progress=True)
    predictors = train_pcm(
        replace(config, stage="pcm", max_steps=None, epochs=args.pcm_epochs, descriptors=("HBD",)),
        params,
        progress=True,
    ).model

    scaffold = args.scaffold or held_in_scaffold(corpus)
    logger.info("held-in scaffold %s", scaffold)
    experiment = Experiment()
    runs = {
        "unguided": GuidanceConfig(),
        "scaffold": GuidanceConfig(scaffold=scaffold, w_s=0.0),
        "hbd_up": GuidanceConfig(targets=(PropertyTarget("HBD", "maximize"),), w_p=0.0),
        "hbd_down": GuidanceConfig(targets=(PropertyTarget("HBD", "minimize"),), w_p=0.0),
        "joint": GuidanceConfig(scaffold=scaffold, targets=(PropertyTarget("HBD", "maximize"),), w_s=0.5, w_p=0.5),
    }
    valid = {}
    for name in tqdm.tqdm(runs.keys(), desc="Run"):
        logger.info(msg="{} started".format(name))
        valid[name] = draw(name, runs[name], params, predictors, args.seed, args.samples, experiment, corpus)

    hbd = {name: [descriptor(mol, "HBD") for mol in mols] for name, mols in valid.items()}
    outcome["hbd_up_p"] = ttest_ind(hbd["hbd_up"], hbd["unguided"], alternative="greater").pvalue
    outcome["hbd_down_p"] = ttest_ind(hbd["hbd_down"], hbd["unguided"], alternative="less").pvalue
    existence = {name: experiment.reports[name].scaffold_existence for name in ("scaffold", "joint")}
    held_in = Scaffold.from_smiles(scaffold)
    unguided_existence = float(np.mean([has_substructure(mol, held_in) for mol in valid["unguided"]]))
    outcome["scaffold_existence_gain"] = existence["scaffold"] - unguided_existence
    outcome["joint_existence_gain"] = existence["joint"] - unguided_existence
    outcome["joint_hbd_gain"] = float(np.mean(hbd["joint"]) - np.mean(hbd["unguided"]))

    print(experiment.results)
    print(experiment.compare("unguided"))
    summary = pd.Series(outcome, name="value")
    print(summary)
    with open(args.work_dir / "guidance_compare.txt", "w", encoding="utf-8") as text_file:
        text_file.write(experiment.results.to_string() + "\n\n" + summary.to_string() + "\n")


if __name__ == "__main__":
    main()
