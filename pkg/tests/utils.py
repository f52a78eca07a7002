# pylint: skip-file
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pytest
import torch
from numpy.testing import assert_allclose

from molforge.chem import canonical_smiles, extract_scaffold, parse_smiles, read_smiles_file
from molforge.diffusion import DenoiserParams, ModelConfig, Vocabulary
from molforge.training import TrainConfig, train_pretrain

DATA_DIR = Path(__file__).parent / "data"
TOY_CORPUS = DATA_DIR / "toy_corpus.smi"


def corpus_forms(smiles: List[str]) -> List[str]:
    """Every form a model may see: original, canonical and scaffold"""
    forms = []
    for text in smiles:
        mol = parse_smiles(text)
        forms += [text, canonical_smiles(mol)]
        if any(atom.ring_member for atom in mol.atoms):
            forms.append(extract_scaffold(mol).smiles)
    return forms


def tiny_model_config(**overrides) -> ModelConfig:
    values = dict(
        diffusion_steps=20,
        dim=16,
        layers=2,
        heads=2,
        seq_len=48,
        ff_dim=32,
        dropout=0.0,
        encoder_layers=1,
        max_scaffold_len=32,
    )
    values.update(overrides)
    return ModelConfig(**values)


@pytest.fixture(scope="session", autouse=True)
def fix_seeds():
    torch.manual_seed(7)
    np.random.seed(0)


@pytest.fixture
def toy_corpus_path() -> Path:
    return TOY_CORPUS


@pytest.fixture
def toy_corpus() -> List[Tuple[int, str]]:
    return list(read_smiles_file(TOY_CORPUS))


@pytest.fixture
def toy_vocab(toy_corpus) -> Vocabulary:
    return Vocabulary.from_corpus(corpus_forms([text for _, text in toy_corpus]))


@pytest.fixture
def tiny_config() -> ModelConfig:
    return tiny_model_config()


@pytest.fixture
def tiny_params(tiny_config, toy_vocab) -> DenoiserParams:
    params = DenoiserParams.initial(tiny_config, toy_vocab, seed=3)
    params.attach_structure(seed=4)
    return params.eval()


SMALL_CORPUS = [
    "CCO",
    "CCN",
    "c1ccccc1",
    "Cc1ccccc1",
    "c1ccncc1",
    "CC(=O)O",
    "C1CCNCC1",
    "Oc1ccccc1",
    "CCOC",
    "c1ccoc1",
]


def tiny_train_config(corpus, run_dir, **overrides) -> TrainConfig:
    values = dict(
        corpus=corpus,
        run_dir=run_dir,
        model=tiny_model_config(),
        batch_size=8,
        learning_rate=1e-3,
        predictor_lr=1e-3,
        epochs=1,
        warmup_steps=0,
        seed=11,
        predictor_layers=1,
    )
    values.update(overrides)
    return TrainConfig(**values)


@pytest.fixture
def small_corpus_path(tmp_path) -> Path:
    path = tmp_path / "small.smi"
    path.write_text("\n".join(SMALL_CORPUS) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def pretrained_run(small_corpus_path, tmp_path):
    config = tiny_train_config(small_corpus_path, tmp_path / "run", epochs=2, max_steps=3)
    return config, train_pretrain(config).model
