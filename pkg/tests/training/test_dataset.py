# pylint: disable=redefined-outer-name, missing-function-docstring, unused-import
import math

import pytest
import torch

from molforge.chem import canonical_smiles, parse_smiles
from molforge.diffusion import DenoiserParams
from molforge.errors import CorpusError
from molforge.training import MoleculeDataset, build_vocabulary, load_corpus, make_loader, noise_emb

from tests.utils import SMALL_CORPUS, fix_seeds, small_corpus_path, tiny_model_config, toy_corpus_path


@pytest.fixture
def small_corpus(small_corpus_path):
    return load_corpus(small_corpus_path)


@pytest.fixture
def small_params(small_corpus):
    return DenoiserParams.initial(tiny_model_config(), build_vocabulary(small_corpus), seed=1)


def test_load_toy_corpus(toy_corpus_path):
    corpus = load_corpus(toy_corpus_path)
    assert len(corpus) == len(corpus.smiles) == len(corpus.line_numbers)
    assert corpus.line_numbers[0] == 2
    assert len(corpus.sha256) == 64


def test_invalid_lines_are_reported(tmp_path):
    path = tmp_path / "bad.smi"
    path.write_text("CCO\nC1CC\nC(C)(C)(C)(C)C\nCCN\n", encoding="utf-8")
    with pytest.raises(CorpusError) as error:
        load_corpus(path)
    assert error.value.line_numbers == (2, 3)
    assert error.value.exit_code == 3


def test_empty_and_missing_corpus(tmp_path):
    path = tmp_path / "empty.smi"
    path.write_text("# nothing here\n\n", encoding="utf-8")
    with pytest.raises(CorpusError):
        load_corpus(path)
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "absent.smi")


def test_scaffolds(small_corpus):
    assert small_corpus.scaffolds[0] is None
    assert small_corpus.scaffolds[SMALL_CORPUS.index("Cc1ccccc1")] == "c1ccccc1"
    vocab = build_vocabulary(small_corpus)
    for form in small_corpus.forms():
        vocab.encode(form, 48)


def test_no_augmentation_repeats_across_epochs(small_corpus, small_params):
    dataset = MoleculeDataset(small_corpus, small_params.vocab, 48, augment_prob=0.0, seed=3)
    first = [dataset[idx]["tokens"] for idx in range(len(dataset))]
    dataset.set_epoch(1)
    second = [dataset[idx]["tokens"] for idx in range(len(dataset))]
    assert all(torch.equal(a, b) for a, b in zip(first, second))


def test_augmented_items_are_the_same_molecule(small_corpus, small_params):
    vocab = small_params.vocab
    dataset = MoleculeDataset(small_corpus, vocab, 48, augment_prob=1.0, seed=3)
    again = MoleculeDataset(small_corpus, vocab, 48, augment_prob=1.0, seed=3)
    for epoch in range(3):
        dataset.set_epoch(epoch)
        again.set_epoch(epoch)
        for idx in range(len(dataset)):
            tokens = dataset[idx]["tokens"]
            assert torch.equal(tokens, again[idx]["tokens"])
            text = vocab.decode(tokens.tolist())
            assert canonical_smiles(parse_smiles(text)) == small_corpus.canonical[idx]


def test_too_long_molecules(small_corpus, small_params):
    with pytest.raises(CorpusError):
        MoleculeDataset(small_corpus, small_params.vocab, 4)


def test_loader_order_follows_seed(small_corpus, small_params):
    dataset = MoleculeDataset(small_corpus, small_params.vocab, 48)
    first = [batch["index"].tolist() for batch in make_loader(dataset, 4, seed=5)]
    second = [batch["index"].tolist() for batch in make_loader(dataset, 4, seed=5)]
    assert first == second
    assert sorted(sum(first, [])) == list(range(len(small_corpus)))


def test_noise_emb_at_first_step(small_params):
    tokens = torch.tensor(small_params.vocab.encode("CCO", 48))
    clean = small_params.embed(tokens)
    noisy = noise_emb(tokens, 1, small_params, seed=4)
    alpha_bar = float(small_params.schedule.alpha_bars[1])
    bound = math.sqrt(1 - alpha_bar) * math.sqrt(clean.numel()) * 3
    assert float((noisy - clean).norm()) < bound
    assert torch.equal(noisy, noise_emb(tokens, 1, small_params, seed=4))


def test_noise_emb_variance(small_params):
    step = 10
    tokens = torch.tensor(small_params.vocab.encode("c1ccccc1", 48)).repeat(4000, 1)
    with torch.no_grad():
        noisy = noise_emb(tokens, step, small_params, seed=9).double()
        mean = small_params.embed(tokens[:1]).double() * math.sqrt(float(small_params.schedule.alpha_bars[step]))
    variance = float(((noisy - mean) ** 2).mean())
    assert variance == pytest.approx(1 - float(small_params.schedule.alpha_bars[step]), rel=0.02)
