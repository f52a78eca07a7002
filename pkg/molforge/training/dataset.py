"""
Corpus loading, token datasets with SMILES augmentation and the noisy embedding path
"""
import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from molforge.chem import (
    MoleculeGraph,
    canonical_smiles,
    check_valence,
    extract_scaffold,
    parse_smiles,
    randomize_smiles,
    read_smiles_file,
)
from molforge.data import PathLike
from molforge.diffusion.models import DenoiserParams
from molforge.diffusion.schedule import Steps, q_sample
from molforge.diffusion.vocabulary import Vocabulary
from molforge.errors import CorpusError, MolforgeError, TooLong, UnknownToken
from molforge.numeric.random import derive_seed, make_generator

logger = logging.getLogger("molforge")


@dataclass
class Corpus:
    """
    Parsed and valence-checked training molecules.

    :param smiles: text as written in the file
    :param molecules: parsed graphs
    :param line_numbers: source line of every molecule
    :param sha256: digest of the file bytes
    """

    smiles: List[str]
    molecules: List[MoleculeGraph]
    line_numbers: List[int]
    sha256: str = ""

    def __len__(self) -> int:
        return len(self.molecules)

    @cached_property
    def canonical(self) -> List[str]:
        return [canonical_smiles(mol) for mol in self.molecules]

    @cached_property
    def scaffolds(self) -> List[Optional[str]]:
        """Scaffold SMILES of every molecule, ``None`` for acyclic ones"""
        result: List[Optional[str]] = []
        for mol in self.molecules:
            if any(atom.ring_member for atom in mol.atoms):
                result.append(extract_scaffold(mol).smiles)
            else:
                result.append(None)
        return result

    def forms(self) -> List[str]:
        """Every text form the models are trained on: original, canonical and scaffold SMILES"""
        return self.smiles + self.canonical + [item for item in self.scaffolds if item is not None]


def load_corpus(path: PathLike) -> Corpus:
    """
    Read a training corpus, rejecting it when any line fails to parse or to pass the valence check.

    :param path: one-SMILES-per-line UTF-8 file
    :return: parsed corpus
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus {path} does not exist")
    smiles, molecules, numbers, bad = [], [], [], []
    for number, text in read_smiles_file(path):
        try:
            mol = parse_smiles(text)
        except MolforgeError as exc:
            logger.debug("line %d: %s", number, exc)
            bad.append(number)
            continue
        if not check_valence(mol):
            logger.debug("line %d: %r fails the valence check", number, text)
            bad.append(number)
            continue
        smiles.append(text)
        molecules.append(mol)
        numbers.append(number)
    if bad:
        logger.warning("%d invalid lines in %s", len(bad), path)
        raise CorpusError(f"{len(bad)} invalid molecules in {path}", bad)
    if not molecules:
        raise CorpusError(f"corpus {path} holds no molecules")
    logger.info("loaded %d molecules from %s", len(molecules), path)
    return Corpus(smiles, molecules, numbers, hashlib.sha256(path.read_bytes()).hexdigest())


def build_vocabulary(corpus: Corpus) -> Vocabulary:
    return Vocabulary.from_corpus(corpus.forms())


class MoleculeDataset(Dataset):
    """
    Token sequences of corpus molecules.

    With probability ``augment_prob`` an item is a random SMILES form of its molecule,
    drawn from a seed addressed by ``(seed, epoch, index)``, so batches depend only on the seed and the epoch.
    Random forms that do not fit fall back to the text of the file.
    """

    # pylint: disable=too-many-arguments
    def __init__(
        self,
        corpus: Corpus,
        vocab: Vocabulary,
        seq_len: int,
        augment_prob: float = 0.0,
        seed: int = 0,
        indices: Optional[Sequence[int]] = None,
    ):
        self.corpus = corpus
        self.vocab = vocab
        self.seq_len = seq_len
        self.augment_prob = augment_prob
        self.seed = seed
        self.indices = list(range(len(corpus))) if indices is None else list(indices)
        self.epoch = 0
        self._originals: Dict[int, List[int]] = {}
        too_long, unknown = [], []
        for index in self.indices:
            try:
                self._originals[index] = vocab.encode(corpus.smiles[index], seq_len)
            except TooLong:
                too_long.append(corpus.line_numbers[index])
            except UnknownToken:
                unknown.append(corpus.line_numbers[index])
        if too_long:
            raise CorpusError(f"{len(too_long)} molecules exceed {seq_len} tokens", too_long)
        if unknown:
            raise CorpusError(f"{len(unknown)} molecules use tokens outside the vocabulary", unknown)

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    def __len__(self) -> int:
        return len(self.indices)

    def tokens(self, index: int) -> List[int]:
        """Token ids of corpus molecule ``index`` for the current epoch"""
        if self.augment_prob > 0:
            rng = np.random.default_rng(derive_seed(self.seed, self.epoch, index))
            if rng.random() < self.augment_prob:
                text = randomize_smiles(self.corpus.molecules[index], int(rng.integers(2**31)))
                try:
                    return self.vocab.encode(text, self.seq_len)
                except (TooLong, UnknownToken):
                    pass
        return self._originals[index]

    def __getitem__(self, item: int) -> Dict[str, torch.Tensor]:
        index = self.indices[item]
        return {
            "tokens": torch.tensor(self.tokens(index), dtype=torch.long),
            "index": torch.tensor(index, dtype=torch.long),
        }


def make_loader(dataset: MoleculeDataset, batch_size: int, seed: int, shuffle: bool = True) -> DataLoader:
    """Single-process loader whose shuffling order is fixed by ``seed``"""
    return DataLoader(
        dataset,
        batch_size=batch_size,
        shuffle=shuffle,
        generator=make_generator(derive_seed(seed, 1)) if shuffle else None,
    )


def sample_steps(batch: int, high: int, generator: torch.Generator, low: int = 1) -> torch.Tensor:
    """Timesteps drawn uniformly from ``[low, high]``"""
    return torch.randint(low, high + 1, (batch,), generator=generator)


# pylint: disable=too-many-arguments
def noise_emb(
    tokens: torch.Tensor,
    steps: Steps,
    params: DenoiserParams,
    seed: Optional[int] = None,
    generator: Optional[torch.Generator] = None,
    noise: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Noisy embeddings ``x_t`` of token sequences.

    :param tokens: ids ``(n,)`` or ``(batch, n)``
    :param steps: timestep, or one per row
    :param params: model holding the embedding table and schedule
    :param seed: noise seed
    :param generator: generator to draw noise from
    :param noise: explicit noise
    """
    return q_sample(params.embed(tokens), steps, params.schedule, seed=seed, noise=noise, generator=generator)
