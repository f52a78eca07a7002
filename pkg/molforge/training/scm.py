"""
Fine-tuning of the structure module: conditional denoiser and scaffold encoder on self-scaffolds
"""
from pathlib import Path
from typing import Dict, List, Optional

import torch

from molforge.diffusion.models import DenoiserParams
from molforge.errors import CorpusError, TooLong
from molforge.numeric.random import derive_seed
from molforge.training.base_trainer import module_parameters
from molforge.training.config import SCM, TrainConfig
from molforge.training.dataset import Corpus, MoleculeDataset, load_corpus, make_loader
from molforge.training.pretrain import DenoiserTrainer, StageResult


def scaffold_indices(corpus: Corpus, params: DenoiserParams) -> List[int]:
    """Molecules usable for structure training: cyclic, with a scaffold that fits ``max_scaffold_len``"""
    indices, too_long = [], 0
    for index, scaffold in enumerate(corpus.scaffolds):
        if scaffold is None:
            continue
        try:
            params.vocab.encode(scaffold, params.config.max_scaffold_len)
        except TooLong:
            too_long += 1
            continue
        indices.append(index)
    skipped = len(corpus) - len(indices)
    if skipped:
        params.logger.warning(
            "structure training skips %d molecules: %d acyclic, %d with scaffolds over %d tokens",
            skipped,
            skipped - too_long,
            too_long,
            params.config.max_scaffold_len,
        )
    return indices


class StructureTrainer(DenoiserTrainer):
    """Trains the conditional denoiser and the scaffold encoder, the base denoiser stays frozen"""

    stage = SCM

    @property
    def parameters(self) -> List[torch.nn.Parameter]:
        return module_parameters([self.params.theta_c, self.params.scaffold_encoder])

    def _train_mode(self) -> None:
        self.params.theta0.eval()
        self.params.theta_c.train()
        self.params.scaffold_encoder.train()

    def _denoise(self, x_t: torch.Tensor, steps: torch.Tensor, batch: Dict[str, torch.Tensor]) -> torch.Tensor:
        scaffolds = [self.corpus.scaffolds[index] for index in batch["index"].tolist()]
        encoded, mask = self.params.encode_scaffolds(scaffolds)
        return self.params.theta_c(x_t, steps, encoded, mask)


def train_scm(config: TrainConfig, params: Optional[DenoiserParams] = None, progress: bool = False) -> StageResult:
    """
    Fine-tune the structure module and write its checkpoint next to the base one.

    :param config: training settings
    :param params: pretrained denoisers, read from ``config.run_dir`` when omitted
    :param progress: show a progress bar
    """
    params = DenoiserParams.load(config.run_dir) if params is None else params
    corpus = load_corpus(config.corpus)
    if not params.has_structure:
        params.attach_structure(seed=derive_seed(config.seed, 4))
    params.freeze_base()
    indices = scaffold_indices(corpus, params)
    if not indices:
        raise CorpusError(f"corpus {config.corpus} holds no molecule with a usable scaffold")
    dataset = MoleculeDataset(corpus, params.vocab, params.config.seq_len, config.augment_prob, config.seed, indices)
    trainer = StructureTrainer(config, params, corpus)
    trainer.logger.info("structure training on %d molecules", len(indices))
    optimizer, scheduler = trainer.make_optimizer(config.learning_rate)
    trainer.train(make_loader(dataset, config.batch_size, config.seed), optimizer, scheduler, config.epochs, progress)
    params.eval()
    artifacts = params.save(Path(config.run_dir))
    trainer.write_loss_log(config.run_dir)
    return StageResult(params, artifacts, trainer.losses)
