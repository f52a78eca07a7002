"""
Pretraining of the unconditional denoiser
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple

import pandas as pd
import torch

from molforge.chem import CorpusStats
from molforge.diffusion.models import DenoiserParams
from molforge.diffusion.rounding import rounding_loss
from molforge.diffusion.schedule import q_sample
from molforge.numeric.random import derive_seed
from molforge.training.base_trainer import TorchTrainer, module_parameters
from molforge.training.config import PRETRAIN, TrainConfig
from molforge.training.dataset import Corpus, MoleculeDataset, build_vocabulary, load_corpus, make_loader, sample_steps

STATS_FILE = "corpus_stats.json"


@dataclass
class StageResult:
    """
    Outcome of a training stage.

    :param model: trained denoisers, or predictors by descriptor id
    :param artifacts: sha256 per file written into the run directory
    :param losses: loss log rows of the stage
    """

    model: Any
    artifacts: Dict[str, str] = field(default_factory=dict)
    losses: pd.DataFrame = field(default_factory=pd.DataFrame)


def denoising_loss(
    x0_hat: torch.Tensor, x0: torch.Tensor, tokens: torch.Tensor, table: torch.Tensor
) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    :return: mean squared error of the x0 prediction and the rounding cross-entropy
    """
    return ((x0_hat - x0) ** 2).mean(), rounding_loss(x0_hat, tokens, table)


class DenoiserTrainer(TorchTrainer):
    """Trains the base denoiser together with the token embeddings"""

    stage = PRETRAIN

    def __init__(self, config: TrainConfig, params: DenoiserParams, corpus: Corpus):
        super().__init__(config)
        self.params = params
        self.corpus = corpus

    @property
    def parameters(self) -> List[torch.nn.Parameter]:
        return module_parameters([self.params.theta0])

    def _train_mode(self) -> None:
        self.params.theta0.train()

    def _denoise(self, x_t: torch.Tensor, steps: torch.Tensor, batch: Dict[str, torch.Tensor]) -> torch.Tensor:
        return self.params.theta0(x_t, steps)

    def _batch_pass(self, batch: Dict[str, torch.Tensor]) -> Dict[str, Any]:
        tokens = batch["tokens"].to(self.device)
        steps = sample_steps(tokens.shape[0], len(self.params.schedule), self.generator).to(self.device)
        x0 = self.params.embed(tokens)
        x_t = q_sample(x0, steps, self.params.schedule, generator=self.generator)
        return {"x0_hat": self._denoise(x_t, steps, batch), "x0": x0, "tokens": tokens}

    # pylint: disable=arguments-differ
    def _loss(self, x0_hat, x0, tokens) -> Dict[str, torch.Tensor]:
        mse, rounding = denoising_loss(x0_hat, x0, tokens, self.params.embedding_table)
        return {"term1": mse, "term2": rounding, "total": mse + rounding}


def train_pretrain(config: TrainConfig, progress: bool = False) -> StageResult:
    """
    Pretrain the base denoiser on a corpus and write vocabulary, checkpoint, corpus statistics and loss log.

    :param config: training settings, ``config.model`` gives the network sizes
    :param progress: show a progress bar
    """
    corpus = load_corpus(config.corpus)
    vocab = build_vocabulary(corpus)
    params = DenoiserParams.initial(config.model, vocab, seed=derive_seed(config.seed, 0))
    dataset = MoleculeDataset(corpus, vocab, params.config.seq_len, config.augment_prob, config.seed)
    trainer = DenoiserTrainer(config, params, corpus)
    params.theta0.to(trainer.device)
    trainer.logger.info(
        "pretraining on %d molecules, vocabulary of %d tokens, T=%d",
        len(corpus),
        len(vocab),
        params.config.diffusion_steps,
    )
    optimizer, scheduler = trainer.make_optimizer(config.learning_rate)
    trainer.train(make_loader(dataset, config.batch_size, config.seed), optimizer, scheduler, config.epochs, progress)
    params.eval()
    run_dir = Path(config.run_dir)
    artifacts = params.save(run_dir)
    CorpusStats.from_molecules(corpus.molecules, skip_degenerate=True).save(run_dir / STATS_FILE)
    trainer.write_loss_log(run_dir)
    return StageResult(params, artifacts, trainer.losses)
