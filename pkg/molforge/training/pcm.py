"""
Training of the noisy-state property predictors
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import torch
from sklearn.model_selection import train_test_split

from molforge.chem import CorpusStats, compute_descriptors, descriptor
from molforge.diffusion.models import DenoiserParams
from molforge.errors import CorpusError, DegenerateStats, MolforgeError
from molforge.guidance.predictor import PredictorSpec, PropertyPredictor, predictor_file
from molforge.numeric.random import derive_seed, make_generator
from molforge.training.base_trainer import TorchTrainer, module_parameters
from molforge.training.config import PCM, TrainConfig
from molforge.training.dataset import Corpus, MoleculeDataset, load_corpus, make_loader, noise_emb, sample_steps
from molforge.training.pretrain import STATS_FILE, StageResult

PROVENANCE_TOLERANCE = 1e-9


def validation_steps(steps: int, t_max: int) -> List[int]:
    """
    Timesteps of the held-out report: a tenth, four tenths and seven tenths of ``steps``, capped at ``t_max``.

    >>> validation_steps(200, 150)
    [20, 80, 140]
    """
    return [min(max(int(fraction * steps), 1), t_max) for fraction in (0.1, 0.4, 0.7)]


class PredictorTrainer(TorchTrainer):
    """
    Regresses one descriptor from noisy embeddings ``x_t``, ``t`` uniform over ``[1, t_max]``.

    Labels are standardized with the corpus mean and standard deviation stored in the predictor spec.
    """

    # pylint: disable=too-many-arguments
    def __init__(
        self,
        config: TrainConfig,
        params: DenoiserParams,
        predictor: PropertyPredictor,
        corpus: Corpus,
        labels: pd.DataFrame,
        stats: Optional[CorpusStats] = None,
    ):
        super().__init__(config)
        self.params = params
        self.predictor = predictor
        self.corpus = corpus
        self.labels = labels
        self.stats = stats
        self.stage = f"{PCM}:{predictor.descriptor}"
        self.validation: Dict[str, float] = {}

    @property
    def spec(self) -> PredictorSpec:
        return self.predictor.spec

    @property
    def parameters(self) -> List[torch.nn.Parameter]:
        return module_parameters([self.predictor])

    def _train_mode(self) -> None:
        self.predictor.train()

    def _context(self, indices: Sequence[int]):
        if not self.spec.use_scaffold:
            return None, None
        with torch.no_grad():
            return self.params.encode_scaffolds([self.corpus.scaffolds[index] for index in indices])

    def _conditions(self, indices: Sequence[int]) -> Optional[torch.Tensor]:
        if not self.spec.condition_on:
            return None
        rows = []
        for index in indices:
            values = self.labels.iloc[index]
            rows.append(
                [
                    (values[name] - self.spec.condition_stats[name][0]) / self.spec.condition_stats[name][1]
                    for name in self.spec.condition_on
                ]
            )
        return torch.tensor(rows, dtype=self.predictor.head.weight.dtype, device=self.device)

    def _targets(self, indices: Sequence[int]) -> torch.Tensor:
        values = self.labels[self.spec.descriptor].to_numpy(dtype=np.float64)[list(indices)]
        return torch.tensor(values, dtype=self.predictor.head.weight.dtype, device=self.device)

    def _predict(self, x_t: torch.Tensor, steps, indices: Sequence[int]) -> torch.Tensor:
        context, mask = self._context(indices)
        return self.predictor(x_t, steps, context, mask, self._conditions(indices))

    def _batch_pass(self, batch: Dict[str, torch.Tensor]) -> Dict[str, Any]:
        tokens = batch["tokens"].to(self.device)
        indices = batch["index"].tolist()
        steps = sample_steps(tokens.shape[0], self.spec.t_max, self.generator).to(self.device)
        with torch.no_grad():
            x_t = noise_emb(tokens, steps, self.params, generator=self.generator)
        return {"prediction": self._predict(x_t, steps, indices), "labels": self._targets(indices)}

    # pylint: disable=arguments-differ
    def _loss(self, prediction, labels) -> Dict[str, torch.Tensor]:
        mse = (((prediction - labels) / self.spec.label_std) ** 2).mean()
        return {"term1": mse, "term2": torch.zeros_like(mse), "total": mse}

    def _on_epoch_end(self, epoch: int) -> None:
        self.check_provenance(epoch)

    def check_provenance(self, epoch: int) -> None:
        """Recompute the label of a few molecules and fail when a stored label disagrees"""
        count = min(self.config.provenance_checks, len(self.corpus))
        if count == 0:
            return
        rng = np.random.default_rng(derive_seed(self.config.seed, 5, epoch))
        for index in rng.choice(len(self.corpus), size=count, replace=False).tolist():
            expected = descriptor(self.corpus.molecules[index], self.spec.descriptor, self.stats)
            stored = float(self.labels[self.spec.descriptor].iloc[index])
            if abs(expected - stored) > PROVENANCE_TOLERANCE * max(1.0, abs(expected)):
                raise MolforgeError(
                    f"label of {self.corpus.smiles[index]!r} for {self.spec.descriptor} is {stored}, "
                    f"the descriptor gives {expected}"
                )

    def validate(self, indices: Sequence[int], steps: Sequence[int]) -> Dict[str, float]:
        """
        Held-out mean squared error in label units.

        :param indices: corpus indices of the held-out molecules
        :param steps: timesteps to report, ``0`` means the clean embeddings
        :return: ``mse_t<step>`` per timestep and ``label_variance`` of the held-out labels
        """
        self.predictor.eval()
        dataset = MoleculeDataset(self.corpus, self.params.vocab, self.params.config.seq_len, indices=indices)
        tokens = torch.stack([dataset[item]["tokens"] for item in range(len(dataset))]).to(self.device)
        labels = self._targets(indices)
        report = {}
        with torch.no_grad():
            for step in steps:
                if step == 0:
                    x_t = self.params.embed(tokens)
                else:
                    generator = make_generator(derive_seed(self.config.seed, 7, step))
                    x_t = noise_emb(tokens, step, self.params, generator=generator)
                prediction = self._predict(x_t, step, indices)
                report[f"mse_t{step}"] = float(((prediction - labels) ** 2).mean())
        report["label_variance"] = float(labels.var(unbiased=False))
        self.validation = report
        return report


def descriptor_labels(corpus: Corpus, names: Sequence[str], stats: CorpusStats) -> pd.DataFrame:
    """Descriptor table of the corpus, one row per molecule"""
    return compute_descriptors(corpus.molecules, names, stats)


def _spec(config: TrainConfig, name: str, labels: pd.DataFrame, t_max: int, use_scaffold: bool) -> PredictorSpec:
    stds = labels.std(ddof=0)
    means = labels.mean()
    condition_on = tuple(other for other in config.descriptors if other != name) if config.condition_on_others else ()
    for column in (name,) + condition_on:
        if stds[column] <= 0:
            raise DegenerateStats(f"{column} is constant over the corpus")
    return PredictorSpec(
        descriptor=name,
        t_max=t_max,
        label_mean=float(means[name]),
        label_std=float(stds[name]),
        condition_on=condition_on,
        condition_stats={other: (float(means[other]), float(stds[other])) for other in condition_on},
        use_scaffold=use_scaffold,
        layers=config.predictor_layers,
    )


# pylint: disable=too-many-locals
def train_pcm(config: TrainConfig, params: Optional[DenoiserParams] = None, progress: bool = False) -> StageResult:
    """
    Train one predictor per descriptor of ``config.descriptors`` and write their checkpoints.

    :param config: training settings
    :param params: pretrained denoisers, read from ``config.run_dir`` when omitted
    :param progress: show a progress bar
    :return: predictors by descriptor id
    """
    run_dir = Path(config.run_dir)
    params = DenoiserParams.load(run_dir) if params is None else params
    params.eval()
    corpus = load_corpus(config.corpus)
    if len(corpus) < 2:
        raise CorpusError(f"corpus {config.corpus} is too small to hold out validation molecules")
    if (run_dir / STATS_FILE).exists():
        stats = CorpusStats.load(run_dir / STATS_FILE)
    else:
        stats = CorpusStats.from_molecules(corpus.molecules, skip_degenerate=True)
    labels = descriptor_labels(corpus, config.descriptors, stats)
    t_max = config.predictor_t_max(len(params.schedule))
    use_scaffold = config.scaffold_aware and params.has_structure
    if config.scaffold_aware and not params.has_structure:
        params.logger.warning("no structure module in %s, predictors are trained without scaffolds", run_dir)
    train_idx, valid_idx = train_test_split(
        np.arange(len(corpus)), test_size=config.valid_fraction, random_state=config.seed % 2**32
    )
    train_idx, valid_idx = sorted(train_idx.tolist()), sorted(valid_idx.tolist())

    predictors, artifacts, losses = {}, {}, []
    for position, name in enumerate(config.descriptors):
        spec = _spec(config, name, labels, t_max, use_scaffold)
        predictor = PropertyPredictor.initial(params.config, spec, seed=derive_seed(config.seed, 6, position))
        trainer = PredictorTrainer(config, params, predictor, corpus, labels, stats)
        predictor.to(trainer.device)
        dataset = MoleculeDataset(
            corpus, params.vocab, params.config.seq_len, config.augment_prob, config.seed, train_idx
        )
        trainer.logger.info("training %s predictor on %d molecules, t in [1, %d]", name, len(train_idx), t_max)
        optimizer, scheduler = trainer.make_optimizer(config.predictor_lr)
        loader = make_loader(dataset, config.batch_size, config.seed)
        trainer.train(loader, optimizer, scheduler, config.epochs, progress)
        report = trainer.validate(valid_idx, validation_steps(len(params.schedule), t_max))
        trainer.logger.info(
            "%s predictor held-out %s",
            name,
            ", ".join(f"{key}={value:.4f}" for key, value in report.items()),
        )
        predictor.eval()
        artifacts[predictor_file(name)] = predictor.save(run_dir)
        trainer.write_loss_log(run_dir)
        predictors[name] = predictor
        losses.append(trainer.losses)
    return StageResult(predictors, artifacts, pd.concat(losses, ignore_index=True))
