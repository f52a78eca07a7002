"""
Shared optimisation loop of the denoisers and property predictors
"""
import logging
import math
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Iterable, List

import pandas as pd
import torch
from torch.optim import Adam
from torch.optim.lr_scheduler import LambdaLR
from torch.utils.data import DataLoader
from tqdm import tqdm

from molforge.data import PathLike
from molforge.errors import MolforgeError
from molforge.numeric.random import derive_seed, make_generator
from molforge.training.config import TrainConfig
from molforge.utils.session_handler import State

LOSS_LOG_FILE = "loss_log.csv"
LOSS_COLUMNS = ["step", "stage", "term1", "term2", "total"]


def warmup_schedule(optimizer: torch.optim.Optimizer, warmup_steps: int) -> LambdaLR:
    """Learning rate rising linearly to its configured value over ``warmup_steps`` steps"""
    if warmup_steps == 0:
        return LambdaLR(optimizer, lambda step: 1.0)
    return LambdaLR(optimizer, lambda step: min(1.0, (step + 1) / warmup_steps))


class TorchTrainer(ABC):
    """Base class for the three training stages"""

    stage: str

    def __init__(self, config: TrainConfig):
        self.config = config
        self.device = State().device
        self.generator = make_generator(derive_seed(config.seed, 2))
        self.global_step = 0
        self.history: List[Dict[str, Any]] = []
        torch.manual_seed(derive_seed(config.seed, 3))

    @property
    def logger(self) -> logging.Logger:
        return logging.getLogger("molforge")

    @property
    @abstractmethod
    def parameters(self) -> List[torch.nn.Parameter]:
        """Tensors updated by this stage"""

    @abstractmethod
    def _train_mode(self) -> None:
        """Put trained modules into training mode and frozen ones into inference mode"""

    @abstractmethod
    def _batch_pass(self, batch: Dict[str, torch.Tensor]) -> Dict[str, Any]:
        """
        Apply the model to a single batch.

        :param batch: loader batch
        :return: dictionary used to calculate loss
        """

    @abstractmethod
    def _loss(self, **kwargs) -> Dict[str, torch.Tensor]:
        """
        Loss terms of one batch.

        :return: ``term1``, ``term2`` and ``total`` scalars
        """

    def make_optimizer(self, learning_rate: float):
        optimizer = Adam(self.parameters, lr=learning_rate)
        return optimizer, warmup_schedule(optimizer, self.config.warmup_steps)

    def _run_train_step(self, batch: Dict[str, torch.Tensor], optimizer, scheduler) -> Dict[str, float]:
        self._train_mode()
        optimizer.zero_grad()
        model_result = self._batch_pass(batch)
        terms = self._loss(**model_result)
        values = {name: float(value.detach()) for name, value in terms.items()}
        if not all(math.isfinite(value) for value in values.values()):
            raise MolforgeError(f"{self.stage} loss is not finite at step {self.global_step}: {values}")
        terms["total"].backward()
        torch.nn.utils.clip_grad_norm_(self.parameters, self.config.grad_clip)
        optimizer.step()
        scheduler.step()
        self.history.append({"step": self.global_step, "stage": self.stage, **values})
        self.global_step += 1
        return values

    def _on_epoch_end(self, epoch: int) -> None:
        """Hook run after every epoch"""

    def _finished(self) -> bool:
        return self.config.max_steps is not None and self.global_step >= self.config.max_steps

    def train(self, train_data_loader: DataLoader, optimizer, scheduler, epochs: int, progress: bool = False) -> None:
        """
        Run training loop

        :param train_data_loader: data loader for training
        :param optimizer: optimizer
        :param scheduler: learning rate schedule, stepped after every optimizer step
        :param epochs: num training epochs
        :param progress: show a progress bar over epochs
        """
        for epoch in tqdm(range(epochs), disable=not progress, desc=self.stage):
            if hasattr(train_data_loader.dataset, "set_epoch"):
                train_data_loader.dataset.set_epoch(epoch)
            losses = []
            for batch in train_data_loader:
                losses.append(self._run_train_step(batch, optimizer, scheduler)["total"])
                if self._finished():
                    break
            self.logger.debug("Epoch[%d] %s average loss: %.5f", epoch, self.stage, sum(losses) / max(len(losses), 1))
            self._on_epoch_end(epoch)
            if self._finished():
                self.logger.debug("%s stopped after %d steps", self.stage, self.global_step)
                break
        if self.history:
            self.logger.info("%s finished after %d steps, last loss %.5f", self.stage, self.global_step, losses[-1])

    @property
    def losses(self) -> pd.DataFrame:
        return pd.DataFrame(self.history, columns=LOSS_COLUMNS)

    def write_loss_log(self, run_dir: PathLike) -> Path:
        """Append this stage's losses to the loss log of ``run_dir``"""
        path = Path(run_dir) / LOSS_LOG_FILE
        frame = self.losses
        if path.exists():
            previous = pd.read_csv(path)
            frame = pd.concat([previous[previous["stage"] != self.stage], frame], ignore_index=True)
        frame.to_csv(path, index=False)
        return path


def module_parameters(modules: Iterable[torch.nn.Module]) -> List[torch.nn.Parameter]:
    return [param for module in modules for param in module.parameters() if param.requires_grad]
