"""
Settings of the three training stages
"""
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from molforge.chem.descriptors import REGISTRY
from molforge.data import PathLike
from molforge.diffusion.models import ModelConfig
from molforge.errors import ConfigError

PRETRAIN = "pretrain"
SCM = "scm"
PCM = "pcm"
STAGES = (PRETRAIN, SCM, PCM)


# pylint: disable=too-many-instance-attributes
@dataclass
class TrainConfig:
    """
    :param corpus: one-SMILES-per-line training file
    :param run_dir: directory receiving checkpoints, loss log and manifest
    :param stage: ``pretrain``, ``scm`` or ``pcm``
    :param model: network sizes, used by pretraining only, later stages read them from the checkpoint
    :param augment_prob: probability of replacing a molecule by a random SMILES form
    :param batch_size: molecules per optimizer step
    :param learning_rate: Adam learning rate of the denoisers
    :param epochs: passes over the corpus
    :param max_steps: stop after this many optimizer steps
    :param seed: global seed
    :param warmup_steps: linear learning rate ramp length
    :param grad_clip: global gradient norm bound
    :param valid_fraction: held-out share for predictor validation
    :param predictor_lr: Adam learning rate of the property predictors
    :param descriptors: descriptor ids a predictor is trained for
    :param t_max: largest timestep predictors see, ``0.75 T`` when ``None``
    :param predictor_layers: transformer layers per predictor
    :param scaffold_aware: predictors cross-attend to the scaffold of the molecule
    :param condition_on_others: predictors take the other trained descriptors as conditioning tokens
    :param provenance_checks: molecules whose labels are recomputed every predictor epoch
    """

    corpus: PathLike
    run_dir: PathLike
    stage: str = PRETRAIN
    model: ModelConfig = field(default_factory=ModelConfig)
    augment_prob: float = 0.8
    batch_size: int = 32
    learning_rate: float = 1e-4
    epochs: int = 10
    max_steps: Optional[int] = None
    seed: int = 0
    warmup_steps: int = 100
    grad_clip: float = 1.0
    valid_fraction: float = 0.1
    predictor_lr: float = 1e-4
    descriptors: Tuple[str, ...] = ()
    t_max: Optional[int] = None
    predictor_layers: int = 2
    scaffold_aware: bool = True
    condition_on_others: bool = False
    provenance_checks: int = 4

    def __post_init__(self):
        self.corpus = Path(self.corpus)
        self.run_dir = Path(self.run_dir)
        self.descriptors = tuple(self.descriptors)
        if self.stage not in STAGES:
            raise ConfigError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if not 0 <= self.augment_prob <= 1:
            raise ConfigError(f"augment_prob must lie in [0, 1], got {self.augment_prob}")
        for name in ("batch_size", "epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError(f"max_steps must be positive, got {self.max_steps}")
        if self.learning_rate <= 0 or self.predictor_lr <= 0:
            raise ConfigError("learning rates must be positive")
        if self.warmup_steps < 0:
            raise ConfigError(f"warmup_steps must be non-negative, got {self.warmup_steps}")
        if self.grad_clip <= 0:
            raise ConfigError(f"grad_clip must be positive, got {self.grad_clip}")
        if not 0 < self.valid_fraction < 1:
            raise ConfigError(f"valid_fraction must lie in (0, 1), got {self.valid_fraction}")
        if self.stage == PCM and not self.descriptors:
            raise ConfigError("pcm training needs at least one descriptor")
        unknown = [name for name in self.descriptors if name not in REGISTRY]
        if unknown:
            raise ConfigError(f"unknown descriptors {unknown}, expected some of {sorted(REGISTRY)}")

    def predictor_t_max(self, steps: int) -> int:
        """Largest timestep seen by predictors of a model with ``steps`` diffusion steps"""
        t_max = int(0.75 * steps) if self.t_max is None else self.t_max
        if not 1 <= t_max <= steps:
            raise ConfigError(f"t_max must lie in [1, {steps}], got {t_max}")
        return t_max

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["corpus"] = str(self.corpus)
        values["run_dir"] = str(self.run_dir)
        values["descriptors"] = list(self.descriptors)
        return values
