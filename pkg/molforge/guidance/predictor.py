"""
Noisy-state property regressors used for gradient guidance
"""
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import torch
from torch import nn

from molforge.data import PathLike
from molforge.diffusion.layers import TransformerLayer
from molforge.diffusion.models import ModelConfig, seeded_init
from molforge.diffusion.schedule import Steps
from molforge.errors import CheckpointError, DependencyMissing, ShapeMismatch, StepOutOfRange
from molforge.numeric.checkpoint import load_checkpoint, save_checkpoint


def predictor_file(descriptor: str) -> str:
    return f"predictor_{descriptor}.ckpt"


# pylint: disable=too-many-instance-attributes
@dataclass
class PredictorSpec:
    """
    What a predictor regresses and how its inputs and outputs are scaled.

    :param descriptor: descriptor id of the label
    :param t_max: largest timestep seen in training
    :param label_mean: corpus mean of the label
    :param label_std: corpus standard deviation of the label
    :param condition_on: descriptors fed as extra conditioning tokens
    :param condition_stats: mean and standard deviation per conditioning descriptor
    :param use_scaffold: cross-attend to the scaffold encoding
    :param layers: transformer layers
    """

    descriptor: str
    t_max: int
    label_mean: float = 0.0
    label_std: float = 1.0
    condition_on: Tuple[str, ...] = ()
    condition_stats: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    use_scaffold: bool = False
    layers: int = 2

    def __post_init__(self):
        self.condition_on = tuple(self.condition_on)
        self.condition_stats = {key: tuple(value) for key, value in self.condition_stats.items()}
        missing = set(self.condition_on) - set(self.condition_stats)
        if missing:
            raise ValueError(f"conditioning descriptors {sorted(missing)} have no statistics")
        if self.label_std <= 0:
            raise ValueError(f"label standard deviation of {self.descriptor} must be positive")

    def to_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["condition_on"] = list(self.condition_on)
        values["condition_stats"] = {key: list(value) for key, value in self.condition_stats.items()}
        return values


class PropertyPredictor(nn.Module):
    """
    Transformer encoder over ``x_t`` with a mean-pooled regression head.

    Conditioning descriptors enter as extra tokens appended to the sequence,
    the scaffold enters through cross-attention.
    Outputs are in label units.
    """

    def __init__(self, config: ModelConfig, spec: PredictorSpec):
        super().__init__()
        self.config = config
        self.spec = spec
        self.positions = nn.Embedding(config.seq_len, config.dim)
        self.time_embedding = nn.Embedding(config.diffusion_steps + 1, config.dim)
        self.condition_value = nn.Linear(1, config.dim)
        self.condition_type = nn.Embedding(max(len(spec.condition_on), 1), config.dim)
        self.layers = nn.ModuleList(
            [
                TransformerLayer(config.dim, config.heads, config.ff_dim, config.dropout, spec.use_scaffold)
                for _ in range(spec.layers)
            ]
        )
        self.head = nn.Linear(config.dim, 1)

    @classmethod
    def initial(cls, config: ModelConfig, spec: PredictorSpec, seed: int) -> "PropertyPredictor":
        return seeded_init(cls(config, spec), seed)

    @property
    def descriptor(self) -> str:
        return self.spec.descriptor

    def check_step(self, steps: Steps) -> None:
        high = int(steps.max()) if torch.is_tensor(steps) else int(steps)
        if high > self.spec.t_max:
            raise StepOutOfRange(f"{self.descriptor} predictor is trained up to t={self.spec.t_max}, got t={high}")

    def normalize_conditions(self, values: Dict[str, float], batch: int) -> Optional[torch.Tensor]:
        """
        Scaled conditioning values ``(batch, k)``, the corpus mean where a value is missing.

        :param values: raw descriptor values by id
        :param batch: rows to broadcast to
        """
        if not self.spec.condition_on:
            return None
        scaled = []
        for name in self.spec.condition_on:
            mean, std = self.spec.condition_stats[name]
            scaled.append((values.get(name, mean) - mean) / std)
        return torch.tensor(scaled, dtype=self.head.weight.dtype, device=self.head.weight.device).expand(batch, -1)

    # pylint: disable=arguments-differ, too-many-arguments
    def forward(  # type: ignore
        self,
        x_t: torch.Tensor,
        steps: Steps,
        context: Optional[torch.Tensor] = None,
        context_mask: Optional[torch.Tensor] = None,
        conditions: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        """
        :param x_t: noisy states ``(batch, n, d)``
        :param steps: timestep, or one per row
        :param context: scaffold encodings ``(batch, m, d)`` or ``(m, d)``
        :param context_mask: ``(batch, m)``, ``True`` marks padding
        :param conditions: scaled conditioning values ``(batch, k)``
        :return: predictions ``(batch,)`` in label units
        """
        self.check_step(steps)
        if x_t.dim() != 3 or x_t.shape[-1] != self.config.dim:
            raise ShapeMismatch(f"predictor input {tuple(x_t.shape)} does not fit width {self.config.dim}")
        batch, length, _ = x_t.shape
        steps = torch.as_tensor(steps, dtype=torch.long, device=x_t.device).expand(batch)
        positions = torch.arange(length, device=x_t.device)
        hidden = x_t + self.positions(positions).unsqueeze(0) + self.time_embedding(steps).unsqueeze(1)
        if self.spec.condition_on:
            if conditions is None or conditions.shape != (batch, len(self.spec.condition_on)):
                raise ShapeMismatch(
                    f"{self.descriptor} predictor needs {len(self.spec.condition_on)} conditioning values"
                )
            kinds = torch.arange(len(self.spec.condition_on), device=x_t.device)
            extra = self.condition_value(conditions.unsqueeze(-1)) + self.condition_type(kinds).unsqueeze(0)
            hidden = torch.cat([hidden, extra], dim=1)
        if context is not None and context.dim() == 2:
            context = context.unsqueeze(0).expand(batch, -1, -1)
        if not self.spec.use_scaffold:
            context, context_mask = None, None
        for layer in self.layers:
            hidden = layer(hidden, context, context_mask)
        pooled = hidden[:, :length].mean(dim=1)
        return self.head(pooled).squeeze(-1) * self.spec.label_std + self.spec.label_mean

    def save(self, run_dir: PathLike) -> str:
        echo = {"kind": "predictor", **self.config.to_dict(), "predictor": self.spec.to_dict()}
        return save_checkpoint(Path(run_dir) / predictor_file(self.descriptor), self.state_dict(), echo)

    @classmethod
    def load(cls, run_dir: PathLike, descriptor: str) -> "PropertyPredictor":
        path = Path(run_dir) / predictor_file(descriptor)
        if not path.exists():
            raise DependencyMissing(f"{path} not found, run train-pcm for {descriptor}")
        echo, tensors = load_checkpoint(path)
        if echo.get("kind") != "predictor":
            raise CheckpointError(f"{path} holds a {echo.get('kind')!r} checkpoint, not a predictor")
        predictor = cls(ModelConfig.from_dict(echo), PredictorSpec(**echo["predictor"]))
        predictor.load_state_dict(tensors)
        return predictor.eval()
