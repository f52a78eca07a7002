"""
Denoiser networks: the frozen unconditional model, its scaffold-conditioned copy and the scaffold encoder
"""
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import torch
from torch import nn

from molforge.chem.scaffolds import Scaffold
from molforge.data import PathLike
from molforge.diffusion.layers import TransformerLayer, uniform_init
from molforge.diffusion.rounding import embed, round_to_tokens
from molforge.diffusion.schedule import NoiseSchedule, Steps
from molforge.diffusion.vocabulary import PAD, Vocabulary
from molforge.errors import CheckpointError, ConfigError, DependencyMissing, ShapeMismatch, TooLong
from molforge.numeric.checkpoint import load_checkpoint, save_checkpoint

VOCAB_FILE = "vocab.txt"
BASE_FILE = "theta0.ckpt"
SCM_FILE = "scm.ckpt"


# pylint: disable=too-many-instance-attributes
@dataclass
class ModelConfig:
    """
    Network and diffusion sizes.

    :param diffusion_steps: T
    :param dim: embedding width d
    :param layers: transformer layers N of each denoiser
    :param heads: attention heads
    :param seq_len: token sequence length n, start and end markers included
    :param ff_dim: feed-forward width
    :param dropout: drop probability after feed-forward blocks
    :param encoder_layers: self-attention layers of the scaffold encoder
    :param max_scaffold_len: longest scaffold token sequence m_max
    :param vocab_size: v, filled from the vocabulary
    """

    diffusion_steps: int = 200
    dim: int = 64
    layers: int = 2
    heads: int = 4
    seq_len: int = 64
    ff_dim: int = 256
    dropout: float = 0.1
    encoder_layers: int = 2
    max_scaffold_len: int = 32
    vocab_size: int = 0

    def __post_init__(self):
        for name in ("diffusion_steps", "dim", "layers", "heads", "seq_len", "ff_dim", "encoder_layers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.dim % self.heads:
            raise ConfigError(f"dim {self.dim} is not divisible by heads {self.heads}")
        if not 0 <= self.dropout < 1:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if not 3 <= self.max_scaffold_len <= self.seq_len:
            raise ConfigError(f"max_scaffold_len must be in [3, seq_len], got {self.max_scaffold_len}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "ModelConfig":
        known = cls.__dataclass_fields__  # pylint: disable=no-member
        return cls(**{key: value for key, value in values.items() if key in known})


def seeded_init(module: nn.Module, seed: int) -> nn.Module:
    """Initialize ``module`` from ``seed`` without touching the global generator"""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        uniform_init(module)
    return module


class DenoiserTransformer(nn.Module):
    """
    Predicts the clean state ``x0`` from ``x_t`` and ``t``.

    Timestep and positional embeddings are added to the input.
    The conditional variant carries a cross-attention block per layer.
    """

    def __init__(self, config: ModelConfig, conditional: bool = False, token_table: bool = True):
        """
        :param config: sizes
        :param conditional: add cross-attention to a scaffold encoding
        :param token_table: own the token embedding table
        """
        super().__init__()
        if token_table and config.vocab_size < 1:
            raise ConfigError("vocab_size must be set before building a denoiser")
        self.config = config
        self.conditional = conditional
        self.token_embedding = nn.Embedding(config.vocab_size, config.dim) if token_table else None
        self.positions = nn.Embedding(config.seq_len, config.dim)
        self.time_embedding = nn.Embedding(config.diffusion_steps + 1, config.dim)
        self.layers = nn.ModuleList(
            [
                TransformerLayer(config.dim, config.heads, config.ff_dim, config.dropout, cross_attention=conditional)
                for _ in range(config.layers)
            ]
        )
        self.head = nn.Linear(config.dim, config.dim)

    def conditional_copy(self, seed: int) -> "DenoiserTransformer":
        """
        Conditional denoiser that starts out computing exactly what this one does.

        Shared weights are copied, cross-attention projections are drawn from ``seed``
        and their output projections zeroed.
        """
        copy = seeded_init(DenoiserTransformer(self.config, conditional=True, token_table=False), seed)
        state = {key: value for key, value in self.state_dict().items() if not key.startswith("token_embedding")}
        copy.load_state_dict(state, strict=False)
        for layer in copy.layers:
            layer.zero_cross_attention()
        return copy

    # pylint: disable=arguments-differ
    def forward(  # type: ignore
        self,
        x_t: torch.Tensor,
        steps: Steps,
        context: Optional[torch.Tensor] = None,
        context_mask: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        """
        :param x_t: noisy state ``(n, d)`` or ``(batch, n, d)``
        :param steps: timestep, or one per batch row
        :param context: scaffold encoding ``(m, d)`` or ``(batch, m, d)``
        :param context_mask: ``(batch, m)``, ``True`` marks padding
        :return: predicted ``x0``, same shape as ``x_t``
        """
        unbatched = x_t.dim() == 2
        if unbatched:
            x_t = x_t.unsqueeze(0)
        if x_t.dim() != 3 or x_t.shape[-1] != self.config.dim or x_t.shape[1] > self.config.seq_len:
            raise ShapeMismatch(
                f"state shape {tuple(x_t.shape)} does not fit (n <= {self.config.seq_len}, {self.config.dim})"
            )
        if context is not None and context.dim() == 2:
            context = context.unsqueeze(0).expand(x_t.shape[0], -1, -1)
        if context is not None and context.shape[-1] != self.config.dim:
            raise ShapeMismatch(f"context width {context.shape[-1]} differs from model width {self.config.dim}")
        steps = torch.as_tensor(steps, dtype=torch.long, device=x_t.device).expand(x_t.shape[0])
        length = x_t.shape[1]
        positions = torch.arange(length, device=x_t.device)
        hidden = x_t + self.positions(positions).unsqueeze(0) + self.time_embedding(steps).unsqueeze(1)
        for layer in self.layers:
            hidden = layer(hidden, context, context_mask)
        output = self.head(hidden)
        return output.squeeze(0) if unbatched else output


class ScaffoldEncoder(nn.Module):
    """Self-attention stack over frozen token and positional embeddings of a scaffold"""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.layers = nn.ModuleList(
            [
                TransformerLayer(config.dim, config.heads, config.ff_dim, config.dropout)
                for _ in range(config.encoder_layers)
            ]
        )

    # pylint: disable=arguments-differ
    def forward(  # type: ignore
        self,
        tokens: torch.Tensor,
        token_table: torch.Tensor,
        position_table: torch.Tensor,
        padding_mask: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        """
        :param tokens: scaffold ids ``(batch, m)``
        :param token_table: ``(v, d)`` token embeddings
        :param position_table: ``(n, d)`` positional embeddings
        :param padding_mask: ``(batch, m)``, ``True`` marks padding
        :return: ``(batch, m, d)``
        """
        hidden = embed(tokens, token_table) + position_table[: tokens.shape[1]].unsqueeze(0)
        for layer in self.layers:
            hidden = layer(hidden, padding_mask=padding_mask)
        return hidden


class DenoiserParams:
    """
    Every trained piece the sampler needs: vocabulary, schedule,
    the frozen base denoiser and, once structure training ran, the conditional denoiser with its scaffold encoder.
    """

    # pylint: disable=too-many-arguments
    def __init__(
        self,
        config: ModelConfig,
        vocab: Vocabulary,
        theta0: DenoiserTransformer,
        theta_c: Optional[DenoiserTransformer] = None,
        scaffold_encoder: Optional[ScaffoldEncoder] = None,
        schedule: Optional[NoiseSchedule] = None,
    ):
        if config.vocab_size != len(vocab):
            raise ConfigError(f"model vocab_size {config.vocab_size} differs from vocabulary size {len(vocab)}")
        if theta_c is not None and len(theta_c.layers) != len(theta0.layers):
            raise ConfigError("conditional denoiser must have as many layers as the base denoiser")
        self.config = config
        self.vocab = vocab
        self.theta0 = theta0
        self.theta_c = theta_c
        self.scaffold_encoder = scaffold_encoder
        self.schedule = schedule or NoiseSchedule.linear(config.diffusion_steps)

    @property
    def logger(self) -> logging.Logger:
        return logging.getLogger("molforge")

    @classmethod
    def initial(cls, config: ModelConfig, vocab: Vocabulary, seed: int) -> "DenoiserParams":
        """Untrained base denoiser drawn from ``seed``"""
        config = ModelConfig.from_dict({**config.to_dict(), "vocab_size": len(vocab)})
        return cls(config, vocab, seeded_init(DenoiserTransformer(config), seed))

    @property
    def has_structure(self) -> bool:
        return self.theta_c is not None and self.scaffold_encoder is not None

    @property
    def embedding_table(self) -> torch.Tensor:
        return self.theta0.token_embedding.weight

    def freeze_base(self) -> None:
        for param in self.theta0.parameters():
            param.requires_grad_(False)
        self.theta0.eval()

    def attach_structure(self, seed: int) -> None:
        """Create the conditional denoiser as a zero-contribution copy of the base and a fresh scaffold encoder"""
        self.freeze_base()
        self.theta_c = self.theta0.conditional_copy(seed)
        self.scaffold_encoder = seeded_init(ScaffoldEncoder(self.config), seed + 1)

    def eval(self) -> "DenoiserParams":
        for module in (self.theta0, self.theta_c, self.scaffold_encoder):
            if module is not None:
                module.eval()
        return self

    def embed(self, tokens: torch.Tensor) -> torch.Tensor:
        return embed(tokens, self.embedding_table)

    def round(self, x0: torch.Tensor) -> torch.Tensor:
        return round_to_tokens(x0, self.embedding_table)

    def denoise_uncond(self, x_t: torch.Tensor, steps: Steps) -> torch.Tensor:
        return self.theta0(x_t, steps)

    def denoise_cond(
        self,
        x_t: torch.Tensor,
        steps: Steps,
        scaffold: torch.Tensor,
        scaffold_mask: Optional[torch.Tensor] = None,
    ) -> torch.Tensor:
        if self.theta_c is None:
            raise DependencyMissing("the structure module is not trained, run train-scm first")
        return self.theta_c(x_t, steps, scaffold, scaffold_mask)

    def scaffold_tokens(self, scaffolds: Sequence[Optional[Union[str, Scaffold]]]) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Tokenize scaffolds padded to the longest one.
        ``None`` or an empty string stands for the empty scaffold of acyclic molecules.

        :return: ids ``(batch, m)`` and padding mask ``(batch, m)``
        """
        texts = [_scaffold_text(item) for item in scaffolds]
        ids = []
        for text in texts:
            try:
                encoded = self.vocab.encode(text, self.config.max_scaffold_len)
            except TooLong as exc:
                raise TooLong(f"scaffold {text!r} exceeds {self.config.max_scaffold_len} tokens") from exc
            ids.append(encoded)
        tokens = torch.tensor(ids, dtype=torch.long)
        width = int((tokens != PAD).sum(dim=1).max())
        tokens = tokens[:, :width]
        return tokens, tokens == PAD

    def encode_scaffolds(
        self, scaffolds: Sequence[Optional[Union[str, Scaffold]]]
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Encodings of several scaffolds.

        :return: ``(batch, m, d)`` encodings and the padding mask
        """
        if self.scaffold_encoder is None:
            raise DependencyMissing("the scaffold encoder is not trained, run train-scm first")
        tokens, mask = self.scaffold_tokens(scaffolds)
        device = self.embedding_table.device
        tokens, mask = tokens.to(device), mask.to(device)
        encoded = self.scaffold_encoder(tokens, self.embedding_table, self.theta0.positions.weight, mask)
        return encoded, mask

    def encode_scaffold(self, scaffold: Union[str, Scaffold]) -> torch.Tensor:
        """
        Encoding ``(m, d)`` of one scaffold, ``m`` counting the start and end markers.

        :param scaffold: scaffold SMILES or parsed scaffold
        """
        encoded, _ = self.encode_scaffolds([scaffold])
        return encoded[0]

    def save(self, run_dir: PathLike) -> Dict[str, str]:
        """
        Write vocabulary and checkpoints into ``run_dir``.

        :return: sha256 per written checkpoint
        """
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        self.vocab.save(run_dir / VOCAB_FILE)
        echo = self.config.to_dict()
        hashes = {
            BASE_FILE: save_checkpoint(run_dir / BASE_FILE, self.theta0.state_dict(), {"kind": "denoiser", **echo})
        }
        if self.has_structure:
            tensors = {f"theta_c.{key}": value for key, value in self.theta_c.state_dict().items()}
            tensors.update({f"encoder.{key}": value for key, value in self.scaffold_encoder.state_dict().items()})
            hashes[SCM_FILE] = save_checkpoint(run_dir / SCM_FILE, tensors, {"kind": "scm", **echo})
        self.logger.debug("saved %s to %s", ", ".join(hashes), run_dir)
        return hashes

    @classmethod
    def load(cls, run_dir: PathLike, require_structure: bool = False) -> "DenoiserParams":
        """
        Read a run directory written by :meth:`save`.

        :param run_dir: directory with the vocabulary and checkpoints
        :param require_structure: fail when the structure checkpoint is absent
        """
        run_dir = Path(run_dir)
        for name in (VOCAB_FILE, BASE_FILE) + ((SCM_FILE,) if require_structure else ()):
            if not (run_dir / name).exists():
                raise DependencyMissing(f"{run_dir / name} not found")
        vocab = Vocabulary.load(run_dir / VOCAB_FILE)
        echo, tensors = load_checkpoint(run_dir / BASE_FILE)
        if echo.get("kind") != "denoiser":
            raise CheckpointError(f"{run_dir / BASE_FILE} holds a {echo.get('kind')!r} checkpoint, not a denoiser")
        config = ModelConfig.from_dict(echo)
        theta0 = DenoiserTransformer(config)
        theta0.load_state_dict(tensors)
        params = cls(config, vocab, theta0)
        params.freeze_base()
        if (run_dir / SCM_FILE).exists():
            _, tensors = load_checkpoint(run_dir / SCM_FILE)
            params.theta_c = DenoiserTransformer(config, conditional=True, token_table=False)
            params.theta_c.load_state_dict(_strip_prefix(tensors, "theta_c."))
            params.scaffold_encoder = ScaffoldEncoder(config)
            params.scaffold_encoder.load_state_dict(_strip_prefix(tensors, "encoder."))
        return params.eval()


def _strip_prefix(tensors: Dict[str, torch.Tensor], prefix: str) -> Dict[str, torch.Tensor]:
    return {key[len(prefix) :]: value for key, value in tensors.items() if key.startswith(prefix)}


def _scaffold_text(item: Optional[Union[str, Scaffold]]) -> str:
    if isinstance(item, Scaffold):
        return item.smiles
    if not item:
        return ""
    return Scaffold.from_smiles(item).smiles
