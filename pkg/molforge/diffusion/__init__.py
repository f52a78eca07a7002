"""
Continuous diffusion over SMILES token embeddings
"""
from molforge.diffusion.layers import FeedForward, MultiHeadAttention, TransformerLayer, uniform_init
from molforge.diffusion.models import (
    BASE_FILE,
    SCM_FILE,
    VOCAB_FILE,
    DenoiserParams,
    DenoiserTransformer,
    ModelConfig,
    ScaffoldEncoder,
    seeded_init,
)
from molforge.diffusion.rounding import embed, min_embedding_gap, round_to_tokens, rounding_loss, squared_distances
from molforge.diffusion.schedule import DiffusionState, NoiseSchedule, q_sample, reverse_step
from molforge.diffusion.vocabulary import BOS, EOS, PAD, SPECIAL_TOKENS, Vocabulary, split_tokens
