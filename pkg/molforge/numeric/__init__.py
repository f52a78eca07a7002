"""
Tensor primitives, input gradients, seeded noise and checkpoint files on top of torch
"""
from molforge.numeric.autodiff import ComputeTape, backward
from molforge.numeric.checkpoint import decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from molforge.numeric.ops import add, dropout, feed_forward, layer_norm, matmul, softmax_attention
from molforge.numeric.random import derive_seed, derive_seeds, make_generator, rng_gaussian
