"""
Seeded random draws and seed fan-out
"""
from typing import List, Optional, Sequence

import numpy as np
import torch


def make_generator(seed: int, device: Optional[torch.device] = None) -> torch.Generator:
    return torch.Generator(device=device or "cpu").manual_seed(int(seed))


def rng_gaussian(
    shape: Sequence[int],
    seed: Optional[int] = None,
    dtype: torch.dtype = torch.float32,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """
    Standard normal draws, equal seeds give equal tensors.

    :param shape: output shape
    :param seed: seed for a fresh generator
    :param dtype: floating point type
    :param generator: existing generator to draw from instead of ``seed``
    """
    if generator is None:
        if seed is None:
            raise ValueError("either seed or generator is required")
        generator = make_generator(seed)
    return torch.randn(tuple(shape), generator=generator, dtype=dtype)


def derive_seed(seed: int, *path: int) -> int:
    """
    Independent child seed addressed by ``path``.

    The child for ``(seed, i)`` does not depend on how many children are drawn.

    >>> derive_seed(7, 0) == derive_seed(7, 0)
    True
    >>> derive_seed(7, 0) != derive_seed(7, 1)
    True
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(item) for item in path))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def derive_seeds(seed: int, count: int) -> List[int]:
    return [derive_seed(seed, idx) for idx in range(count)]
