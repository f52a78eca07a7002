"""
SMILES token vocabulary with padding, start and end markers
"""
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import torch

from molforge.chem.smiles import tokenize_smiles
from molforge.data import PathLike
from molforge.errors import DecodeFailure, TooLong, UnknownToken

PAD, BOS, EOS = 0, 1, 2
SPECIAL_TOKENS = ("<pad>", "<bos>", "<eos>")
# ring labels any re-serialization may need
RING_LABELS = tuple(str(digit) for digit in range(1, 10))


def split_tokens(smiles: str) -> List[str]:
    """
    Chemical tokens, longest match first.

    >>> split_tokens("ClC%12CC[nH]%12")
    ['Cl', 'C', '%12', 'C', 'C', '[nH]', '%12']
    """
    return [text for _, text, _ in tokenize_smiles(smiles)]


class Vocabulary:
    """
    Bijective token to id mapping, ids 0, 1 and 2 reserved for ``<pad>``, ``<bos>`` and ``<eos>``.

    :param tokens: chemical tokens, specials are added in front
    """

    def __init__(self, tokens: Iterable[str]):
        ordered = list(SPECIAL_TOKENS)
        for token in tokens:
            if token not in ordered:
                ordered.append(token)
        self.tokens: Tuple[str, ...] = tuple(ordered)
        self.index: Dict[str, int] = {token: idx for idx, token in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"

    @classmethod
    def from_corpus(cls, smiles: Iterable[str]) -> "Vocabulary":
        """
        Specials, then the sorted union of corpus tokens and ring labels 1-9.

        :param smiles: every SMILES form the model will see
        """
        found = set(RING_LABELS)
        for text in smiles:
            found.update(split_tokens(text))
        return cls(sorted(found))

    def encode(self, smiles: str, length: int) -> List[int]:
        """
        ``<bos>`` tokens ``<eos>`` then padding up to ``length``.

        :param smiles: SMILES text
        :param length: sequence length n
        """
        tokens = split_tokens(smiles)
        if len(tokens) + 2 > length:
            raise TooLong(f"{smiles!r} has {len(tokens)} tokens, at most {length - 2} fit")
        unknown = [token for token in tokens if token not in self.index]
        if unknown:
            raise UnknownToken(f"tokens {unknown} of {smiles!r} are not in the vocabulary")
        ids = [BOS] + [self.index[token] for token in tokens] + [EOS]
        return ids + [PAD] * (length - len(ids))

    def encode_batch(self, smiles: Sequence[str], length: int) -> torch.Tensor:
        """``(batch, length)`` int64 tensor"""
        return torch.tensor([self.encode(text, length) for text in smiles], dtype=torch.long)

    def decode(self, ids: Iterable[int], strict: bool = True) -> str:
        """
        Text of the tokens before the first ``<eos>``, other special tokens skipped.

        :param ids: token ids
        :param strict: raise :class:`DecodeFailure` when no ``<eos>`` is present
        """
        ids = [int(idx) for idx in ids]
        if EOS not in ids:
            raw = self.raw(ids)
            if strict:
                raise DecodeFailure(f"no end token in generated sequence {raw!r}", raw)
            return "".join(self.tokens[idx] for idx in ids if idx > EOS)
        return "".join(self.tokens[idx] for idx in ids[: ids.index(EOS)] if idx > EOS)

    def raw(self, ids: Iterable[int]) -> str:
        """Every token including specials, for diagnostics"""
        return " ".join(self.tokens[int(idx)] for idx in ids)

    def save(self, path: PathLike) -> None:
        """One token per line, line number is the id"""
        Path(path).write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: PathLike) -> "Vocabulary":
        tokens = Path(path).read_text(encoding="utf-8").splitlines()
        if tuple(tokens[: len(SPECIAL_TOKENS)]) != SPECIAL_TOKENS:
            raise ValueError(f"{path} does not start with the special tokens {SPECIAL_TOKENS}")
        return cls(tokens[len(SPECIAL_TOKENS) :])
