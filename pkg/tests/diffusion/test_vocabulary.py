# pylint: disable=redefined-outer-name, missing-function-docstring, unused-import
import pytest
import torch

from molforge.diffusion import BOS, EOS, PAD, Vocabulary, split_tokens
from molforge.errors import DecodeFailure, TooLong, UnknownToken

from tests.utils import corpus_forms, toy_corpus, toy_vocab


def test_multi_character_tokens():
    assert split_tokens("Cl") == ["Cl"]
    assert split_tokens("BrC") == ["Br", "C"]
    assert split_tokens("C%12CCCCC%12") == ["C", "%12", "C", "C", "C", "C", "C", "%12"]


def test_specials_come_first(toy_vocab):
    assert toy_vocab.tokens[:3] == ("<pad>", "<bos>", "<eos>")
    assert (PAD, BOS, EOS) == (0, 1, 2)
    assert list(toy_vocab.tokens[3:]) == sorted(toy_vocab.tokens[3:])


def test_encode_layout(toy_vocab):
    ids = toy_vocab.encode("CCO", 8)
    assert ids[0] == BOS
    assert ids[4] == EOS
    assert ids[5:] == [PAD] * 3
    assert toy_vocab.decode(ids) == "CCO"


def test_round_trip_over_corpus(toy_corpus, toy_vocab):
    for _, text in toy_corpus:
        assert toy_vocab.decode(toy_vocab.encode(text, 100)) == text


def test_too_long(toy_vocab):
    with pytest.raises(TooLong):
        toy_vocab.encode("CCCC", 5)


def test_unknown_token():
    with pytest.raises(UnknownToken):
        Vocabulary(["C"]).encode("CN", 8)


def test_decode_without_end_token(toy_vocab):
    ids = toy_vocab.encode("CC", 6)[:3]
    with pytest.raises(DecodeFailure) as error:
        toy_vocab.decode(ids)
    assert "<bos>" in error.value.raw
    assert toy_vocab.decode(ids, strict=False) == "CC"


def test_decode_stops_at_first_end_token(toy_vocab):
    carbon = toy_vocab.index["C"]
    assert toy_vocab.decode([carbon, PAD, carbon, EOS, carbon]) == "CC"


def test_save_load(toy_vocab, tmp_path):
    toy_vocab.save(tmp_path / "vocab.txt")
    assert Vocabulary.load(tmp_path / "vocab.txt") == toy_vocab
    lines = (tmp_path / "vocab.txt").read_text().splitlines()
    assert lines[toy_vocab.index["C"]] == "C"


def test_encode_batch(toy_vocab):
    batch = toy_vocab.encode_batch(["CC", "c1ccccc1"], 12)
    assert batch.dtype == torch.long
    assert batch.shape == (2, 12)
