"""
Exception hierarchy shared by every molforge module.

Input validation failures also derive from the matching builtin,
so ``except ValueError`` keeps working for callers that do not know molforge.
"""
from typing import Iterable, Optional, Sequence


class MolforgeError(Exception):
    """Base class for all library errors"""

    exit_code = 1


# chemistry
class SmilesSyntaxError(MolforgeError, ValueError):
    """Malformed SMILES text"""

    def __init__(self, message: str, position: Optional[int] = None):
        """
        :param message: error description
        :param position: character offset where parsing failed
        """
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnsupportedFeature(MolforgeError, ValueError):
    """Valid SMILES that uses a feature outside the supported grammar subset"""


class InvalidMolecule(MolforgeError, ValueError):
    """Molecule failed the valence check"""


class AcyclicMolecule(MolforgeError, ValueError):
    """Scaffold requested for a molecule without rings"""


class UnknownDescriptor(MolforgeError, KeyError):
    """Descriptor id is not registered"""


class DegenerateStats(MolforgeError, ValueError):
    """Zero standard deviation for a normalized descriptor"""


class MissingStats(MolforgeError, KeyError):
    """Corpus statistics lack an entry needed for normalization"""


# numerics
class ShapeMismatch(MolforgeError, ValueError):
    """Operands with incompatible shapes"""


class NotScalar(MolforgeError, ValueError):
    """Reverse pass started from a non-scalar tensor"""


class DetachedTensor(MolforgeError, ValueError):
    """Tensor is not part of the recorded computation"""


class CheckpointError(MolforgeError, ValueError):
    """Checkpoint container is malformed or has an unexpected version"""


# diffusion
class TooLong(MolforgeError, ValueError):
    """Tokenized SMILES exceeds the configured sequence length"""


class UnknownToken(MolforgeError, KeyError):
    """Token is absent from the vocabulary"""


# guidance
class StepOutOfRange(MolforgeError, ValueError):
    """Property predictor queried outside its trained timestep range"""


class DecodeFailure(MolforgeError, ValueError):
    """Rounded token sequence has no EOS token"""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


# training
class CorpusError(MolforgeError, ValueError):
    """Corpus contains lines that do not parse or fail the valence check"""

    exit_code = 3

    def __init__(self, message: str, line_numbers: Iterable[int] = ()):
        self.line_numbers: Sequence[int] = tuple(line_numbers)
        if self.line_numbers:
            shown = ", ".join(str(num) for num in self.line_numbers[:20])
            more = "" if len(self.line_numbers) <= 20 else ", ..."
            message = f"{message}; lines: {shown}{more}"
        super().__init__(message)


# evaluation
class EmptySampleSet(MolforgeError, ValueError):
    """No samples to evaluate"""

    exit_code = 3


class ZeroBaseline(MolforgeError, ZeroDivisionError):
    """Improvement requested against a zero baseline"""


# command line
class ConfigError(MolforgeError, ValueError):
    """Invalid or inconsistent configuration"""

    exit_code = 2


class DependencyMissing(MolforgeError, FileNotFoundError):
    """A stage input (checkpoint, vocabulary, statistics) is missing"""

    exit_code = 4
