from pathlib import Path
from typing import Tuple, Union

PathLike = Union[str, Path]
# atom index pair of a bond
Edge = Tuple[int, int]
