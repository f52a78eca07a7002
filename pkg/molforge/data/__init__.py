from molforge.data.typehints import Edge, PathLike
