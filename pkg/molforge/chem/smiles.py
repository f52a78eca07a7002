"""
SMILES reading and writing over the supported grammar subset:
organic subset and bracket atoms (charge, hydrogen count), ring bonds ``1``-``9`` and ``%nn``,
branches, bond symbols ``-``, ``=``, ``#`` and lowercase aromatic atoms.
"""
import re
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from molforge.chem.graph import AROMATIC_ELEMENTS, ELEMENTS, ORGANIC_SUBSET, Atom, Bond, BondOrder, MoleculeGraph
from molforge.chem.valence import check_valence, organic_hydrogens, sigma_sum
from molforge.data import PathLike
from molforge.errors import InvalidMolecule, SmilesSyntaxError, UnsupportedFeature

TOKEN_PATTERN = re.compile(
    r"""
    (?P<bracket>\[[^\[\]]*\])
    |(?P<organic>Br|Cl|B|C|N|O|P|S|F|I|b|c|n|o|s|p)
    |(?P<ring>%\d{2}|\d)
    |(?P<bond>[-=\#$:/\\])
    |(?P<open>\()
    |(?P<close>\))
    |(?P<dot>\.)
    |(?P<wildcard>\*)
    """,
    re.VERBOSE,
)
BRACKET_PATTERN = re.compile(
    r"""
    ^\[
    (?P<isotope>\d+)?
    (?P<symbol>[A-Z][a-z]?|[a-z]{1,2})
    (?P<chiral>@+)?
    (?P<hcount>H\d?)?
    (?P<charge>\++\d*|-+\d*)?
    (?P<atom_class>:\d+)?
    \]$
    """,
    re.VERBOSE,
)
BOND_SYMBOLS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE}


def tokenize_smiles(text: str) -> Iterator[Tuple[str, str, int]]:
    """
    Split SMILES text into ``(kind, text, position)`` tokens.

    >>> [token for _, token, _ in tokenize_smiles("ClC%12")]
    ['Cl', 'C', '%12']
    """
    position = 0
    while position < len(text):
        match = TOKEN_PATTERN.match(text, position)
        if match is None:
            raise SmilesSyntaxError(f"unknown symbol {text[position]!r}", position)
        yield match.lastgroup, match.group(), position
        position = match.end()


def _charge(text: Optional[str], position: int) -> int:
    if not text:
        return 0
    sign = 1 if text[0] == "+" else -1
    signs = len(text) - len(text.lstrip(text[0]))
    digits = text[signs:]
    if digits and signs > 1:
        raise SmilesSyntaxError(f"malformed charge {text!r}", position)
    return sign * (int(digits) if digits else signs)


def parse_bracket_atom(text: str, position: int = 0) -> Atom:
    """
    Parse a bracket atom such as ``[nH]`` or ``[NH3+]``.

    :param text: bracket token including the brackets
    :param position: token offset for error messages
    """
    match = BRACKET_PATTERN.match(text)
    if match is None:
        raise SmilesSyntaxError(f"malformed bracket atom {text!r}", position)
    if match.group("isotope"):
        raise UnsupportedFeature(f"isotopes are not supported: {text}")
    if match.group("chiral"):
        raise UnsupportedFeature(f"stereo markers are not supported: {text}")
    if match.group("atom_class"):
        raise UnsupportedFeature(f"atom classes are not supported: {text}")
    symbol = match.group("symbol")
    aromatic = symbol.islower()
    element = symbol.capitalize()
    if element not in ELEMENTS or (aromatic and element not in AROMATIC_ELEMENTS):
        raise UnsupportedFeature(f"element {symbol!r} is not supported: {text}")
    hcount = match.group("hcount")
    explicit_h = 0 if not hcount else int(hcount[1:] or 1)
    if explicit_h > 4:
        raise SmilesSyntaxError(f"hydrogen count above 4 in {text}", position)
    return Atom(element, aromatic, _charge(match.group("charge"), position), explicit_h)


def _organic_atom(text: str) -> Atom:
    return Atom(text.capitalize(), text.islower())


# pylint: disable=too-many-branches,too-many-statements,too-many-locals
def parse_smiles(text: str) -> MoleculeGraph:
    """
    Parse SMILES text into a molecular graph.

    Implicit bonds between two aromatic atoms are aromatic when they lie on a ring, single otherwise.

    :param text: SMILES string
    :return: connected molecular graph
    """
    if not text or not text.isascii():
        raise SmilesSyntaxError("SMILES must be non-empty ASCII text", 0)
    atoms: List[Atom] = []
    bonds: Dict[Tuple[int, int], Tuple[Optional[str], int]] = {}
    rings: Dict[str, Tuple[int, Optional[str], int]] = {}
    branch_stack: List[int] = []
    previous: Optional[int] = None
    pending: Optional[Tuple[str, int]] = None
    ring_allowed = False
    last_kind = ""

    def add_bond(first: int, second: int, symbol: Optional[str], position: int):
        key = (min(first, second), max(first, second))
        if key in bonds:
            raise SmilesSyntaxError(f"duplicate bond between atoms {key}", position)
        bonds[key] = (symbol, position)

    for kind, token, position in tokenize_smiles(text):
        if kind in ("bracket", "organic"):
            atom = parse_bracket_atom(token, position) if kind == "bracket" else _organic_atom(token)
            atoms.append(atom)
            current = len(atoms) - 1
            if previous is not None:
                add_bond(previous, current, pending[0] if pending else None, position)
            elif pending is not None:
                raise SmilesSyntaxError("bond symbol without a preceding atom", pending[1])
            pending = None
            previous = current
            ring_allowed = True
        elif kind == "ring":
            if previous is None or not ring_allowed:
                raise SmilesSyntaxError(f"ring bond {token} must follow an atom", position)
            label = token.lstrip("%")
            symbol = pending[0] if pending else None
            if label in rings:
                partner, opening_symbol, _ = rings.pop(label)
                if partner == previous:
                    raise SmilesSyntaxError(f"ring bond {token} closes on its own atom", position)
                if opening_symbol and symbol and opening_symbol != symbol:
                    raise SmilesSyntaxError(f"conflicting bond symbols on ring bond {token}", position)
                add_bond(partner, previous, opening_symbol or symbol, position)
            else:
                rings[label] = (previous, symbol, position)
            pending = None
        elif kind == "bond":
            if token in "/\\":
                raise UnsupportedFeature(f"stereo bond {token!r} is not supported")
            if token not in BOND_SYMBOLS:
                raise UnsupportedFeature(f"bond symbol {token!r} is not supported")
            if previous is None:
                raise SmilesSyntaxError("bond symbol without a preceding atom", position)
            if pending is not None:
                raise SmilesSyntaxError("two consecutive bond symbols", position)
            pending = (token, position)
        elif kind == "open":
            if previous is None or pending is not None:
                raise SmilesSyntaxError("branch must follow an atom", position)
            branch_stack.append(previous)
            ring_allowed = False
        elif kind == "close":
            if not branch_stack:
                raise SmilesSyntaxError("unbalanced ')'", position)
            if pending is not None:
                raise SmilesSyntaxError("dangling bond symbol before ')'", pending[1])
            if last_kind == "open":
                raise SmilesSyntaxError("empty branch", position)
            previous = branch_stack.pop()
            ring_allowed = False
        elif kind == "dot":
            raise UnsupportedFeature("multi-fragment SMILES ('.') are not supported")
        else:
            raise UnsupportedFeature("wildcard atoms ('*') are not supported")
        last_kind = kind

    if branch_stack:
        raise SmilesSyntaxError("unbalanced '('", len(text))
    if rings:
        label, (_, _, position) = next(iter(rings.items()))
        raise SmilesSyntaxError(f"ring bond {label} never closed", position)
    if pending is not None:
        raise SmilesSyntaxError("dangling bond symbol", pending[1])
    if not atoms:
        raise SmilesSyntaxError("no atoms", 0)

    draft = []
    implicit_aromatic = set()
    for (first, second), (symbol, _) in bonds.items():
        if symbol is None and atoms[first].aromatic and atoms[second].aromatic:
            implicit_aromatic.add((first, second))
            order = BondOrder.AROMATIC
        else:
            order = BOND_SYMBOLS[symbol] if symbol else BondOrder.SINGLE
        draft.append(Bond(first, second, order))
    mol = MoleculeGraph(tuple(atoms), tuple(draft), text)
    if implicit_aromatic - mol.ring_bonds:
        # aromatic atoms joined outside a ring, as in biphenyl
        draft = [
            Bond(bond.begin, bond.end, BondOrder.SINGLE)
            if bond.order is BondOrder.AROMATIC and bond.pair not in mol.ring_bonds
            else bond
            for bond in draft
        ]
        mol = MoleculeGraph(tuple(atoms), tuple(draft), text)
    return mol


def _charge_text(charge: int) -> str:
    if charge == 0:
        return ""
    sign = "+" if charge > 0 else "-"
    return sign if abs(charge) == 1 else f"{sign}{abs(charge)}"


def atom_symbol(mol: MoleculeGraph, idx: int, hydrogens: int) -> str:
    """SMILES text for one atom, bracketed only when the organic subset rules would change it"""
    atom = mol.atoms[idx]
    symbol = atom.element.lower() if atom.aromatic else atom.element
    if atom.element in ORGANIC_SUBSET and atom.formal_charge == 0:
        implicit = organic_hydrogens(atom.element, atom.aromatic, sigma_sum(mol, idx))
        if implicit is not None and implicit[0] == hydrogens:
            return symbol
    hcount = "" if hydrogens == 0 else ("H" if hydrogens == 1 else f"H{hydrogens}")
    return f"[{symbol}{hcount}{_charge_text(atom.formal_charge)}]"


def _bond_symbol(mol: MoleculeGraph, bond: Bond) -> str:
    if bond.order is BondOrder.SINGLE:
        both_aromatic = mol.atoms[bond.begin].aromatic and mol.atoms[bond.end].aromatic
        return "-" if both_aromatic else ""
    return bond.order.symbol


def _ring_label(number: int) -> str:
    return str(number) if number < 10 else f"%{number:02d}"


# pylint: disable=too-many-locals
def write_smiles(mol: MoleculeGraph, priority: Sequence[int]) -> str:
    """
    Serialize a valid molecule by depth-first traversal.

    Traversal starts at the atom with the lowest priority value and visits neighbours
    in ascending priority; every non-tree bond becomes a ring bond.

    :param mol: molecule passing :func:`check_valence`
    :param priority: one comparable value per atom
    :return: SMILES text
    """
    report = check_valence(mol)
    if not report.valid:
        raise InvalidMolecule(f"cannot serialize invalid molecule {mol.source!r}: {report.failures[0].reason}")
    if len(priority) != len(mol):
        raise ValueError(f"expected {len(mol)} priorities, got {len(priority)}")

    def ordered(idx):
        return sorted(mol.adjacency[idx], key=lambda item: priority[item[0]])

    visited = [False] * len(mol)
    children: List[List[Tuple[int, Bond]]] = [[] for _ in mol.atoms]
    openings: List[List[Tuple[int, Bond]]] = [[] for _ in mol.atoms]
    closings: List[List[Bond]] = [[] for _ in mol.atoms]
    seen_closures = set()

    # iterative DFS, same visit order as the recursive form
    root = min(range(len(mol)), key=lambda idx: priority[idx])
    iterators = {}
    visited[root] = True
    path = [(root, None)]
    iterators[root] = iter(ordered(root))
    while path:
        current, parent_bond = path[-1]
        step = next(iterators[current], None)
        if step is None:
            path.pop()
            continue
        neighbour, bond = step
        if bond is parent_bond:
            continue
        if visited[neighbour]:
            if bond.pair not in seen_closures:
                seen_closures.add(bond.pair)
                openings[neighbour].append((current, bond))
                closings[current].append(bond)
            continue
        visited[neighbour] = True
        children[current].append((neighbour, bond))
        iterators[neighbour] = iter(ordered(neighbour))
        path.append((neighbour, bond))

    free_labels = list(range(1, 100))
    assigned: Dict[Tuple[int, int], int] = {}
    parts: List[str] = []

    def emit(idx: int):
        parts.append(atom_symbol(mol, idx, report.hydrogens[idx]))
        for bond in closings[idx]:
            label = assigned.pop(bond.pair)
            parts.append(_ring_label(label))
            free_labels.append(label)
            free_labels.sort()
        for _, bond in sorted(openings[idx], key=lambda item: priority[item[0]]):
            label = free_labels.pop(0)
            assigned[bond.pair] = label
            parts.append(_bond_symbol(mol, bond) + _ring_label(label))
        for position, (child, bond) in enumerate(children[idx]):
            last = position == len(children[idx]) - 1
            if not last:
                parts.append("(")
            parts.append(_bond_symbol(mol, bond))
            emit(child)
            if not last:
                parts.append(")")

    emit(root)
    return "".join(parts)


def read_smiles_file(path: PathLike) -> Iterator[Tuple[int, str]]:
    """
    Iterate over a one-SMILES-per-line file.

    Lines starting with ``#`` and blank lines are skipped, trailing whitespace is stripped.

    :param path: UTF-8 text file
    :return: ``(line number, smiles)`` pairs, line numbers start at 1
    """
    with Path(path).open(encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.rstrip()
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield number, line.strip()
