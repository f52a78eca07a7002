"""
Molecular graph types produced by the SMILES parser
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from molforge.data import Edge

# symbol -> (atomic number, standard atomic mass)
ELEMENTS: Dict[str, Tuple[int, float]] = {
    "H": (1, 1.008),
    "B": (5, 10.811),
    "C": (6, 12.011),
    "N": (7, 14.007),
    "O": (8, 15.999),
    "F": (9, 18.998),
    "P": (15, 30.974),
    "S": (16, 32.065),
    "Cl": (17, 35.453),
    "Br": (35, 79.904),
    "I": (53, 126.904),
}
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})
AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S"})
HALOGENS = frozenset({"F", "Cl", "Br", "I"})
HETEROATOMS = frozenset({"N", "O", "S", "P", "F", "Cl", "Br", "I"})


class BondOrder(Enum):
    """Bond multiplicity; aromatic bonds resolve to 1 or 2 in a Kekulé form"""

    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def symbol(self) -> str:
        """SMILES bond symbol, empty for implicit bonds"""
        return {BondOrder.SINGLE: "-", BondOrder.DOUBLE: "=", BondOrder.TRIPLE: "#"}.get(self, "")

    @property
    def sigma(self) -> int:
        """Bond order with aromatic bonds counted as single"""
        return 1 if self is BondOrder.AROMATIC else self.value


@dataclass(frozen=True)
class Atom:
    """
    Heavy atom of a molecular graph.

    ``explicit_h`` is set only for bracket atoms; organic subset atoms
    get their hydrogens from the valence model.
    """

    element: str
    aromatic: bool = False
    formal_charge: int = 0
    explicit_h: Optional[int] = None
    ring_member: bool = False

    def __post_init__(self):
        if self.element not in ELEMENTS:
            raise ValueError(f"unsupported element {self.element}")
        if self.aromatic and self.element not in AROMATIC_ELEMENTS:
            raise ValueError(f"element {self.element} cannot be aromatic")
        if self.explicit_h is not None and not 0 <= self.explicit_h <= 4:
            raise ValueError(f"explicit hydrogen count must be in [0, 4], got {self.explicit_h}")

    @property
    def bracket(self) -> bool:
        """Atom was written in brackets and carries its own hydrogen count"""
        return self.explicit_h is not None

    @property
    def atomic_number(self) -> int:
        return ELEMENTS[self.element][0]


@dataclass(frozen=True)
class Bond:
    """Undirected bond between two atom indices"""

    begin: int
    end: int
    order: BondOrder = BondOrder.SINGLE

    @property
    def pair(self) -> Edge:
        """Endpoints in ascending order"""
        return (self.begin, self.end) if self.begin < self.end else (self.end, self.begin)

    def other(self, idx: int) -> int:
        """Endpoint opposite to ``idx``"""
        return self.end if idx == self.begin else self.begin


@dataclass(frozen=True)
class MoleculeGraph:
    """
    Connected molecular graph.

    Ring membership flags are recomputed from the bond list on construction,
    so callers never have to keep them in sync.
    """

    atoms: Tuple[Atom, ...]
    bonds: Tuple[Bond, ...]
    source: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(self.bonds))
        num_atoms = len(self.atoms)
        seen = set()
        for bond in self.bonds:
            if bond.begin == bond.end:
                raise ValueError(f"bond endpoints must differ, got {bond.begin}")
            if not (0 <= bond.begin < num_atoms and 0 <= bond.end < num_atoms):
                raise ValueError(f"bond {bond.pair} out of range for {num_atoms} atoms")
            if bond.pair in seen:
                raise ValueError(f"more than one bond between atoms {bond.pair}")
            seen.add(bond.pair)
            if bond.order is BondOrder.AROMATIC and not (
                self.atoms[bond.begin].aromatic and self.atoms[bond.end].aromatic
            ):
                raise ValueError(f"aromatic bond {bond.pair} joins a non-aromatic atom")
        if num_atoms and not nx.is_connected(self.graph):
            raise ValueError("molecule graph must be connected")
        in_ring = set()
        for cycle in nx.cycle_basis(self.graph):
            in_ring.update(cycle)
        object.__setattr__(
            self,
            "atoms",
            tuple(
                atom if atom.ring_member == (idx in in_ring) else replace(atom, ring_member=idx in in_ring)
                for idx, atom in enumerate(self.atoms)
            ),
        )

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def graph(self) -> nx.Graph:
        """networkx view with ``element``/``aromatic``/``charge`` node and ``order`` edge attributes"""
        graph = nx.Graph()
        for idx, atom in enumerate(self.atoms):
            graph.add_node(idx, element=atom.element, aromatic=atom.aromatic, charge=atom.formal_charge)
        for bond in self.bonds:
            graph.add_edge(bond.begin, bond.end, order=bond.order)
        return graph

    @cached_property
    def adjacency(self) -> Tuple[Tuple[Tuple[int, Bond], ...], ...]:
        """For every atom the (neighbour, bond) pairs in bond-list order"""
        neighbours: List[List[Tuple[int, Bond]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            neighbours[bond.begin].append((bond.end, bond))
            neighbours[bond.end].append((bond.begin, bond))
        return tuple(tuple(items) for items in neighbours)

    @cached_property
    def ring_bonds(self) -> frozenset:
        """Pairs of atoms joined by a bond that lies on a cycle"""
        bridges = {tuple(sorted(edge)) for edge in nx.bridges(self.graph)}
        return frozenset(bond.pair for bond in self.bonds if bond.pair not in bridges)

    @cached_property
    def hydrogens(self) -> Tuple[int, ...]:
        """Total hydrogen count per atom, implicit or explicit"""
        # pylint: disable=import-outside-toplevel
        from molforge.chem.valence import check_valence

        return check_valence(self).hydrogens

    def degree(self, idx: int) -> int:
        return len(self.adjacency[idx])

    def bond_between(self, first: int, second: int) -> Optional[Bond]:
        """Bond joining two atoms or ``None``"""
        for neighbour, bond in self.adjacency[first]:
            if neighbour == second:
                return bond
        return None

    def fold_hydrogens(self) -> "MoleculeGraph":
        """
        Explicit ``[H]`` atoms merged into the hydrogen counts of their neighbours.
        A graph made of hydrogens only is returned as it is.
        """
        keep = [idx for idx, atom in enumerate(self.atoms) if atom.element != "H"]
        if not keep or len(keep) == len(self.atoms):
            return self
        return self.subgraph(keep, self.source)

    def subgraph(self, keep: Sequence[int], source: str = "") -> "MoleculeGraph":
        """
        Induced subgraph on ``keep``.

        Bracket atoms that lose bonds get the lost bond orders back as hydrogens,
        organic subset atoms recompute theirs. Aromatic atoms whose double bond
        demand would change (pyrrole-type ``n`` losing a substituent) become bracket atoms.

        :param keep: indices of atoms to keep
        :param source: text stored as the new graph source
        :return: new graph with atoms renumbered in ``keep`` order
        """
        # pylint: disable=import-outside-toplevel
        from molforge.chem.valence import organic_hydrogens, sigma_sum

        index = {old: new for new, old in enumerate(keep)}
        atoms = []
        for old in keep:
            atom = self.atoms[old]
            lost = sum(bond.order.sigma for neighbour, bond in self.adjacency[old] if neighbour not in index)
            if lost and atom.bracket:
                atom = replace(atom, explicit_h=min(4, atom.explicit_h + lost))
            elif lost and atom.aromatic:
                sigma = sigma_sum(self, old)
                before = organic_hydrogens(atom.element, True, sigma)
                after = organic_hydrogens(atom.element, True, sigma - lost)
                if before is not None and (after is None or after[1] != before[1]):
                    atom = replace(atom, explicit_h=min(4, before[0] + lost))
            atoms.append(atom)
        bonds = [
            Bond(index[bond.begin], index[bond.end], bond.order)
            for bond in self.bonds
            if bond.begin in index and bond.end in index
        ]
        return MoleculeGraph(tuple(atoms), tuple(bonds), source)


def is_isomorphic(first: MoleculeGraph, second: MoleculeGraph) -> bool:
    """
    Graph isomorphism respecting element, aromaticity, charge,
    hydrogen count and bond order.
    """
    if len(first) != len(second) or len(first.bonds) != len(second.bonds):
        return False
    left, right = first.graph.copy(), second.graph.copy()
    for graph, mol in ((left, first), (right, second)):
        for idx, count in enumerate(mol.hydrogens):
            graph.nodes[idx]["hydrogens"] = count
    return nx.is_isomorphic(
        left,
        right,
        node_match=lambda a, b: all(a[key] == b[key] for key in ("element", "aromatic", "charge", "hydrogens")),
        edge_match=lambda a, b: a["order"] == b["order"],
    )
