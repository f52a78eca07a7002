"""
Valence model: allowed valences, hydrogen assignment, Kekulé assignment
of aromatic systems and the validity report built on top of them.
"""
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from molforge.chem.graph import HALOGENS, Atom, BondOrder, MoleculeGraph

DEFAULT_VALENCES: Dict[str, Tuple[int, ...]] = {
    "H": (1,),
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}


def allowed_valences(element: str, charge: int = 0) -> Tuple[int, ...]:
    """
    Valences an element may take at a given formal charge.

    Group 15/16 atoms gain one bond per positive charge and lose one per negative charge,
    carbon loses one bond per unit of either sign, boron moves opposite to the charge.

    >>> allowed_valences("N", 1)
    (4,)
    >>> allowed_valences("S")
    (2, 4, 6)
    >>> allowed_valences("C", -1)
    (3,)
    """
    base = DEFAULT_VALENCES[element]
    if charge == 0:
        return base
    if element in ("N", "P", "O", "S"):
        shifted = tuple(valence + charge for valence in base)
    elif element == "C":
        shifted = (4 - abs(charge),)
    elif element == "B":
        shifted = (3 - charge,)
    elif element in HALOGENS:
        shifted = (1 - abs(charge),) if charge < 0 else (1 + charge,)
    else:
        shifted = (1 - abs(charge),)
    return tuple(valence for valence in shifted if valence >= 0)


@dataclass(frozen=True)
class AtomFailure:
    """Reason an atom (or an aromatic system, ``atom_index`` of its first atom) is invalid"""

    atom_index: int
    reason: str


@dataclass(frozen=True)
class ValidityReport:
    """
    Outcome of :func:`check_valence`.

    ``hydrogens`` completes every valence when the molecule is valid;
    ``double_bonds`` holds the aromatic bonds that are double in one Kekulé form.
    """

    valid: bool
    failures: Tuple[AtomFailure, ...]
    hydrogens: Tuple[int, ...]
    double_bonds: FrozenSet[Tuple[int, int]] = frozenset()

    def __bool__(self) -> bool:
        return self.valid


def sigma_sum(mol: MoleculeGraph, idx: int) -> int:
    """Sum of bond orders with aromatic bonds counted once"""
    return sum(bond.order.sigma for _, bond in mol.adjacency[idx])


def organic_hydrogens(element: str, aromatic: bool, sigma: int) -> Optional[Tuple[int, bool]]:
    """
    Implicit hydrogens of an organic subset atom.

    :param element: element symbol
    :param aromatic: aromatic flag
    :param sigma: bond order sum with aromatic bonds counted once
    :return: ``(hydrogens, needs_double_bond)`` or ``None`` when no valence fits
    """
    target = next((valence for valence in DEFAULT_VALENCES[element] if valence >= sigma), None)
    if target is None:
        return None
    remaining = target - sigma
    if not aromatic:
        return remaining, False
    needs_pi = remaining >= 1
    return remaining - int(needs_pi), needs_pi


def _bracket_state(atom: Atom, sigma: int) -> Optional[Tuple[int, bool]]:
    valences = allowed_valences(atom.element, atom.formal_charge)
    total = sigma + atom.explicit_h
    if total in valences:
        return atom.explicit_h, False
    if atom.aromatic and total + 1 in valences:
        return atom.explicit_h, True
    return None


def _pi_electrons(mol: MoleculeGraph, idx: int, needs_pi: bool) -> int:
    if needs_pi:
        return 1
    atom = mol.atoms[idx]
    exocyclic_double = any(
        bond.order is BondOrder.DOUBLE for _, bond in mol.adjacency[idx]
    )
    if exocyclic_double:
        return 0
    if atom.element in ("C", "B"):
        return 2 if atom.formal_charge < 0 else 0
    return 2


def _huckel_ok(electrons: Dict[int, int], component: Sequence[int], rings: List[List[int]]) -> bool:
    if sum(electrons[idx] for idx in component) % 4 == 2:
        return True
    members = set(component)
    own_rings = [ring for ring in rings if set(ring) <= members]
    return bool(own_rings) and all(sum(electrons[idx] for idx in ring) % 4 == 2 for ring in own_rings)


# pylint: disable=too-many-locals,too-many-branches
def check_valence(mol: MoleculeGraph) -> ValidityReport:
    """
    Check every atom against the allowed valences and every aromatic system
    for a Kekulé assignment satisfying the 4n+2 electron rule
    (on the whole system or on each of its smallest rings).

    :param mol: parsed molecule
    :return: report with per-atom failures and the hydrogen assignment
    """
    failures: List[AtomFailure] = []
    hydrogens: List[int] = []
    needs_pi: List[bool] = []
    for idx, atom in enumerate(mol.atoms):
        sigma = sigma_sum(mol, idx)
        if atom.bracket:
            state = _bracket_state(atom, sigma)
        elif atom.formal_charge == 0:
            state = organic_hydrogens(atom.element, atom.aromatic, sigma)
        else:
            state = None
        if state is None:
            failures.append(
                AtomFailure(
                    idx,
                    f"{atom.element} with bond order sum {sigma} and charge {atom.formal_charge} "
                    f"matches none of the valences {allowed_valences(atom.element, atom.formal_charge)}",
                )
            )
            state = (atom.explicit_h or 0, False)
        hydrogens.append(state[0])
        needs_pi.append(state[1])
        if atom.aromatic and not atom.ring_member:
            failures.append(AtomFailure(idx, "aromatic atom outside a ring"))

    aromatic_graph = nx.Graph()
    aromatic_graph.add_nodes_from(idx for idx, atom in enumerate(mol.atoms) if atom.aromatic)
    aromatic_graph.add_edges_from(bond.pair for bond in mol.bonds if bond.order is BondOrder.AROMATIC)

    matching_graph = nx.Graph()
    matching_graph.add_nodes_from(idx for idx in aromatic_graph if needs_pi[idx])
    matching_graph.add_edges_from(
        (begin, end) for begin, end in aromatic_graph.edges if needs_pi[begin] and needs_pi[end]
    )
    matching = nx.max_weight_matching(matching_graph, maxcardinality=True)
    matched = {idx for pair in matching for idx in pair}
    for idx in sorted(set(matching_graph) - matched):
        failures.append(AtomFailure(idx, "aromatic system admits no Kekulé assignment"))

    if aromatic_graph.number_of_nodes():
        electrons = {idx: _pi_electrons(mol, idx, needs_pi[idx]) for idx in aromatic_graph}
        rings = [sorted(ring) for ring in nx.minimum_cycle_basis(aromatic_graph)]
        for component in nx.connected_components(aromatic_graph):
            component = sorted(component)
            if len(component) > 1 and not _huckel_ok(electrons, component, rings):
                failures.append(
                    AtomFailure(component[0], "aromatic system violates the 4n+2 electron rule")
                )

    failures.sort(key=lambda failure: failure.atom_index)
    return ValidityReport(
        valid=not failures,
        failures=tuple(failures),
        hydrogens=tuple(hydrogens),
        double_bonds=frozenset(tuple(sorted(pair)) for pair in matching),
    )
