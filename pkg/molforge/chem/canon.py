"""
Canonical atom ranking and the SMILES forms built on it
"""
from typing import List, Sequence, Tuple

import numpy as np

from molforge.chem.graph import MoleculeGraph
from molforge.chem.smiles import write_smiles


def _dense_rank(keys: Sequence) -> List[int]:
    order = {key: rank for rank, key in enumerate(sorted(set(keys)))}
    return [order[key] for key in keys]


def _refine(mol: MoleculeGraph, ranks: List[int]) -> List[int]:
    """Iterate neighbourhood refinement until the number of classes stops growing"""
    num_classes = len(set(ranks))
    while True:
        keys = [
            (
                ranks[idx],
                tuple(sorted((ranks[neighbour], bond.order.value) for neighbour, bond in mol.adjacency[idx])),
            )
            for idx in range(len(mol))
        ]
        ranks = _dense_rank(keys)
        refined = len(set(ranks))
        if refined == num_classes:
            return ranks
        num_classes = refined


def atom_invariants(mol: MoleculeGraph) -> List[Tuple[int, ...]]:
    """Per-atom starting invariant: degree, element, charge, aromaticity, hydrogens, ring membership"""
    hydrogens = mol.hydrogens
    return [
        (
            mol.degree(idx),
            atom.atomic_number,
            atom.formal_charge,
            int(atom.aromatic),
            hydrogens[idx],
            int(atom.ring_member),
        )
        for idx, atom in enumerate(mol.atoms)
    ]


def canonical_ranks(mol: MoleculeGraph) -> List[int]:
    """
    Distinct rank per atom, independent of input atom order for the molecules we handle.

    Ties left after refinement are broken by promoting the lowest-index atom
    of the smallest tied class and refining again.

    :param mol: molecule
    :return: ranks ``0 .. len(mol) - 1``
    """
    ranks = _refine(mol, _dense_rank(atom_invariants(mol)))
    while len(set(ranks)) < len(ranks):
        counts = np.bincount(ranks)
        tied = int(np.flatnonzero(counts > 1)[0])
        chosen = min(idx for idx, rank in enumerate(ranks) if rank == tied)
        ranks = [2 * rank + (1 if rank > tied or (rank == tied and idx != chosen) else 0) for idx, rank in
                 enumerate(ranks)]
        ranks = _refine(mol, _dense_rank(ranks))
    return ranks


def canonical_smiles(mol: MoleculeGraph) -> str:
    """
    Deterministic SMILES for a valid molecule.

    >>> from molforge.chem.smiles import parse_smiles
    >>> canonical_smiles(parse_smiles("OCC")) == canonical_smiles(parse_smiles("CCO"))
    True
    """
    return write_smiles(mol, canonical_ranks(mol))


def randomize_smiles(mol: MoleculeGraph, seed: int) -> str:
    """
    SMILES written from a seeded random atom order.

    :param mol: valid molecule
    :param seed: random seed, equal seeds give equal strings
    """
    order = np.random.default_rng(seed).permutation(len(mol))
    return write_smiles(mol, order.tolist())
