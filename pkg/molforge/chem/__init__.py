"""
Chemistry toolkit: SMILES parsing and writing, validity, scaffolds, fingerprints and descriptors
"""
from molforge.chem.canon import canonical_ranks, canonical_smiles, randomize_smiles
from molforge.chem.descriptors import (
    DIRECTIONS,
    MAXIMIZE,
    MINIMIZE,
    REGISTRY,
    TARGET,
    CrippenLogP,
    CyclePenalty,
    Descriptor,
    HBA,
    HBD,
    MolWeight,
    PLogP,
    SASProxy,
    compute_descriptors,
    default_direction,
    descriptor,
    get_descriptor,
)
from molforge.chem.fingerprints import Fingerprint, cosine_similarity, fingerprint, scaffold_similarity
from molforge.chem.graph import Atom, Bond, BondOrder, MoleculeGraph, is_isomorphic
from molforge.chem.scaffolds import (
    VALIDATION_SCAFFOLDS,
    Scaffold,
    extract_scaffold,
    has_substructure,
    scaffold_prevalence,
)
from molforge.chem.smiles import parse_smiles, read_smiles_file, tokenize_smiles, write_smiles
from molforge.chem.stats import CorpusStats, DescriptorStats, plogp
from molforge.chem.valence import ValidityReport, check_valence
