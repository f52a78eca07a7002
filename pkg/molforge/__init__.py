""" Controlled SMILES generation with a diffusion language model """
import pkg_resources

try:
    __version__ = pkg_resources.get_distribution("molforge").version
except pkg_resources.DistributionNotFound:
    __version__ = "non-package"
