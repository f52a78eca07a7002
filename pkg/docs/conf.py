# pylint: skip-file
# Sphinx configuration of the molforge documentation.
import os
import sys

sys.path.insert(0, os.path.abspath(".."))

project = "molforge"
copyright = "2026, AI Lab"
author = "AI Lab"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx_autodoc_typehints",
    "myst_parser",
]
source_suffix = [".rst", ".md"]
language = "en"
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

autodoc_member_order = "bysource"
typehints_fully_qualified = False

html_theme = "sphinx_rtd_theme"
