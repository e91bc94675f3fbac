# Sphinx configuration of the eigenres documentation.

import os
import sys

sys.path.insert(0, os.path.abspath("../.."))

project = "eigenres"
copyright = "eigenres contributors"
author = "eigenres contributors"
release = "develop"

needs_sphinx = "3.5.4"

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx_autodoc_typehints",
]

# the docstrings are Google style
napoleon_google_docstring = True
napoleon_numpy_docstring = False

autodoc_member_order = "bysource"

source_suffix = ".rst"
master_doc = "index"
exclude_patterns = []

# shorten module names in the api pages
add_module_names = False

html_theme = "default"
htmlhelp_basename = "eigenresdoc"
