# Sphinx configuration of the cardqp API documentation, see
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys
sys.path.insert(0, os.path.abspath('..'))
from cardqp import __version__

project = 'cardqp'
copyright = '2024, cardqp developers'
author = 'cardqp developers'
version = __version__
release = ''

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.intersphinx',
    'numpydoc',
    'sphinx_rtd_theme',
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
    'torch': ('https://pytorch.org/docs/master/', None),
}

templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

# ``ArrayLike`` is imported from ``numpy.typing`` with postponed annotations
autodoc_type_aliases = {
    'ArrayLike': 'ArrayLike'
}

# dataclasses are documented by their class docstring; exceptions list no members
numpydoc_class_members_toctree = False
numpydoc_show_inherited_class_members = False

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
