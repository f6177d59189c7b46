# Sphinx configuration for the esfstl documentation.
#
# Build with:  sphinx-apidoc -o docs/source src/lib/esfstl && sphinx-build docs/source docs/build

import os
import sys
sys.path.insert(0, os.path.abspath('../../src/lib'))


# -- Project information -----------------------------------------------------

project = 'esfstl'
copyright = '2024, esfstl developers'
author = 'esfstl developers'


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
    'sphinx_rtd_theme',
]

templates_path = ['_templates']
language = 'en'
exclude_patterns = []

autodoc_mock_imports = ['numpy', 'scipy', 'mpmath']
autodoc_member_order = 'bysource'


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
html_copy_source = False


# -- Extension configuration -------------------------------------------------

# Napoleon settings
napoleon_google_docstring = False
napoleon_numpy_docstring = True
napoleon_include_init_with_doc = False
napoleon_include_private_with_doc = False
napoleon_use_param = True
napoleon_use_rtype = True
napoleon_attr_annotations = True
