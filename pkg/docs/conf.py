# Sphinx configuration for platoon_intel.
#
# The API reference is regenerated by sphinx-apidoc on every build from the
# implicit namespace package under src/platoon.

import os
import shutil
import sys

__location__ = os.path.dirname(__file__)
sys.path.insert(0, os.path.join(__location__, "../src"))

from sphinx.ext import apidoc  # noqa: E402

output_dir = os.path.join(__location__, "api")
module_dir = os.path.join(__location__, "../src/platoon")
shutil.rmtree(output_dir, ignore_errors=True)

try:
    apidoc.main(["--implicit-namespaces", "-f", "-o", output_dir, module_dir])
except Exception as e:
    print(f"Running `sphinx-apidoc` failed!\n{e}", file=sys.stderr)

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.intersphinx",
    "sphinx.ext.autosummary",
    "sphinx.ext.viewcode",
    "sphinx.ext.doctest",
    "sphinx.ext.mathjax",
    "sphinx.ext.napoleon",
    "sphinx_rtd_theme",
]

source_suffix = ".rst"
master_doc = "index"

project = "platoon_intel"
copyright = "2026, platoon_intel developers"

try:
    from platoon.intel import __version__ as version
except ImportError:
    version = ""

if not version or version.lower() == "unknown":
    version = os.getenv("READTHEDOCS_VERSION", "unknown")
release = version

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store", ".venv"]
pygments_style = "sphinx"

html_theme = "sphinx_rtd_theme"
html_theme_options = {"display_version": True}
htmlhelp_basename = "platoon_intel-doc"

python_version = ".".join(map(str, sys.version_info[0:2]))
intersphinx_mapping = {
    "python": ("https://docs.python.org/" + python_version, None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "pandas": ("https://pandas.pydata.org/pandas-docs/stable", None),
}

print(f"loading configurations for {project} {version} ...", file=sys.stderr)
