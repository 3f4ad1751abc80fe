"""Synthetic instruction-dataset toolkit: generation-scheme prompt builders,
completion parsers, text-similarity deduplication, a tabular preference-
optimization kit and judge-agreement aggregation, backed by the C++ core."""

try:
    from ._forge import *  # noqa: F401,F403  (installed package layout)
    from . import _forge as _impl
except ImportError:  # build-tree layout: module next to the package on PYTHONPATH
    from _forge import *  # noqa: F401,F403
    import _forge as _impl

__version__ = _impl.__version__
