"""Robust performance margins for uncertain LTI systems."""

try:
    from ._rsweep import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:  # build-tree layout: extension sits on sys.path directly
    from _rsweep import *  # noqa: F401,F403
