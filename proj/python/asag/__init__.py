"""Short-answer scoring pipeline: python bindings over the C++ core."""

from asag._asag import *  # noqa: F401,F403
from asag._asag import __doc__  # noqa: F401

__version__ = "0.1.0"
