"""
Toy platoon environments: multi-UAV coverage and EV charging energy sharing.
"""

from .base import *
from .coverage import *
from .energy import *

__all__ = []

from .base import __all__ as _a

__all__ += _a
del _a

from .coverage import __all__ as _a

__all__ += _a
del _a

from .energy import __all__ as _a

__all__ += _a
del _a
