"""
The configuration package.

Declarative, validated run configuration: validators, field descriptors,
schemas and the concrete records used by every command, plus the exception
hierarchy of the toolkit.
"""

from .exceptions import *
from .field import Field
from .fieldvalidation import *
from .records import *
from .schema import ConfigRecord, Schema

__all__ = []

# Include all exceptions
from .exceptions import __all__ as _a

__all__ += _a
del _a

from .fieldvalidation import __all__ as _a

__all__ += _a
del _a

from .records import __all__ as _a

__all__ += _a
del _a

__all__ += [
    "Field",
    "Schema",
    "ConfigRecord",
]
