from importlib.metadata import PackageNotFoundError, version  # pragma: no cover

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = "platoon_intel"
    __version__ = version(dist_name)
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError


from .auction import (
    Distribution,
    MonotonicNet,
    ValuationSampler,
    run_auction,
    train_auction,
)
from .commnet import CommNetPolicy, evaluate, train_marl
from .envs import CoverageEnv, EnergyEnv, make_env

__all__ = [
    "Distribution",
    "MonotonicNet",
    "ValuationSampler",
    "run_auction",
    "train_auction",
    "CommNetPolicy",
    "evaluate",
    "train_marl",
    "CoverageEnv",
    "EnergyEnv",
    "make_env",
]

# Include all exceptions and configuration records
from .config import *
from .config import __all__ as _config

__all__ += _config
del _config

# Include the classical mechanisms and audits
from .mechanisms import *
from .mechanisms import __all__ as _mechanisms

__all__ += _mechanisms
del _mechanisms
