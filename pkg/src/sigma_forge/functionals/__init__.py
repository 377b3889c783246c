"""The W_k functionals, their variations and the identities they rest on."""

from .density import *  # noqa: F401,F403
from .density import __all__ as _density_all
from .identities import *  # noqa: F401,F403
from .identities import __all__ as _identities_all
from .soliton import *  # noqa: F401,F403
from .soliton import __all__ as _soliton_all
from .variation import *  # noqa: F401,F403
from .variation import __all__ as _variation_all

__all__ = [*_density_all, *_identities_all, *_soliton_all, *_variation_all]
