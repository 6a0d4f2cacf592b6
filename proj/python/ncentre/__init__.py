"""n-centre Coulomb scattering, Gevrey integrals and symbolic dynamics."""

from ._core import *  # noqa: F401,F403
from ._core import Error, ErrorCode

__all__ = [name for name in dir() if not name.startswith("_")]
