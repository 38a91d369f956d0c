"""Simulator and verification suite for random-receiver quantum communication
through switched Pauli channels."""

__version__ = "0.1.0"

from . import channels, nogo, protocols, qcore, qswitch

__all__ = ["channels", "nogo", "protocols", "qcore", "qswitch", "__version__"]
