"""Anharmonic E x epsilon Jahn-Teller model on a Morse bound-state basis."""

__version__ = "0.1.0"

from .morse_core import MorseParams, derive_params, energy_level, x_matrix  # noqa: E402,F401
