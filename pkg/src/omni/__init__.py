"""Desk-scale omni-modal interaction pipeline.

Deterministic input token accounting (image tiling, mel framing), multi-turn
session state under a packing budget, the 5:25 text/speech interleave
scheduler with a toy vocoder, pluggable generation/judge backends, a dialogue
construction pipeline, benchmark harnesses, and an HTTP streaming service.
"""

__version__ = "0.1.0"

from . import audio, backends, bench, dialogue, interleave, session, vision  # noqa: F401
from .errors import OmniError  # noqa: F401
