"""braindec: phrase-aligned sentiment decoding from multichannel recordings.

The pipeline: segment narration transcripts into phrases at pauses, pair each
phrase with a soft sentiment label, cut fixed windows from the recording at
phrase onsets, train from-scratch MLP/LSTM decoders on the soft targets, and
summarize multi-seed results with balanced accuracy and t-tests.
"""

from .backends import ACTIVE_BACKEND

__version__ = "0.1.0"

__all__ = ["ACTIVE_BACKEND", "__version__"]
