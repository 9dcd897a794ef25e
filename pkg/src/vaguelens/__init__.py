"""Vague-language modeling for privacy policies.

Corpus preprocessing with a vague-term lexicon, a bidirectional GRU
multi-task network producing per-token fusion vectors, and a
threshold-based hidden-state pattern explorer with HTTP API and CLI.
"""

__version__ = "0.1.0"
