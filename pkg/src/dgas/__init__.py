"""Detection and classification of DGA-generated domain names.

Subpackages: ``rnn`` (recurrent classifier), ``data`` (corpus pipeline and
synthetic generators), plus flat modules for the bigram baseline, metrics,
cross-validation, plotting, and the command-line interface.
"""
from .vocab import CharVocabulary, encode_domain, one_hot

__version__ = "0.1.0"

__all__ = ["CharVocabulary", "encode_domain", "one_hot", "__version__"]
