"""Extractor adapters: raw clips in, evaluation artifacts out.

The adapters share nothing with the evaluation engine beyond the WLT/JSON
file formats; metric math never happens here.
"""
from .errors import AdapterError, DecodeFailure, ModelUnavailable, UnknownExtractor
from .extractors import EXTRACTOR_NAMES, VERSION, AdapterJob, extract

__version__ = VERSION

__all__ = [
    "AdapterError",
    "AdapterJob",
    "DecodeFailure",
    "EXTRACTOR_NAMES",
    "ModelUnavailable",
    "UnknownExtractor",
    "VERSION",
    "extract",
    "__version__",
]
