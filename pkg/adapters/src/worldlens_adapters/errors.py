"""Adapter exception hierarchy."""


class AdapterError(Exception):
    """Base class for adapter failures."""


class UnknownExtractor(AdapterError):
    pass


class ModelUnavailable(AdapterError):
    pass


class DecodeFailure(AdapterError):
    pass
