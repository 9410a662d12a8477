from typing import Optional


class PanoramaError(Exception):
    """Base exception for panorama projection errors"""
    pass


class DomainError(PanoramaError, ValueError):
    """Raised when an argument lies outside a kernel's mathematical domain"""
    pass


class ConfigError(PanoramaError):
    """Raised when a projection or optimizer configuration is invalid"""
    pass


class ImageIOError(PanoramaError):
    """Raised when an image cannot be read or written"""
    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(message)


class NumericError(PanoramaError):
    """Raised when a numeric procedure fails to converge or produces non-finite values"""
    pass
