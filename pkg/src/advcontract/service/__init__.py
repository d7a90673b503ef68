"""HTTP service wrapping the analysis core."""

from advcontract.service.app import create_app

__all__ = ["create_app"]
