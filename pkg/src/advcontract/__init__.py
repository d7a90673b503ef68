"""Deployment-time detection of adversarial DeFi contracts."""

__version__ = "0.1.0"
