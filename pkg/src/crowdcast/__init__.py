"""Crowd forecasting and risk decision support for zoned visitor areas."""

__version__ = "0.1.0"
