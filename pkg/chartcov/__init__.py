"""Chart coverage toolkit for V2X intersection state charts."""

__version__ = '1.0.0'
