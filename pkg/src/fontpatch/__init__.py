"""Patch-based font and script classification for document images.

Grayscale images are 2-D uint8 numpy arrays (rows, cols); foreground masks
are boolean arrays of the same shape with True on ink pixels.
"""

__version__ = "0.1.0"
