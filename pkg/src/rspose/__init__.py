"""Minimal absolute pose for rolling-shutter cameras with unknown focal
length and radial distortion."""

__version__ = "0.1.0"
