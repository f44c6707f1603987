"""Rigid-cocycle periods for real quadratic fields over indefinite quaternion algebras."""

__version__ = "0.1.0"
