"""A compiler and differential-testing harness for a subset of the Cg shading language."""
__version__ = "0.1.0"
