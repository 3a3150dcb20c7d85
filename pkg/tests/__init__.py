"""
Test package for lowzero.
"""
