#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Legacy install shim for lowzero.

All metadata lives in pyproject.toml; this file only lets pip versions
without PEP 660 support do an editable install.
"""

from setuptools import setup

if __name__ == "__main__":
    setup()
