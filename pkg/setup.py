#!/usr/bin/env python3
"""Setup script for the floodsight package."""
from setuptools import setup

# Configuration is in pyproject.toml
setup()
