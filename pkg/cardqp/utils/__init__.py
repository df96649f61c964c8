"""
Various utilities.

Includes general utilities, as well as the sub-module :mod:`.test_utils` for test scripts.
"""

from .utils import *
# should not import `test_utils` because it imports from `model`, which in turn uses the utils
# imported above
