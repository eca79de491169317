# SPDX-License-Identifier: MIT
"""Tests for pywmeq."""
