"""Rumor veracity from sanitized cascade topology with Weisfeiler-Lehman subtree features."""

__version__ = "0.1.0"
