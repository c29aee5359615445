"""Shared helpers: error hierarchy, click validators, random substreams."""
