"""Typed records: configuration, prior structures, reports."""
