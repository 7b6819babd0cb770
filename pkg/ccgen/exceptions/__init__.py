"""Custom exceptions and exit-code handlers."""
