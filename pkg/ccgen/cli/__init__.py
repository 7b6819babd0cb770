"""Command modules; each exposes ``COMMANDS`` for registration in ``ccgen.main``."""
