"""Oracles, sampling validation, instance files and the command line."""
