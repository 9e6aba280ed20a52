"""Shared utilities for dinsim modules and commands."""
