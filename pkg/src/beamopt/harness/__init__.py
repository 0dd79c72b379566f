"""Experiment harness: presets, configuration files, runners, CLI."""
