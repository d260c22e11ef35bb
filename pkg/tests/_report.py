"""Acceptance lines collected during the run and echoed in the terminal summary."""
LINES = []
