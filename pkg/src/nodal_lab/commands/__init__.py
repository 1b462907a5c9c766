"""CLI command groups for nodal-lab."""
