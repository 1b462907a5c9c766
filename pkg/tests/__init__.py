"""Test suite for nodal-lab."""
