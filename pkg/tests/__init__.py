"""Tests for henon-symmetry-lab."""
