"""Test suite for dilu-sim."""
