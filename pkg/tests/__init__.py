"""Test suite for hypermix."""
