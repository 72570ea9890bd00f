"""Tests for dp-byoa."""
