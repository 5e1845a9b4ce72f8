"""Tests for uapoint."""
