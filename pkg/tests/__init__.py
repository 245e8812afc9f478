"""Tests for neuro_qp."""
