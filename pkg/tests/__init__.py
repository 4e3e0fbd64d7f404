"""Tests module for the conversation quality pipeline."""

