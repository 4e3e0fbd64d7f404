"""Scripts module for the conversation quality pipeline."""
